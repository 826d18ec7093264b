#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mstlogit {

enum class KernelKind { Partition, Contiguity, Distance };

struct KernelSpec {
    KernelKind kind = KernelKind::Partition;
    int distance_index = -1;  // index into LocationTable::distance_matrices
};

enum class DynamicsMode { Linear, RandomWalk };
enum class MeanParametrization { Factorized, Direct };
enum class MetricKind { Unit, Diagonal };

/// Model variants used for predictive comparison. Each one is a mask over
/// the full model: FullNS drops the contiguity kernel, FullNST additionally
/// drops the cohort dynamics, IL replaces the location correlation by the
/// identity, FE removes the local deviations entirely.
enum class ModelVariant { FullST, FullNS, FullNST, IL, FE };

/// Design-vector columns. Age is standardized; AgeSex is the product of the
/// standardized age and the sex flag.
enum class Covariate { Intercept, Sex, Edu, Eco, Smoke, Age, AgeSex };

struct PriorConfig {
    double a_delta = 0.3;
    double b_delta = 0.6;
    double sigma2_zeta = 0.5;
    // expected proportion of non-shrunk scale entries; <= 0 means 1/n_p
    double rho0 = -1.0;
    double rho1 = -1.0;
    double a_omega = 2.0;
    double theta_beta_a = 2.0;
    double theta_beta_b = 2.0;
    double gamma1_scale = 1.0;
    // direct-mean mode: B0 entries are iid N(0, direct_scale^2)
    double direct_scale = 2.5;

    double rho(int scale, int num_predictors) const;
    void validate() const;
};

struct SamplerConfig {
    int chains = 4;
    int warmup = 1000;
    int sampling = 1000;
    double target_accept = 0.8;
    int max_treedepth = 10;
    MetricKind metric = MetricKind::Diagonal;
    double init_range = 2.0;
    double divergence_threshold = 1000.0;
    double init_step_size = 1.0;
    std::uint64_t seed = 1;

    void validate() const;
};

struct ModelConfig {
    int num_diseases = 5;
    int num_cohorts = 5;
    std::vector<Covariate> covariates = {Covariate::Intercept, Covariate::Sex, Covariate::Edu,
                                         Covariate::Eco,       Covariate::Smoke, Covariate::Age,
                                         Covariate::AgeSex};
    std::vector<KernelSpec> kernels = {{KernelKind::Partition, -1},
                                       {KernelKind::Contiguity, -1},
                                       {KernelKind::Distance, 0},
                                       {KernelKind::Distance, 1},
                                       {KernelKind::Distance, 2}};
    DynamicsMode dynamics = DynamicsMode::Linear;
    ModelVariant variant = ModelVariant::FullST;
    bool comorbidity = true;
    MeanParametrization mean = MeanParametrization::Factorized;
    bool shared_omega_scales = true;   // one weight vector for both deviation scales
    bool shared_alpha_lambda = false;  // separate alpha for the two scale matrices
    double age_min = 51.0;
    double age_span = 11.0;
    PriorConfig prior;
    SamplerConfig sampler;

    int num_predictors() const { return static_cast<int>(covariates.size()); }
    int num_kernels() const { return static_cast<int>(kernels.size()); }

    /// Kernel roster after applying the variant mask (NS/NST drop the
    /// contiguity kernel). Empty for IL and FE.
    std::vector<KernelSpec> effective_kernels() const;
    bool has_lambda0() const { return variant != ModelVariant::FE; }
    bool has_lambda1() const {
        return variant == ModelVariant::FullST || variant == ModelVariant::FullNS ||
               variant == ModelVariant::IL;
    }
    bool has_kernels() const {
        return has_lambda0() && variant != ModelVariant::IL && !effective_kernels().empty();
    }

    void validate() const;
};

struct SimConfig {
    int num_locations = 16;
    int num_regions = 4;
    int num_cohorts = 5;
    int respondents_per_cell = 50;
    std::string topology = "grid";  // grid | random-geometric
    int num_distance_kernels = 3;
    int feature_dim = 2;  // synthetic location features behind distance matrices
    // marginal rates of the binary raw covariates
    double rate_sex = 0.5;
    double rate_edu = 0.45;
    double rate_eco = 0.3;
    double rate_smoke = 0.3;
    // cohort drift injected per (disease, predictor), flattened row-major;
    // empty means zero. Used by the pseudo-panel bias demonstration.
    std::vector<double> cohort_drift;
    std::string parameter_source = "prior-draw";  // prior-draw | fixed
    std::string truth_path;                       // when parameter_source == fixed
    // survey-year span for the bias demonstration
    int survey_years = 13;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Whole-run configuration as parsed from one INI-style file.
struct RunConfig {
    ModelConfig model;
    SimConfig simulate;
    std::uint64_t seed = 1;
};

// name <-> enum helpers (throw ConfigError on unknown names)
std::string to_string(Covariate c);
Covariate covariate_from_string(const std::string& s);
std::string to_string(ModelVariant v);
ModelVariant variant_from_string(const std::string& s);
std::string to_string(KernelKind k);
std::string to_string(const KernelSpec& spec);
KernelSpec kernel_from_string(const std::string& s);
std::string to_string(DynamicsMode m);

/// Flat INI: "[section]" lines and "key = value" pairs; '#' starts a comment.
using IniData = std::map<std::string, std::map<std::string, std::string>>;
IniData parse_ini(const std::string& text);
IniData parse_ini_file(const std::string& path);

/// Builds a RunConfig from an INI file, applying defaults for absent keys and
/// rejecting unknown keys (the offending key is named in the error).
RunConfig load_run_config(const std::string& path);
RunConfig run_config_from_ini(const IniData& ini);

/// Canonical serialization used for config hashing (sorted keys).
std::string canonical_config_string(const RunConfig& cfg);

}  // namespace mstlogit
