#include "mstlogit/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "mstlogit/errors.hpp"
#include "mstlogit/special.hpp"

namespace mstlogit {

double PriorConfig::rho(int scale, int num_predictors) const {
    const double r = scale == 0 ? rho0 : rho1;
    return r > 0.0 ? r : 1.0 / static_cast<double>(num_predictors);
}

void PriorConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw ConfigError(std::string("prior hyperparameter '") + name +
                                          "' must be positive");
    };
    positive(a_delta, "a_delta");
    positive(b_delta, "b_delta");
    positive(sigma2_zeta, "sigma2_zeta");
    positive(a_omega, "a_omega");
    positive(theta_beta_a, "theta_beta_a");
    positive(theta_beta_b, "theta_beta_b");
    positive(gamma1_scale, "gamma1_scale");
    positive(direct_scale, "direct_scale");
}

void SamplerConfig::validate() const {
    if (chains < 1) throw ConfigError("sampler: chains must be >= 1");
    if (warmup <= 0) throw ConfigError("sampler: warmup must be positive");
    if (sampling <= 0) throw ConfigError("sampler: sampling must be positive");
    if (!(target_accept > 0.0 && target_accept < 1.0)) {
        throw ConfigError("sampler: target_accept must lie in (0,1)");
    }
    if (max_treedepth < 1 || max_treedepth > 14) {
        throw ConfigError("sampler: max_treedepth must lie in [1,14]");
    }
    if (!(init_range > 0.0)) throw ConfigError("sampler: init_range must be positive");
    if (!(divergence_threshold > 0.0)) {
        throw ConfigError("sampler: divergence_threshold must be positive");
    }
    if (!(init_step_size > 0.0) || !std::isfinite(init_step_size)) {
        throw ConfigError("sampler: init_step_size must be positive and finite");
    }
}

std::vector<KernelSpec> ModelConfig::effective_kernels() const {
    if (variant == ModelVariant::IL || variant == ModelVariant::FE) return {};
    std::vector<KernelSpec> out;
    for (const auto& k : kernels) {
        if ((variant == ModelVariant::FullNS || variant == ModelVariant::FullNST) &&
            k.kind == KernelKind::Contiguity) {
            continue;
        }
        out.push_back(k);
    }
    return out;
}

void ModelConfig::validate() const {
    if (num_diseases < 1) throw ConfigError("model: diseases must be >= 1");
    if (num_cohorts < 1) throw ConfigError("model: cohorts must be >= 1");
    if (covariates.empty() || covariates[0] != Covariate::Intercept) {
        throw ConfigError("model: covariate roster must start with 'intercept'");
    }
    std::set<Covariate> seen;
    for (auto c : covariates) {
        if (!seen.insert(c).second) throw ConfigError("model: duplicate covariate in roster");
    }
    if (seen.count(Covariate::AgeSex) &&
        (!seen.count(Covariate::Age) || !seen.count(Covariate::Sex))) {
        throw ConfigError("model: age_sex requires both age and sex in the roster");
    }
    if (!(age_span > 0.0)) throw NonpositiveSpan();
    if (kernels.empty()) throw ConfigError("model: kernel roster must not be empty");
    int partitions = 0;
    int contiguities = 0;
    for (const auto& k : kernels) {
        if (k.kind == KernelKind::Partition) ++partitions;
        if (k.kind == KernelKind::Contiguity) ++contiguities;
        if (k.kind == KernelKind::Distance && k.distance_index < 0) {
            throw ConfigError("model: distance kernel needs a matrix index");
        }
    }
    if (partitions > 1 || contiguities > 1) {
        throw ConfigError("model: at most one partition and one contiguity kernel");
    }
    prior.validate();
    sampler.validate();
}

void SimConfig::validate() const {
    if (num_locations < 1) throw ConfigError("simulate: locations must be >= 1");
    if (num_regions < 1 || num_regions > num_locations) {
        throw ConfigError("simulate: regions must lie in [1, locations]");
    }
    if (num_cohorts < 1) throw ConfigError("simulate: cohorts must be >= 1");
    if (respondents_per_cell < 1) throw ConfigError("simulate: respondents_per_cell must be >= 1");
    if (topology != "grid" && topology != "random-geometric") {
        throw ConfigError("simulate: topology must be 'grid' or 'random-geometric'");
    }
    if (num_distance_kernels < 0) throw ConfigError("simulate: distance_kernels must be >= 0");
    if (parameter_source != "prior-draw" && parameter_source != "fixed") {
        throw ConfigError("simulate: parameter_source must be 'prior-draw' or 'fixed'");
    }
    if (parameter_source == "fixed" && truth_path.empty()) {
        throw ConfigError("simulate: fixed parameter source needs truth_path");
    }
    if (survey_years < 1) throw ConfigError("simulate: survey_years must be >= 1");
}

std::string to_string(Covariate c) {
    switch (c) {
        case Covariate::Intercept: return "intercept";
        case Covariate::Sex: return "sex";
        case Covariate::Edu: return "edu";
        case Covariate::Eco: return "eco";
        case Covariate::Smoke: return "smoke";
        case Covariate::Age: return "age";
        case Covariate::AgeSex: return "age_sex";
    }
    return "?";
}

Covariate covariate_from_string(const std::string& s) {
    if (s == "intercept") return Covariate::Intercept;
    if (s == "sex") return Covariate::Sex;
    if (s == "edu") return Covariate::Edu;
    if (s == "eco") return Covariate::Eco;
    if (s == "smoke") return Covariate::Smoke;
    if (s == "age") return Covariate::Age;
    if (s == "age_sex") return Covariate::AgeSex;
    throw ConfigError("unknown covariate '" + s + "'");
}

std::string to_string(ModelVariant v) {
    switch (v) {
        case ModelVariant::FullST: return "full-st";
        case ModelVariant::FullNS: return "full-ns";
        case ModelVariant::FullNST: return "full-nst";
        case ModelVariant::IL: return "il";
        case ModelVariant::FE: return "fe";
    }
    return "?";
}

ModelVariant variant_from_string(const std::string& s) {
    if (s == "full-st") return ModelVariant::FullST;
    if (s == "full-ns") return ModelVariant::FullNS;
    if (s == "full-nst") return ModelVariant::FullNST;
    if (s == "il") return ModelVariant::IL;
    if (s == "fe") return ModelVariant::FE;
    throw ConfigError("unknown model variant '" + s + "'");
}

std::string to_string(KernelKind k) {
    switch (k) {
        case KernelKind::Partition: return "partition";
        case KernelKind::Contiguity: return "contiguity";
        case KernelKind::Distance: return "distance";
    }
    return "?";
}

std::string to_string(const KernelSpec& spec) {
    if (spec.kind == KernelKind::Distance) {
        return "distance:" + std::to_string(spec.distance_index);
    }
    return to_string(spec.kind);
}

KernelSpec kernel_from_string(const std::string& s) {
    if (s == "partition") return {KernelKind::Partition, -1};
    if (s == "contiguity") return {KernelKind::Contiguity, -1};
    if (s.rfind("distance:", 0) == 0) {
        const std::string idx = s.substr(9);
        int v = -1;
        auto [ptr, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), v);
        if (ec != std::errc() || ptr != idx.data() + idx.size() || v < 0) {
            throw ConfigError("bad distance kernel spec '" + s + "'");
        }
        return {KernelKind::Distance, v};
    }
    throw ConfigError("unknown kernel spec '" + s + "'");
}

std::string to_string(DynamicsMode m) {
    return m == DynamicsMode::Linear ? "linear" : "random-walk";
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

}  // namespace

IniData parse_ini(const std::string& text) {
    IniData data;
    std::istringstream in(text);
    std::string line;
    std::string section;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": unterminated section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            data[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        }
        data[section][key] = value;
    }
    return data;
}

IniData parse_ini_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_ini(ss.str());
}

namespace {

/// Tracks consumed keys so anything left over can be reported by name.
class SectionReader {
  public:
    SectionReader(const IniData& ini, const std::string& section) : section_(section) {
        auto it = ini.find(section);
        if (it != ini.end()) entries_ = &it->second;
    }

    bool has(const std::string& key) const {
        return entries_ && entries_->count(key) > 0;
    }

    std::string get(const std::string& key, const std::string& fallback) {
        consumed_.insert(key);
        if (!entries_) return fallback;
        auto it = entries_->find(key);
        return it == entries_->end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) {
        const std::string v = get(key, "");
        if (v.empty()) return fallback;
        try {
            std::size_t used = 0;
            const double d = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw ConfigError("config key '" + section_ + "." + key + "' is not a number: '" + v +
                              "'");
        }
    }

    long get_long(const std::string& key, long fallback) {
        const std::string v = get(key, "");
        if (v.empty()) return fallback;
        long out = 0;
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || ptr != v.data() + v.size()) {
            throw ConfigError("config key '" + section_ + "." + key + "' is not an integer: '" +
                              v + "'");
        }
        return out;
    }

    bool get_bool(const std::string& key, bool fallback) {
        const std::string v = get(key, "");
        if (v.empty()) return fallback;
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw ConfigError("config key '" + section_ + "." + key + "' is not a boolean: '" + v +
                          "'");
    }

    void finish() const {
        if (!entries_) return;
        for (const auto& [key, value] : *entries_) {
            if (!consumed_.count(key)) {
                throw ConfigError("unknown config key '" + section_ + "." + key + "'");
            }
        }
    }

  private:
    std::string section_;
    const std::map<std::string, std::string>* entries_ = nullptr;
    std::set<std::string> consumed_;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            cur = trim(cur);
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace

RunConfig run_config_from_ini(const IniData& ini) {
    for (const auto& [section, _] : ini) {
        if (section != "model" && section != "kernels" && section != "age" &&
            section != "priors" && section != "sampler" && section != "simulate" &&
            section != "run") {
            throw ConfigError("unknown config section '" + section + "'");
        }
    }
    RunConfig cfg;

    SectionReader run(ini, "run");
    cfg.seed = static_cast<std::uint64_t>(run.get_long("seed", 1));
    run.finish();

    SectionReader model(ini, "model");
    cfg.model.num_diseases = static_cast<int>(model.get_long("diseases", 5));
    cfg.model.num_cohorts = static_cast<int>(model.get_long("cohorts", 5));
    if (model.has("covariates")) {
        cfg.model.covariates.clear();
        for (const auto& name : split_list(model.get("covariates", ""))) {
            cfg.model.covariates.push_back(covariate_from_string(name));
        }
    } else {
        model.get("covariates", "");
    }
    {
        const std::string dyn = model.get("dynamics", "linear");
        if (dyn == "linear") {
            cfg.model.dynamics = DynamicsMode::Linear;
        } else if (dyn == "random-walk") {
            cfg.model.dynamics = DynamicsMode::RandomWalk;
        } else {
            throw ConfigError("config key 'model.dynamics' must be linear or random-walk");
        }
    }
    cfg.model.variant = variant_from_string(model.get("variant", "full-st"));
    cfg.model.comorbidity = model.get_bool("comorbidity", true);
    {
        const std::string mean = model.get("mean", "factorized");
        if (mean == "factorized") {
            cfg.model.mean = MeanParametrization::Factorized;
        } else if (mean == "direct") {
            cfg.model.mean = MeanParametrization::Direct;
        } else {
            throw ConfigError("config key 'model.mean' must be factorized or direct");
        }
    }
    cfg.model.shared_omega_scales = model.get_bool("shared_omega_scales", true);
    cfg.model.shared_alpha_lambda = model.get_bool("shared_alpha_lambda", false);
    model.finish();

    SectionReader kernels(ini, "kernels");
    if (kernels.has("roster")) {
        cfg.model.kernels.clear();
        for (const auto& name : split_list(kernels.get("roster", ""))) {
            cfg.model.kernels.push_back(kernel_from_string(name));
        }
    } else {
        kernels.get("roster", "");
    }
    kernels.finish();

    SectionReader age(ini, "age");
    cfg.model.age_min = age.get_double("min", 51.0);
    cfg.model.age_span = age.get_double("span", 11.0);
    age.finish();

    SectionReader priors(ini, "priors");
    auto& p = cfg.model.prior;
    p.a_delta = priors.get_double("a_delta", p.a_delta);
    p.b_delta = priors.get_double("b_delta", p.b_delta);
    p.sigma2_zeta = priors.get_double("sigma2_zeta", p.sigma2_zeta);
    p.rho0 = priors.get_double("rho0", p.rho0);
    p.rho1 = priors.get_double("rho1", p.rho1);
    p.a_omega = priors.get_double("a_omega", p.a_omega);
    p.theta_beta_a = priors.get_double("theta_beta_a", p.theta_beta_a);
    p.theta_beta_b = priors.get_double("theta_beta_b", p.theta_beta_b);
    p.gamma1_scale = priors.get_double("gamma1_scale", p.gamma1_scale);
    p.direct_scale = priors.get_double("direct_scale", p.direct_scale);
    priors.finish();

    SectionReader sampler(ini, "sampler");
    auto& s = cfg.model.sampler;
    s.chains = static_cast<int>(sampler.get_long("chains", s.chains));
    s.warmup = static_cast<int>(sampler.get_long("warmup", s.warmup));
    s.sampling = static_cast<int>(sampler.get_long("sampling", s.sampling));
    s.target_accept = sampler.get_double("target_accept", s.target_accept);
    s.max_treedepth = static_cast<int>(sampler.get_long("max_treedepth", s.max_treedepth));
    {
        const std::string m = sampler.get("metric", "diagonal");
        if (m == "diagonal") {
            s.metric = MetricKind::Diagonal;
        } else if (m == "unit") {
            s.metric = MetricKind::Unit;
        } else {
            throw ConfigError("config key 'sampler.metric' must be diagonal or unit");
        }
    }
    s.init_range = sampler.get_double("init_range", s.init_range);
    s.divergence_threshold = sampler.get_double("divergence_threshold", s.divergence_threshold);
    s.init_step_size = sampler.get_double("init_step_size", s.init_step_size);
    s.seed = cfg.seed;
    sampler.finish();

    SectionReader sim(ini, "simulate");
    auto& sc = cfg.simulate;
    sc.num_locations = static_cast<int>(sim.get_long("locations", sc.num_locations));
    sc.num_regions = static_cast<int>(sim.get_long("regions", sc.num_regions));
    sc.num_cohorts = cfg.model.num_cohorts;
    sc.respondents_per_cell =
        static_cast<int>(sim.get_long("respondents_per_cell", sc.respondents_per_cell));
    sc.topology = sim.get("topology", sc.topology);
    sc.num_distance_kernels =
        static_cast<int>(sim.get_long("distance_kernels", sc.num_distance_kernels));
    sc.feature_dim = static_cast<int>(sim.get_long("feature_dim", sc.feature_dim));
    sc.rate_sex = sim.get_double("rate_sex", sc.rate_sex);
    sc.rate_edu = sim.get_double("rate_edu", sc.rate_edu);
    sc.rate_eco = sim.get_double("rate_eco", sc.rate_eco);
    sc.rate_smoke = sim.get_double("rate_smoke", sc.rate_smoke);
    if (sim.has("cohort_drift")) {
        for (const auto& v : split_list(sim.get("cohort_drift", ""))) {
            try {
                sc.cohort_drift.push_back(std::stod(v));
            } catch (const std::exception&) {
                throw ConfigError("config key 'simulate.cohort_drift' has a bad entry: '" + v +
                                  "'");
            }
        }
    } else {
        sim.get("cohort_drift", "");
    }
    sc.parameter_source = sim.get("parameter_source", sc.parameter_source);
    sc.truth_path = sim.get("truth_path", sc.truth_path);
    sc.survey_years = static_cast<int>(sim.get_long("survey_years", sc.survey_years));
    sc.seed = cfg.seed;
    sim.finish();

    cfg.model.validate();
    cfg.simulate.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    return run_config_from_ini(parse_ini_file(path));
}

std::string canonical_config_string(const RunConfig& cfg) {
    std::ostringstream out;
    const auto& m = cfg.model;
    out << "age.min=" << format_double(m.age_min) << '\n';
    out << "age.span=" << format_double(m.age_span) << '\n';
    out << "model.cohorts=" << m.num_cohorts << '\n';
    out << "model.comorbidity=" << (m.comorbidity ? "true" : "false") << '\n';
    out << "model.covariates=";
    for (std::size_t i = 0; i < m.covariates.size(); ++i) {
        if (i) out << ',';
        out << to_string(m.covariates[i]);
    }
    out << '\n';
    out << "model.diseases=" << m.num_diseases << '\n';
    out << "model.dynamics=" << to_string(m.dynamics) << '\n';
    out << "model.kernels=";
    for (std::size_t i = 0; i < m.kernels.size(); ++i) {
        if (i) out << ',';
        out << to_string(m.kernels[i]);
    }
    out << '\n';
    out << "model.mean=" << (m.mean == MeanParametrization::Factorized ? "factorized" : "direct")
        << '\n';
    out << "model.shared_alpha_lambda=" << (m.shared_alpha_lambda ? "true" : "false") << '\n';
    out << "model.shared_omega_scales=" << (m.shared_omega_scales ? "true" : "false") << '\n';
    out << "model.variant=" << to_string(m.variant) << '\n';
    const auto& p = m.prior;
    out << "priors.a_delta=" << format_double(p.a_delta) << '\n';
    out << "priors.a_omega=" << format_double(p.a_omega) << '\n';
    out << "priors.b_delta=" << format_double(p.b_delta) << '\n';
    out << "priors.direct_scale=" << format_double(p.direct_scale) << '\n';
    out << "priors.gamma1_scale=" << format_double(p.gamma1_scale) << '\n';
    out << "priors.rho0=" << format_double(p.rho0) << '\n';
    out << "priors.rho1=" << format_double(p.rho1) << '\n';
    out << "priors.sigma2_zeta=" << format_double(p.sigma2_zeta) << '\n';
    out << "priors.theta_beta_a=" << format_double(p.theta_beta_a) << '\n';
    out << "priors.theta_beta_b=" << format_double(p.theta_beta_b) << '\n';
    const auto& s = m.sampler;
    out << "run.seed=" << cfg.seed << '\n';
    out << "sampler.chains=" << s.chains << '\n';
    out << "sampler.divergence_threshold=" << format_double(s.divergence_threshold) << '\n';
    out << "sampler.init_range=" << format_double(s.init_range) << '\n';
    out << "sampler.init_step_size=" << format_double(s.init_step_size) << '\n';
    out << "sampler.max_treedepth=" << s.max_treedepth << '\n';
    out << "sampler.metric=" << (s.metric == MetricKind::Diagonal ? "diagonal" : "unit") << '\n';
    out << "sampler.sampling=" << s.sampling << '\n';
    out << "sampler.target_accept=" << format_double(s.target_accept) << '\n';
    out << "sampler.warmup=" << s.warmup << '\n';
    const auto& sc = cfg.simulate;
    out << "simulate.cohort_drift=";
    for (std::size_t i = 0; i < sc.cohort_drift.size(); ++i) {
        if (i) out << ',';
        out << format_double(sc.cohort_drift[i]);
    }
    out << '\n';
    out << "simulate.distance_kernels=" << sc.num_distance_kernels << '\n';
    out << "simulate.feature_dim=" << sc.feature_dim << '\n';
    out << "simulate.locations=" << sc.num_locations << '\n';
    out << "simulate.parameter_source=" << sc.parameter_source << '\n';
    out << "simulate.rate_eco=" << format_double(sc.rate_eco) << '\n';
    out << "simulate.rate_edu=" << format_double(sc.rate_edu) << '\n';
    out << "simulate.rate_sex=" << format_double(sc.rate_sex) << '\n';
    out << "simulate.rate_smoke=" << format_double(sc.rate_smoke) << '\n';
    out << "simulate.regions=" << sc.num_regions << '\n';
    out << "simulate.respondents_per_cell=" << sc.respondents_per_cell << '\n';
    out << "simulate.survey_years=" << sc.survey_years << '\n';
    out << "simulate.topology=" << sc.topology << '\n';
    out << "simulate.truth_path=" << sc.truth_path << '\n';
    return out.str();
}

}  // namespace mstlogit
