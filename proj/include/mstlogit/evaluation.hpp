#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mstlogit/data.hpp"
#include "mstlogit/layout.hpp"
#include "mstlogit/sampler.hpp"

namespace mstlogit {

/// Expected log pointwise predictive density estimate with its pieces.
struct ElpdReport {
    std::string model_name;
    double elpd = 0.0;
    double effective_params = 0.0;
    double se = 0.0;
    Vec per_point;
    Vec pareto_k;            // empty for WAIC
    std::string dataset_digest;  // guards compare() against mixed datasets

    double ic() const { return -2.0 * elpd; }
    double ic_se() const { return 2.0 * se; }
    int tail_warnings(double threshold) const;
};

/// WAIC from an S x N pointwise log-likelihood matrix.
ElpdReport waic(const Mat& loglik);

/// PSIS-LOO: importance ratios smoothed by a generalized-Pareto fit on the
/// largest tail weights, then truncated at S^(3/4) times the mean weight.
ElpdReport psis_loo(const Mat& loglik);

/// Generalized Pareto tail fit (profile posterior over the shape on a fixed
/// grid, shape regularized toward 0.5). Input: positive exceedances.
struct GpdFit {
    double k = 0.0;
    double sigma = 0.0;
    bool degenerate = false;  // all exceedances at zero; tail left untouched
};
GpdFit fit_gpd_tail(std::vector<double> exceedances);

/// Smoothed, truncated log importance weights for one point plus the tail
/// shape diagnostic.
struct PsisResult {
    Vec log_weights;  // unnormalized, shifted so the maximum is <= 0
    double pareto_k = 0.0;
};
PsisResult psis_smooth(const Vec& log_ratios);

struct ComparisonRow {
    std::string model_name;
    double elpd = 0.0;
    double effective_params = 0.0;
    double se = 0.0;
    double delta_elpd = 0.0;  // relative to the best model (0 for the best)
    double delta_se = 0.0;    // paired standard error of the difference
    double delta_ic() const { return -2.0 * delta_elpd; }
    double delta_ic_se() const { return 2.0 * delta_se; }
};

/// Ranks reports by elpd (best first) and attaches paired differences.
std::vector<ComparisonRow> compare(const std::vector<ElpdReport>& reports);

struct PpcCell {
    int location = 0;
    int disease = 0;
    long group_size = 0;
    double observed = 0.0;
    double p_value = 0.5;
    double rep_mean = 0.0;
    double rep_q05 = 0.0, rep_q25 = 0.0, rep_q75 = 0.0, rep_q95 = 0.0;
};

/// Replicates datasets from the posterior draws and compares per-location
/// prevalences; the comorbidity latent is redrawn from its prior unless
/// use_posterior_eps is set. Ties count half toward the p-value.
std::vector<PpcCell> posterior_predictive_prevalence(const Mat& draws, const Dataset& dataset,
                                                     const LocationTable& table,
                                                     const ParameterLayout& layout,
                                                     const ModelConfig& config,
                                                     std::uint64_t seed,
                                                     bool use_posterior_eps = false);

struct DrawSummary {
    double mean = 0.0;
    double q05 = 0.0, q25 = 0.0, q50 = 0.0, q75 = 0.0, q95 = 0.0;
    double q025 = 0.0, q975 = 0.0;
};
DrawSummary summarize_draws(const std::vector<double>& values);

struct ComorbidityEdge {
    int j1 = 0, j2 = 0;
    DrawSummary summary;
};
/// Posterior summaries of gamma * gamma^T (includes the diagonal).
std::vector<ComorbidityEdge> comorbidity_summary(const Mat& draws, const ParameterLayout& layout);

struct FixedEffectCell {
    int disease = 0, predictor = 0;
    DrawSummary summary;
    bool excludes_zero = false;  // 95% interval does not contain zero
};
std::vector<FixedEffectCell> fixed_effects_summary(const Mat& draws,
                                                   const ParameterLayout& layout);

struct LocationOddsRatio {
    int disease = 0, location = 0;
    DrawSummary summary;  // exp(beta_jh(l, c)) for the requested h, c
};
std::vector<LocationOddsRatio> odds_ratio_summary(const Mat& draws,
                                                  const ParameterLayout& layout,
                                                  const LocationTable& table, int predictor,
                                                  int cohort);

/// Cohort-step odds ratio per location: exp(lambda1 * xi1(l)) for one
/// predictor, or the profile-weighted product when profile is non-empty.
std::vector<LocationOddsRatio> cohort_step_odds_summary(const Mat& draws,
                                                        const ParameterLayout& layout,
                                                        const LocationTable& table, int predictor,
                                                        const Vec& profile);

struct CurvePoint {
    int disease = 0;
    double age = 0.0;
    DrawSummary summary;  // diagnosis probability
};
/// Morbidity curves over an age grid for a fixed covariate profile.
std::vector<CurvePoint> morbidity_curves(const Mat& draws, const ParameterLayout& layout,
                                         const LocationTable& table, const ModelConfig& config,
                                         const RawFields& profile, int location, int cohort,
                                         int age_points);

/// Per-parameter posterior summaries on the constrained scale where a
/// componentwise transform exists (exp for logs, inverse logit for logits).
struct NamedSummary {
    std::string name;
    DrawSummary summary;
};
std::vector<NamedSummary> parameter_summary(const Mat& draws, const ParameterLayout& layout);

}  // namespace mstlogit
