#pragma once

#include "mstlogit/config.hpp"
#include "mstlogit/data.hpp"
#include "mstlogit/priors.hpp"
#include "mstlogit/rng.hpp"

namespace mstlogit {

/// Synthetic location set: lattice or random-geometric adjacency, regions as
/// contiguous index bands, distance matrices from Gaussian location features
/// scaled to unit mean off-diagonal distance.
LocationTable gen_locations(const SimConfig& sim, Rng& rng);

struct SimulationOutput {
    Dataset dataset;
    ParameterState truth;      // includes the per-respondent latents drawn
    Vec truth_unconstrained;   // full layout vector at the truth
};

/// Draws covariates and responses from the generative model. Structural
/// parameters come from the prior unless fixed_params is given; the
/// comorbidity latents are always drawn fresh per respondent. A non-empty
/// cohort_drift in the sim config shifts the coefficients by drift * cohort
/// (a deliberate misspecification used by the bias demonstration).
SimulationOutput gen_dataset(const SimConfig& sim, const ModelConfig& model,
                             const LocationTable& table, const ParameterState* fixed_params,
                             Rng& rng);

struct BiasDemoResult {
    double slope_by_survey_year = 0.0;
    double se_by_survey_year = 0.0;
    double slope_by_cohort = 0.0;
    double se_by_cohort = 0.0;
    long records = 0;
};

/// Reproduces the pseudo-panel age-slope bias: simulates repeated
/// cross-sections where age, cohort and survey year are linked, then fits
/// two pooled logistic age slopes, one with survey-year intercepts and one
/// with cohort intercepts. Throws InsufficientCrossing when the design
/// cannot separate age from the grouping.
BiasDemoResult bias_demo(const SimConfig& sim, const ModelConfig& model, Rng& rng);

/// Pooled logistic fit of y on [slope column | group dummies] by Newton
/// iterations; returns the slope estimate and its standard error.
std::pair<double, double> pooled_logistic_slope(const std::vector<double>& y,
                                                const std::vector<double>& x_slope,
                                                const std::vector<int>& group, int num_groups);

}  // namespace mstlogit
