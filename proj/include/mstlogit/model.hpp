#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <vector>

#include "mstlogit/coefficients.hpp"
#include "mstlogit/config.hpp"
#include "mstlogit/data.hpp"
#include "mstlogit/layout.hpp"

namespace mstlogit {

/// Anything the sampler can draw from: a differentiable log density.
class LogDensityModel {
  public:
    virtual ~LogDensityModel() = default;
    virtual int dim() const = 0;
    /// Returns the log density at u and fills grad (resized by the caller).
    /// A return of -inf means "reject"; grad contents are then unspecified.
    virtual double log_density_gradient(const Vec& u, Vec& grad) const = 0;
};

/// Bernoulli log likelihood summed over a respondent's diseases, evaluated
/// through the reference coefficient-field path.
double log_likelihood(const Dataset& dataset, const CoefficientField& field,
                      const ParameterState& state, const ParameterLayout& layout);
Vec pointwise_log_lik(const Dataset& dataset, const CoefficientField& field,
                      const ParameterState& state, const ParameterLayout& layout);

/// The joint posterior over the unconstrained coordinates: likelihood plus
/// priors plus transform Jacobians, with an analytic gradient assembled by a
/// fixed reverse pass (outer products into per-cell buffers, triangular
/// solves through the Cholesky factors, chain rule through every transform).
class PosteriorTarget : public LogDensityModel {
  public:
    PosteriorTarget(Dataset dataset, LocationTable table, ModelConfig config);

    int dim() const override { return layout_.dim; }
    double log_density_gradient(const Vec& u, Vec& grad) const override;

    /// Value-only evaluation (no gradient buffer needed).
    double log_density(const Vec& u) const;
    /// Per-respondent log likelihood at u; sums to the likelihood part.
    Vec pointwise_log_lik(const Vec& u) const;

    const ParameterLayout& layout() const { return layout_; }
    const ModelConfig& config() const { return config_; }
    const LocationTable& table() const { return table_; }
    const Dataset& dataset() const { return dataset_; }

    long evaluations() const { return evaluations_.load(); }
    long jittered_evaluations() const { return jittered_.load(); }
    double max_jitter_seen() const { return max_jitter_.load(); }

  private:
    struct Forward;  // cached intermediates shared by value and gradient

    bool forward(const Vec& u, Forward& fw, bool want_pointwise) const;

    Dataset dataset_;
    LocationTable table_;
    ModelConfig config_;
    ParameterLayout layout_;
    // flattened per-record index data for the hot loop
    std::vector<int> cell_of_;  // location * n_c + cohort
    Mat x_;                     // n_p x n_s (column per respondent)
    Mat y_;                     // n_d x n_s
    mutable std::atomic<long> evaluations_{0};
    mutable std::atomic<long> jittered_{0};
    mutable std::atomic<double> max_jitter_{0.0};
};

}  // namespace mstlogit
