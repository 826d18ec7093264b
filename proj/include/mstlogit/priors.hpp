#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mstlogit/config.hpp"
#include "mstlogit/layout.hpp"
#include "mstlogit/rng.hpp"

namespace mstlogit {

/// Constrained model parameters. Blocks that the active variant masks out
/// are left empty. lambda matrices store the scales themselves (not their
/// squares, which is what the gamma prior is placed on).
struct ParameterState {
    Mat phi;         // n_d x rank
    Vec delta;       // rank, nonnegative
    Mat psi;         // rank x n_p
    Mat b0_direct;   // n_d x n_p (direct-mean mode)
    Mat lambda0;     // n_d x n_p, nonnegative
    Mat lambda1;
    Vec theta_region;          // in (0,1)
    double theta_contiguity = 0.5;
    Mat omega;       // omega_groups x num_kernels, rows on the simplex
    double alpha0 = 1.0;
    double alpha1 = 1.0;
    Vec gamma;       // gamma[0] > 0
    Vec z0;          // flattened (j, h, l)
    Vec z1;          // flattened (j, h, slice, l)
    Vec eps;         // n_s
};

Vec to_unconstrained(const ParameterState& state, const ParameterLayout& layout);
ParameterState from_unconstrained(const Vec& u, const ParameterLayout& layout);

/// Joint log prior density over the constrained coordinates
/// (delta, lambda^2, theta, omega, alpha, gamma, z, eps, mean entries).
/// Throws ConstraintViolation outside the support.
double log_prior(const ParameterState& state, const ParameterLayout& layout,
                 const ModelConfig& config);

/// Log prior plus transform Jacobians as a function of the unconstrained
/// vector. When grad_accum is non-null the gradient is ADDED into it.
double log_prior_unconstrained(const Vec& u, const ParameterLayout& layout,
                               const ModelConfig& config, Vec* grad_accum);

/// Scalar-generic value path; the long double instantiation backs the
/// finite-difference checks of the analytic gradient.
template <typename Real>
Real log_prior_unconstrained_value(const Real* u, const ParameterLayout& layout,
                                   const ModelConfig& config);

extern template double log_prior_unconstrained_value<double>(const double*,
                                                             const ParameterLayout&,
                                                             const ModelConfig&);
extern template long double log_prior_unconstrained_value<long double>(const long double*,
                                                                       const ParameterLayout&,
                                                                       const ModelConfig&);

/// Draws a full state from the prior. Deterministic given the rng state;
/// block order is fixed (delta, mean, alphas, lambdas, theta, omega, gamma,
/// z0, z1, eps).
ParameterState sample_prior(const ParameterLayout& layout, const ModelConfig& config, Rng& rng);

}  // namespace mstlogit
