#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mstlogit/data.hpp"
#include "mstlogit/kernels.hpp"
#include "mstlogit/layout.hpp"
#include "mstlogit/priors.hpp"

namespace mstlogit {

/// B0 = Phi * diag(delta) * Psi.
Mat assemble_b0(const Mat& phi, const Vec& delta, const Mat& psi);

/// xi = L * z: correlates standard-normal seeds through a Cholesky factor.
Vec correlate_deviations(const Vec& z, const Mat& lower);

/// All state-dependent pieces needed to evaluate coefficients: the national
/// mean, the correlated deviation fields and the Cholesky factors behind
/// them. Built once per parameter value and shared read-only.
struct CoefficientField {
    Mat b0;                          // n_d x n_p
    std::vector<Mat> xi0;            // per disease: n_l x n_p
    std::vector<std::vector<Mat>> xi1;  // per disease, per cohort slice: n_l x n_p
    std::vector<Mat> cholesky;       // per covariance group
    std::vector<double> jitter;      // per covariance group
    double max_jitter = 0.0;
};

/// Assembles the coefficient field; throws NotPositiveDefinite if any
/// covariance group cannot be factorized.
CoefficientField build_coefficient_field(const ParameterState& state,
                                         const ParameterLayout& layout,
                                         const LocationTable& table);

/// beta_jh(l, c) for a 0-based cohort offset c.
double coefficient_at(const CoefficientField& field, const ParameterState& state,
                      const ParameterLayout& layout, int j, int h, int l, int c);

/// The full n_d x n_p coefficient matrix B(l, c).
Mat coefficient_matrix(const CoefficientField& field, const ParameterState& state,
                       const ParameterLayout& layout, int l, int c);

/// eta_i = B(l_i, c_i) x_i + gamma * eps_i.
Vec linear_predictor(const CoefficientField& field, const ParameterState& state,
                     const ParameterLayout& layout, const RespondentRecord& record,
                     double eps_i);

}  // namespace mstlogit
