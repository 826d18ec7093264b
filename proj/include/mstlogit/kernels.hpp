#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mstlogit/config.hpp"
#include "mstlogit/data.hpp"

namespace mstlogit {

/// Correlation parameters of the structured kernels: one association weight
/// per region and a single contiguity weight, all inside (0,1).
struct KernelParams {
    Vec theta_region;
    double theta_contiguity = 0.5;
};

/// A convex combination of kernel matrices together with its Cholesky factor.
struct CovarianceModel {
    Vec weights;                      // simplex over the kernel roster
    std::vector<Mat> kernel_matrices; // unit-diagonal, symmetric
    Mat mixture;                      // sum_m weights[m] * K_m
    Mat cholesky;                     // lower factor of mixture + jitter * I
    double jitter_applied = 0.0;
};

double partition_kernel(int l, int lp, const LocationTable& table, const Vec& theta_region);
double contiguity_kernel(int l, int lp, const LocationTable& table, double theta_c);
double distance_kernel(int l, int lp, const Mat& distances);

Mat kernel_matrix(const KernelSpec& spec, const KernelParams& params, const LocationTable& table);

std::vector<Mat> kernel_matrices(const std::vector<KernelSpec>& roster,
                                 const KernelParams& params, const LocationTable& table);

/// Attempts a Cholesky factorization, escalating through the jitter ladder
/// {0, 1e-10, 1e-8, 1e-6} * max(diag). Throws NotPositiveDefinite when the
/// ladder is exhausted. Returns the lower factor and the jitter used.
std::pair<Mat, double> cholesky_psd(const Mat& c);

/// Same contract as cholesky_psd but reports failure through the flag
/// instead of throwing; used on the sampling hot path.
bool try_cholesky_psd(const Mat& c, Mat& lower, double& jitter);

CovarianceModel mixture_covariance(const Vec& weights, const std::vector<Mat>& kernels);

}  // namespace mstlogit
