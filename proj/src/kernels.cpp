#include "mstlogit/kernels.hpp"

#include <cmath>

#include "mstlogit/errors.hpp"

namespace mstlogit {

double partition_kernel(int l, int lp, const LocationTable& table, const Vec& theta_region) {
    if (l == lp) return 1.0;
    const int r = table.region_of[l];
    if (r != table.region_of[lp]) return 0.0;
    return theta_region[r];
}

double contiguity_kernel(int l, int lp, const LocationTable& table, double theta_c) {
    if (l == lp) return 1.0;
    if (!table.neighbors(l, lp)) return 0.0;
    const int dl = table.degree[l];
    const int dlp = table.degree[lp];
    if (dl == 0 || dlp == 0) throw ZeroDegreeNeighbor(l, lp);
    return theta_c / std::sqrt(static_cast<double>(dl) * static_cast<double>(dlp));
}

double distance_kernel(int l, int lp, const Mat& distances) {
    return std::exp(-distances(l, lp));
}

Mat kernel_matrix(const KernelSpec& spec, const KernelParams& params, const LocationTable& table) {
    const int n = table.num_locations;
    Mat k = Mat::Identity(n, n);
    switch (spec.kind) {
        case KernelKind::Partition:
            for (int l = 0; l < n; ++l) {
                for (int lp = l + 1; lp < n; ++lp) {
                    const double v = partition_kernel(l, lp, table, params.theta_region);
                    k(l, lp) = v;
                    k(lp, l) = v;
                }
            }
            break;
        case KernelKind::Contiguity:
            for (int l = 0; l < n; ++l) {
                for (int lp : table.adjacency[l]) {
                    if (lp > l) {
                        const double v = contiguity_kernel(l, lp, table, params.theta_contiguity);
                        k(l, lp) = v;
                        k(lp, l) = v;
                    }
                }
            }
            break;
        case KernelKind::Distance: {
            const Mat& d = table.distance_matrices.at(spec.distance_index);
            for (int l = 0; l < n; ++l) {
                for (int lp = l + 1; lp < n; ++lp) {
                    const double v = std::exp(-d(l, lp));
                    k(l, lp) = v;
                    k(lp, l) = v;
                }
            }
            break;
        }
    }
    return k;
}

std::vector<Mat> kernel_matrices(const std::vector<KernelSpec>& roster,
                                 const KernelParams& params, const LocationTable& table) {
    std::vector<Mat> out;
    out.reserve(roster.size());
    for (const auto& spec : roster) out.push_back(kernel_matrix(spec, params, table));
    return out;
}

namespace {
constexpr double kJitterLadder[] = {0.0, 1e-10, 1e-8, 1e-6};
}

bool try_cholesky_psd(const Mat& c, Mat& lower, double& jitter) {
    const double scale = c.diagonal().maxCoeff();
    for (double rung : kJitterLadder) {
        const double j = rung * scale;
        Eigen::LLT<Mat> llt(j == 0.0 ? c : Mat(c + j * Mat::Identity(c.rows(), c.cols())));
        if (llt.info() == Eigen::Success) {
            lower = llt.matrixL();
            // LLT can succeed with a non-finite input; keep the factor honest
            if (!lower.allFinite()) continue;
            jitter = j;
            return true;
        }
    }
    return false;
}

std::pair<Mat, double> cholesky_psd(const Mat& c) {
    if (c.rows() != c.cols()) throw Error("cholesky_psd: matrix is not square");
    Mat lower;
    double jitter = 0.0;
    if (!try_cholesky_psd(c, lower, jitter)) {
        throw NotPositiveDefinite("not positive definite after the jitter ladder");
    }
    return {std::move(lower), jitter};
}

CovarianceModel mixture_covariance(const Vec& weights, const std::vector<Mat>& kernels) {
    if (static_cast<std::size_t>(weights.size()) != kernels.size()) {
        throw Error("mixture_covariance: weights and kernels disagree in length");
    }
    if (kernels.empty()) throw Error("mixture_covariance: no kernels");
    const double total = weights.sum();
    if (std::abs(total - 1.0) > 1e-12 || weights.minCoeff() < 0.0) {
        throw ConstraintViolation("mixture weights must form a simplex");
    }
    CovarianceModel model;
    model.weights = weights;
    model.kernel_matrices = kernels;
    model.mixture = Mat::Zero(kernels[0].rows(), kernels[0].cols());
    for (std::size_t m = 0; m < kernels.size(); ++m) {
        model.mixture.noalias() += weights[static_cast<int>(m)] * kernels[m];
    }
    auto [lower, jitter] = cholesky_psd(model.mixture);
    model.cholesky = std::move(lower);
    model.jitter_applied = jitter;
    return model;
}

}  // namespace mstlogit
