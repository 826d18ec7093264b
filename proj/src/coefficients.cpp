#include "mstlogit/coefficients.hpp"

#include "mstlogit/errors.hpp"

namespace mstlogit {

Mat assemble_b0(const Mat& phi, const Vec& delta, const Mat& psi) {
    return phi * delta.asDiagonal() * psi;
}

Vec correlate_deviations(const Vec& z, const Mat& lower) {
    if (z.size() != lower.rows()) throw Error("correlate_deviations: length mismatch");
    return lower.triangularView<Eigen::Lower>() * z;
}

CoefficientField build_coefficient_field(const ParameterState& state,
                                         const ParameterLayout& L,
                                         const LocationTable& table) {
    CoefficientField f;
    f.b0 = L.direct_mean ? state.b0_direct : assemble_b0(state.phi, state.delta, state.psi);

    if (L.has_kernels) {
        KernelParams kp;
        kp.theta_region = state.theta_region;
        kp.theta_contiguity = state.theta_contiguity;
        const auto kernels = kernel_matrices(L.roster, kp, table);
        f.cholesky.resize(L.omega_groups);
        f.jitter.resize(L.omega_groups, 0.0);
        for (int g = 0; g < L.omega_groups; ++g) {
            Mat c = Mat::Zero(L.n_l, L.n_l);
            for (int m = 0; m < L.num_kernels; ++m) {
                c.noalias() += state.omega(g, m) * kernels[m];
            }
            auto [lower, jitter] = cholesky_psd(c);
            f.cholesky[g] = std::move(lower);
            f.jitter[g] = jitter;
            f.max_jitter = std::max(f.max_jitter, jitter);
        }
    }

    auto factor_for = [&](int j, int scale) -> const Mat* {
        if (!L.has_kernels) return nullptr;  // identity correlation
        return &f.cholesky[L.omega_group(j, scale)];
    };

    if (L.has_lambda0) {
        f.xi0.resize(L.n_d);
        for (int j = 0; j < L.n_d; ++j) {
            f.xi0[j].resize(L.n_l, L.n_p);
            const Mat* lower = factor_for(j, 0);
            for (int h = 0; h < L.n_p; ++h) {
                const auto z = state.z0.segment(static_cast<Eigen::Index>(j * L.n_p + h) * L.n_l,
                                                L.n_l);
                if (lower) {
                    f.xi0[j].col(h) = lower->triangularView<Eigen::Lower>() * z;
                } else {
                    f.xi0[j].col(h) = z;
                }
            }
        }
    }
    if (L.has_lambda1) {
        f.xi1.resize(L.n_d);
        for (int j = 0; j < L.n_d; ++j) {
            f.xi1[j].resize(L.z1_slices);
            const Mat* lower = factor_for(j, 1);
            for (int t = 0; t < L.z1_slices; ++t) {
                f.xi1[j][t].resize(L.n_l, L.n_p);
                for (int h = 0; h < L.n_p; ++h) {
                    const auto z = state.z1.segment(
                        (static_cast<Eigen::Index>(j * L.n_p + h) * L.z1_slices + t) * L.n_l,
                        L.n_l);
                    if (lower) {
                        f.xi1[j][t].col(h) = lower->triangularView<Eigen::Lower>() * z;
                    } else {
                        f.xi1[j][t].col(h) = z;
                    }
                }
            }
        }
    }
    return f;
}

double coefficient_at(const CoefficientField& f, const ParameterState& state,
                      const ParameterLayout& L, int j, int h, int l, int c) {
    double beta = f.b0(j, h);
    if (L.has_lambda0) beta += state.lambda0(j, h) * f.xi0[j](l, h);
    if (L.has_lambda1) {
        if (L.dynamics == DynamicsMode::Linear) {
            beta += state.lambda1(j, h) * f.xi1[j][0](l, h) * static_cast<double>(c);
        } else {
            // random walk: one shift per cohort transition up to c
            for (int t = 0; t < c && t < L.z1_slices; ++t) {
                beta += state.lambda1(j, h) * f.xi1[j][t](l, h);
            }
        }
    }
    return beta;
}

Mat coefficient_matrix(const CoefficientField& f, const ParameterState& state,
                       const ParameterLayout& L, int l, int c) {
    Mat b(L.n_d, L.n_p);
    for (int j = 0; j < L.n_d; ++j)
        for (int h = 0; h < L.n_p; ++h) b(j, h) = coefficient_at(f, state, L, j, h, l, c);
    return b;
}

Vec linear_predictor(const CoefficientField& f, const ParameterState& state,
                     const ParameterLayout& L, const RespondentRecord& record, double eps_i) {
    const Mat b = coefficient_matrix(f, state, L, record.location, record.cohort);
    Vec eta = b * record.covariates;
    if (L.comorbidity) eta += state.gamma * eps_i;
    return eta;
}

}  // namespace mstlogit
