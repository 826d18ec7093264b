#include "mstlogit/model.hpp"

#include <cmath>

#include "mstlogit/errors.hpp"
#include "mstlogit/kernels.hpp"
#include "mstlogit/priors.hpp"
#include "mstlogit/special.hpp"

namespace mstlogit {

namespace {

inline double bernoulli_logit_lpmf(double y, double eta) {
    return y > 0.5 ? -log1pexp(-eta) : -log1pexp(eta);
}

}  // namespace

double log_likelihood(const Dataset& dataset, const CoefficientField& field,
                      const ParameterState& state, const ParameterLayout& layout) {
    const Vec pw = pointwise_log_lik(dataset, field, state, layout);
    return pairwise_sum({pw.data(), static_cast<std::size_t>(pw.size())});
}

Vec pointwise_log_lik(const Dataset& dataset, const CoefficientField& field,
                      const ParameterState& state, const ParameterLayout& layout) {
    Vec out(static_cast<Eigen::Index>(dataset.size()));
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& rec = dataset[i];
        const double eps_i = layout.comorbidity ? state.eps[static_cast<Eigen::Index>(i)] : 0.0;
        const Vec eta = linear_predictor(field, state, layout, rec, eps_i);
        double ll = 0.0;
        for (int j = 0; j < layout.n_d; ++j) {
            ll += bernoulli_logit_lpmf(rec.responses[j], eta[j]);
        }
        out[static_cast<Eigen::Index>(i)] = ll;
    }
    return out;
}

struct PosteriorTarget::Forward {
    // constrained working values
    Mat b0;
    Mat lambda0, lambda1;
    Vec theta_region;
    double theta_c = 0.0;
    Mat omega;  // groups x num_kernels
    Vec gamma;
    // covariance pieces
    std::vector<Mat> kernels;
    std::vector<Mat> chol;  // per group
    double max_jitter = 0.0;
    // deviation fields
    std::vector<Mat> xi0;                  // per j: n_l x n_p
    std::vector<std::vector<Mat>> xi1;     // per j, per slice
    std::vector<std::vector<Mat>> xi1eff;  // per j, per cohort: multiplier field at cohort c
    // per-cell coefficient matrices and the per-record residuals
    std::vector<Mat> beta_cells;
    Mat etabar;  // n_d x n_s
    Vec record_ll;
    double likelihood = 0.0;
    bool failed = false;
};

PosteriorTarget::PosteriorTarget(Dataset dataset, LocationTable table, ModelConfig config)
    : dataset_(std::move(dataset)), table_(std::move(table)), config_(std::move(config)),
      layout_(ParameterLayout::create(config_, table_, static_cast<int>(dataset_.size()))) {
    config_.validate();
    table_.validate();
    validate_against_table(dataset_, table_, config_);
    if (dataset_.empty()) throw Error("posterior target needs at least one respondent");
    const int n_s = layout_.n_s;
    cell_of_.resize(n_s);
    x_.resize(layout_.n_p, n_s);
    y_.resize(layout_.n_d, n_s);
    for (int i = 0; i < n_s; ++i) {
        const auto& rec = dataset_[i];
        cell_of_[i] = rec.location * layout_.n_c + rec.cohort;
        x_.col(i) = rec.covariates;
        for (int j = 0; j < layout_.n_d; ++j) y_(j, i) = rec.responses[j];
    }
}

bool PosteriorTarget::forward(const Vec& u, Forward& fw, bool want_pointwise) const {
    const ParameterLayout& L = layout_;
    if (!u.allFinite()) return false;

    // transforms
    if (L.direct_mean) {
        fw.b0.resize(L.n_d, L.n_p);
        for (int j = 0; j < L.n_d; ++j)
            for (int h = 0; h < L.n_p; ++h) fw.b0(j, h) = u[L.b0(j, h)];
    } else {
        Mat phi(L.n_d, L.rank), psi(L.rank, L.n_p);
        Vec delta(L.rank);
        for (int j = 0; j < L.n_d; ++j)
            for (int r = 0; r < L.rank; ++r) phi(j, r) = u[L.phi(j, r)];
        for (int r = 0; r < L.rank; ++r)
            for (int h = 0; h < L.n_p; ++h) psi(r, h) = u[L.psi(r, h)];
        for (int r = 0; r < L.rank; ++r) delta[r] = std::exp(u[L.delta(r)]);
        fw.b0 = phi * delta.asDiagonal() * psi;
    }
    if (L.has_lambda0) {
        fw.lambda0.resize(L.n_d, L.n_p);
        for (int j = 0; j < L.n_d; ++j)
            for (int h = 0; h < L.n_p; ++h) fw.lambda0(j, h) = std::exp(0.5 * u[L.lambda0(j, h)]);
    }
    if (L.has_lambda1) {
        fw.lambda1.resize(L.n_d, L.n_p);
        for (int j = 0; j < L.n_d; ++j)
            for (int h = 0; h < L.n_p; ++h) fw.lambda1(j, h) = std::exp(0.5 * u[L.lambda1(j, h)]);
    }
    if (L.comorbidity) {
        fw.gamma.resize(L.n_d);
        fw.gamma[0] = std::exp(u[L.gamma(0)]);
        for (int j = 1; j < L.n_d; ++j) fw.gamma[j] = u[L.gamma(j)];
    }

    // location covariance per group
    if (L.has_kernels) {
        if (L.off_theta_r >= 0) {
            fw.theta_region.resize(L.num_regions);
            for (int r = 0; r < L.num_regions; ++r) {
                fw.theta_region[r] = inverse_logit(u[L.theta_r(r)]);
            }
        }
        if (L.off_theta_c >= 0) fw.theta_c = inverse_logit(u[L.theta_c()]);
        fw.omega.resize(L.omega_groups, L.num_kernels);
        if (L.alr_dim == 0) {
            fw.omega.setOnes();
        } else {
            for (int g = 0; g < L.omega_groups; ++g) {
                double mx = 0.0;
                for (int m = 0; m < L.alr_dim; ++m) mx = std::max(mx, u[L.omega(g, m)]);
                double denom = std::exp(-mx);
                for (int m = 0; m < L.alr_dim; ++m) denom += std::exp(u[L.omega(g, m)] - mx);
                for (int m = 0; m < L.alr_dim; ++m) {
                    fw.omega(g, m) = std::exp(u[L.omega(g, m)] - mx) / denom;
                }
                fw.omega(g, L.num_kernels - 1) = std::exp(-mx) / denom;
            }
        }
        KernelParams kp;
        kp.theta_region = fw.theta_region;
        kp.theta_contiguity = fw.theta_c;
        fw.kernels = kernel_matrices(L.roster, kp, table_);
        fw.chol.resize(L.omega_groups);
        for (int g = 0; g < L.omega_groups; ++g) {
            Mat c = Mat::Zero(L.n_l, L.n_l);
            for (int m = 0; m < L.num_kernels; ++m) c.noalias() += fw.omega(g, m) * fw.kernels[m];
            double jitter = 0.0;
            if (!try_cholesky_psd(c, fw.chol[g], jitter)) {
                fw.failed = true;
                return false;
            }
            fw.max_jitter = std::max(fw.max_jitter, jitter);
        }
    }

    // correlated deviation fields
    if (L.has_lambda0) {
        fw.xi0.resize(L.n_d);
        for (int j = 0; j < L.n_d; ++j) {
            fw.xi0[j].resize(L.n_l, L.n_p);
            const Mat* lower = L.has_kernels ? &fw.chol[L.omega_group(j, 0)] : nullptr;
            for (int h = 0; h < L.n_p; ++h) {
                const auto z =
                    u.segment(L.z0(j, h, 0), L.n_l);
                if (lower) {
                    fw.xi0[j].col(h).noalias() = lower->triangularView<Eigen::Lower>() * z;
                } else {
                    fw.xi0[j].col(h) = z;
                }
            }
        }
    }
    if (L.has_lambda1) {
        fw.xi1.resize(L.n_d);
        fw.xi1eff.resize(L.n_d);
        for (int j = 0; j < L.n_d; ++j) {
            const Mat* lower = L.has_kernels ? &fw.chol[L.omega_group(j, 1)] : nullptr;
            fw.xi1[j].resize(L.z1_slices);
            for (int t = 0; t < L.z1_slices; ++t) {
                fw.xi1[j][t].resize(L.n_l, L.n_p);
                for (int h = 0; h < L.n_p; ++h) {
                    const auto z = u.segment(L.z1(j, h, t, 0), L.n_l);
                    if (lower) {
                        fw.xi1[j][t].col(h).noalias() = lower->triangularView<Eigen::Lower>() * z;
                    } else {
                        fw.xi1[j][t].col(h) = z;
                    }
                }
            }
            // multiplier of lambda1 at cohort c: c * xi1 under the linear
            // dynamics, the partial sum of per-cohort shifts under the walk
            fw.xi1eff[j].resize(L.n_c);
            fw.xi1eff[j][0] = Mat::Zero(L.n_l, L.n_p);
            for (int c = 1; c < L.n_c; ++c) {
                if (L.dynamics == DynamicsMode::Linear) {
                    fw.xi1eff[j][c] = static_cast<double>(c) * fw.xi1[j][0];
                } else {
                    const int t = std::min(c - 1, L.z1_slices - 1);
                    fw.xi1eff[j][c] = fw.xi1eff[j][c - 1] + fw.xi1[j][t];
                }
            }
        }
    }

    // per-cell coefficient matrices
    const int n_cells = L.n_l * L.n_c;
    fw.beta_cells.assign(n_cells, Mat());
    for (int l = 0; l < L.n_l; ++l) {
        for (int c = 0; c < L.n_c; ++c) {
            Mat b = fw.b0;
            for (int j = 0; j < L.n_d; ++j) {
                for (int h = 0; h < L.n_p; ++h) {
                    if (L.has_lambda0) b(j, h) += fw.lambda0(j, h) * fw.xi0[j](l, h);
                    if (L.has_lambda1) b(j, h) += fw.lambda1(j, h) * fw.xi1eff[j][c](l, h);
                }
            }
            fw.beta_cells[l * L.n_c + c] = std::move(b);
        }
    }

    // likelihood sweep
    const int n_s = L.n_s;
    fw.etabar.resize(L.n_d, n_s);
    fw.record_ll.resize(n_s);
    Vec eta(L.n_d);
    for (int i = 0; i < n_s; ++i) {
        eta.noalias() = fw.beta_cells[cell_of_[i]] * x_.col(i);
        if (L.comorbidity) eta.noalias() += fw.gamma * u[L.eps(i)];
        double ll = 0.0;
        for (int j = 0; j < L.n_d; ++j) {
            ll += bernoulli_logit_lpmf(y_(j, i), eta[j]);
            fw.etabar(j, i) = y_(j, i) - inverse_logit(eta[j]);
        }
        fw.record_ll[i] = ll;
    }
    fw.likelihood =
        pairwise_sum({fw.record_ll.data(), static_cast<std::size_t>(fw.record_ll.size())});
    (void)want_pointwise;
    return std::isfinite(fw.likelihood);
}

double PosteriorTarget::log_density(const Vec& u) const {
    evaluations_.fetch_add(1, std::memory_order_relaxed);
    Forward fw;
    if (!forward(u, fw, false)) return -INFINITY;
    const double prior = log_prior_unconstrained(u, layout_, config_, nullptr);
    const double value = fw.likelihood + prior;
    return std::isfinite(value) ? value : -INFINITY;
}

Vec PosteriorTarget::pointwise_log_lik(const Vec& u) const {
    Forward fw;
    if (!forward(u, fw, true)) {
        throw NonFiniteDensity("pointwise log likelihood at a non-finite state");
    }
    return fw.record_ll;
}

double PosteriorTarget::log_density_gradient(const Vec& u, Vec& grad) const {
    evaluations_.fetch_add(1, std::memory_order_relaxed);
    const ParameterLayout& L = layout_;
    grad.setZero(L.dim);

    Forward fw;
    if (!forward(u, fw, false)) return -INFINITY;
    if (fw.max_jitter > 0.0) {
        jittered_.fetch_add(1, std::memory_order_relaxed);
        double cur = max_jitter_.load(std::memory_order_relaxed);
        while (fw.max_jitter > cur &&
               !max_jitter_.compare_exchange_weak(cur, fw.max_jitter)) {
        }
    }

    const double prior = log_prior_unconstrained(u, L, config_, &grad);
    const double value = fw.likelihood + prior;
    if (!std::isfinite(value)) return -INFINITY;

    // ---- reverse pass through the likelihood ----
    const int n_s = L.n_s;
    const int n_cells = L.n_l * L.n_c;
    std::vector<Mat> beta_bar(n_cells);
    for (auto& m : beta_bar) m = Mat::Zero(L.n_d, L.n_p);
    Vec gamma_bar = Vec::Zero(L.n_d);
    for (int i = 0; i < n_s; ++i) {
        beta_bar[cell_of_[i]].noalias() += fw.etabar.col(i) * x_.col(i).transpose();
        if (L.comorbidity) {
            grad[L.eps(i)] += fw.gamma.dot(fw.etabar.col(i));
            gamma_bar.noalias() += fw.etabar.col(i) * u[L.eps(i)];
        }
    }

    if (L.comorbidity) {
        grad[L.gamma(0)] += gamma_bar[0] * fw.gamma[0];  // chain through log gamma1
        for (int j = 1; j < L.n_d; ++j) grad[L.gamma(j)] += gamma_bar[j];
    }

    // mean matrix
    Mat b0_bar = Mat::Zero(L.n_d, L.n_p);
    for (const auto& m : beta_bar) b0_bar += m;
    if (L.direct_mean) {
        for (int j = 0; j < L.n_d; ++j)
            for (int h = 0; h < L.n_p; ++h) grad[L.b0(j, h)] += b0_bar(j, h);
    } else {
        Mat phi(L.n_d, L.rank), psi(L.rank, L.n_p);
        Vec delta(L.rank);
        for (int j = 0; j < L.n_d; ++j)
            for (int r = 0; r < L.rank; ++r) phi(j, r) = u[L.phi(j, r)];
        for (int r = 0; r < L.rank; ++r)
            for (int h = 0; h < L.n_p; ++h) psi(r, h) = u[L.psi(r, h)];
        for (int r = 0; r < L.rank; ++r) delta[r] = std::exp(u[L.delta(r)]);
        const Mat phi_bar = b0_bar * psi.transpose() * delta.asDiagonal();
        const Mat psi_bar = delta.asDiagonal() * phi.transpose() * b0_bar;
        const Mat core = phi.transpose() * b0_bar * psi.transpose();
        for (int j = 0; j < L.n_d; ++j)
            for (int r = 0; r < L.rank; ++r) grad[L.phi(j, r)] += phi_bar(j, r);
        for (int r = 0; r < L.rank; ++r)
            for (int h = 0; h < L.n_p; ++h) grad[L.psi(r, h)] += psi_bar(r, h);
        for (int r = 0; r < L.rank; ++r) grad[L.delta(r)] += core(r, r) * delta[r];
    }

    // deviation scales and fields
    std::vector<Mat> lbar;  // adjoint of each group's Cholesky factor
    if (L.has_kernels) {
        lbar.assign(L.omega_groups, Mat::Zero(L.n_l, L.n_l));
    }

    if (L.has_lambda0) {
        for (int j = 0; j < L.n_d; ++j) {
            Mat a0 = Mat::Zero(L.n_l, L.n_p);  // sum of beta_bar over cohorts
            for (int l = 0; l < L.n_l; ++l)
                for (int c = 0; c < L.n_c; ++c)
                    for (int h = 0; h < L.n_p; ++h) {
                        a0(l, h) += beta_bar[l * L.n_c + c](j, h);
                    }
            Mat xi0_bar(L.n_l, L.n_p);
            for (int h = 0; h < L.n_p; ++h) {
                double lam_bar = 0.0;
                for (int l = 0; l < L.n_l; ++l) {
                    lam_bar += a0(l, h) * fw.xi0[j](l, h);
                    xi0_bar(l, h) = fw.lambda0(j, h) * a0(l, h);
                }
                // chain to v = log lambda^2: d lambda / d v = lambda / 2
                grad[L.lambda0(j, h)] += lam_bar * fw.lambda0(j, h) * 0.5;
            }
            if (L.has_kernels) {
                const int g = L.omega_group(j, 0);
                const Mat& lower = fw.chol[g];
                for (int h = 0; h < L.n_p; ++h) {
                    const auto z = u.segment(L.z0(j, h, 0), L.n_l);
                    grad.segment(L.z0(j, h, 0), L.n_l).noalias() +=
                        lower.transpose().triangularView<Eigen::Upper>() * xi0_bar.col(h);
                    lbar[g].noalias() += xi0_bar.col(h) * z.transpose();
                }
            } else {
                for (int h = 0; h < L.n_p; ++h) {
                    grad.segment(L.z0(j, h, 0), L.n_l) += xi0_bar.col(h);
                }
            }
        }
    }

    if (L.has_lambda1) {
        for (int j = 0; j < L.n_d; ++j) {
            // adjoint of the per-cohort multiplier fields
            std::vector<Mat> eff_bar(L.n_c);
            for (int c = 0; c < L.n_c; ++c) {
                eff_bar[c].resize(L.n_l, L.n_p);
                for (int l = 0; l < L.n_l; ++l)
                    for (int h = 0; h < L.n_p; ++h) {
                        eff_bar[c](l, h) =
                            fw.lambda1(j, h) * beta_bar[l * L.n_c + c](j, h);
                    }
            }
            for (int h = 0; h < L.n_p; ++h) {
                double lam_bar = 0.0;
                for (int c = 1; c < L.n_c; ++c)
                    for (int l = 0; l < L.n_l; ++l) {
                        lam_bar += beta_bar[l * L.n_c + c](j, h) * fw.xi1eff[j][c](l, h);
                    }
                grad[L.lambda1(j, h)] += lam_bar * fw.lambda1(j, h) * 0.5;
            }
            // collapse the multiplier adjoints onto the slice fields
            std::vector<Mat> xi1_bar(L.z1_slices, Mat::Zero(L.n_l, L.n_p));
            if (L.dynamics == DynamicsMode::Linear) {
                for (int c = 1; c < L.n_c; ++c) {
                    xi1_bar[0] += static_cast<double>(c) * eff_bar[c];
                }
            } else {
                // xi1eff[c] = xi1eff[c-1] + xi1[t(c)]; run the recurrence backwards
                Mat acc = Mat::Zero(L.n_l, L.n_p);
                for (int c = L.n_c - 1; c >= 1; --c) {
                    acc += eff_bar[c];
                    xi1_bar[std::min(c - 1, L.z1_slices - 1)] += acc;
                }
            }
            if (L.has_kernels) {
                const int g = L.omega_group(j, 1);
                const Mat& lower = fw.chol[g];
                for (int t = 0; t < L.z1_slices; ++t) {
                    for (int h = 0; h < L.n_p; ++h) {
                        const auto z = u.segment(L.z1(j, h, t, 0), L.n_l);
                        grad.segment(L.z1(j, h, t, 0), L.n_l).noalias() +=
                            lower.transpose().triangularView<Eigen::Upper>() * xi1_bar[t].col(h);
                        lbar[g].noalias() += xi1_bar[t].col(h) * z.transpose();
                    }
                }
            } else {
                for (int t = 0; t < L.z1_slices; ++t)
                    for (int h = 0; h < L.n_p; ++h) {
                        grad.segment(L.z1(j, h, t, 0), L.n_l) += xi1_bar[t].col(h);
                    }
            }
        }
    }

    // through the Cholesky factorizations into omega and theta
    if (L.has_kernels) {
        Mat kbar_partition, kbar_contiguity;
        int idx_partition = -1, idx_contiguity = -1;
        for (int m = 0; m < L.num_kernels; ++m) {
            if (L.roster[m].kind == KernelKind::Partition) idx_partition = m;
            if (L.roster[m].kind == KernelKind::Contiguity) idx_contiguity = m;
        }
        if (idx_partition >= 0) kbar_partition = Mat::Zero(L.n_l, L.n_l);
        if (idx_contiguity >= 0) kbar_contiguity = Mat::Zero(L.n_l, L.n_l);

        for (int g = 0; g < L.omega_groups; ++g) {
            if (lbar[g].isZero(0.0)) continue;
            const Mat& lower = fw.chol[g];
            const Mat lbar_tri = lbar[g].triangularView<Eigen::Lower>();
            Mat p = lower.transpose() * lbar_tri;
            // keep the lower triangle, halve the diagonal
            for (int a = 0; a < L.n_l; ++a) {
                p(a, a) *= 0.5;
                for (int b = a + 1; b < L.n_l; ++b) p(a, b) = 0.0;
            }
            const Mat s1 = lower.transpose().triangularView<Eigen::Upper>().solve(p);
            Mat cbar_t = lower.transpose().triangularView<Eigen::Upper>().solve(
                Mat(s1.transpose()));
            Mat cbar = 0.5 * (cbar_t + cbar_t.transpose());

            if (L.alr_dim > 0) {
                Vec omega_bar(L.num_kernels);
                for (int m = 0; m < L.num_kernels; ++m) {
                    omega_bar[m] = cbar.cwiseProduct(fw.kernels[m]).sum();
                }
                const double dot = omega_bar.dot(fw.omega.row(g));
                for (int m = 0; m < L.alr_dim; ++m) {
                    grad[L.omega(g, m)] += fw.omega(g, m) * (omega_bar[m] - dot);
                }
            }
            if (idx_partition >= 0) kbar_partition += fw.omega(g, idx_partition) * cbar;
            if (idx_contiguity >= 0) kbar_contiguity += fw.omega(g, idx_contiguity) * cbar;
        }

        if (idx_partition >= 0 && L.off_theta_r >= 0) {
            Vec theta_bar = Vec::Zero(L.num_regions);
            for (int l = 0; l < L.n_l; ++l)
                for (int lp = 0; lp < L.n_l; ++lp) {
                    if (l == lp) continue;
                    if (table_.region_of[l] == table_.region_of[lp]) {
                        theta_bar[table_.region_of[l]] += kbar_partition(l, lp);
                    }
                }
            for (int r = 0; r < L.num_regions; ++r) {
                const double th = fw.theta_region[r];
                grad[L.theta_r(r)] += theta_bar[r] * th * (1.0 - th);
            }
        }
        if (idx_contiguity >= 0 && L.off_theta_c >= 0) {
            double theta_bar = 0.0;
            for (int l = 0; l < L.n_l; ++l)
                for (int lp : table_.adjacency[l]) {
                    theta_bar += kbar_contiguity(l, lp) /
                                 std::sqrt(static_cast<double>(table_.degree[l]) *
                                           static_cast<double>(table_.degree[lp]));
                }
            grad[L.theta_c()] += theta_bar * fw.theta_c * (1.0 - fw.theta_c);
        }
    }

    return value;
}

}  // namespace mstlogit
