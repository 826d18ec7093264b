#include "mstlogit/priors.hpp"

#include <cmath>

#include "mstlogit/errors.hpp"
#include "mstlogit/special.hpp"

namespace mstlogit {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727417803297;  // 0.5*log(2*pi)

template <typename Real>
Real std_normal_lpdf(Real x) {
    return -Real(kHalfLog2Pi) - Real(0.5) * x * x;
}

}  // namespace

Vec to_unconstrained(const ParameterState& s, const ParameterLayout& L) {
    Vec u = Vec::Zero(L.dim);
    if (L.direct_mean) {
        for (int j = 0; j < L.n_d; ++j)
            for (int h = 0; h < L.n_p; ++h) u[L.b0(j, h)] = s.b0_direct(j, h);
    } else {
        for (int j = 0; j < L.n_d; ++j)
            for (int r = 0; r < L.rank; ++r) u[L.phi(j, r)] = s.phi(j, r);
        for (int r = 0; r < L.rank; ++r)
            for (int h = 0; h < L.n_p; ++h) u[L.psi(r, h)] = s.psi(r, h);
        for (int r = 0; r < L.rank; ++r) {
            if (!(s.delta[r] > 0.0)) throw ConstraintViolation("delta must be positive");
            u[L.delta(r)] = std::log(s.delta[r]);
        }
    }
    if (L.has_lambda0) {
        for (int j = 0; j < L.n_d; ++j)
            for (int h = 0; h < L.n_p; ++h) {
                if (!(s.lambda0(j, h) > 0.0)) {
                    throw ConstraintViolation("lambda0 must be positive");
                }
                u[L.lambda0(j, h)] = 2.0 * std::log(s.lambda0(j, h));
            }
    }
    if (L.has_lambda1) {
        for (int j = 0; j < L.n_d; ++j)
            for (int h = 0; h < L.n_p; ++h) {
                if (!(s.lambda1(j, h) > 0.0)) {
                    throw ConstraintViolation("lambda1 must be positive");
                }
                u[L.lambda1(j, h)] = 2.0 * std::log(s.lambda1(j, h));
            }
    }
    if (L.off_theta_r >= 0) {
        for (int r = 0; r < L.num_regions; ++r) {
            const double t = s.theta_region[r];
            if (!(t > 0.0 && t < 1.0)) throw ConstraintViolation("theta_r must lie in (0,1)");
            u[L.theta_r(r)] = logit(t);
        }
    }
    if (L.off_theta_c >= 0) {
        if (!(s.theta_contiguity > 0.0 && s.theta_contiguity < 1.0)) {
            throw ConstraintViolation("theta_c must lie in (0,1)");
        }
        u[L.theta_c()] = logit(s.theta_contiguity);
    }
    if (L.off_omega >= 0) {
        for (int g = 0; g < L.omega_groups; ++g) {
            const double ref = s.omega(g, L.num_kernels - 1);
            if (!(ref > 0.0)) throw ConstraintViolation("omega must be strictly positive");
            for (int m = 0; m < L.alr_dim; ++m) {
                const double w = s.omega(g, m);
                if (!(w > 0.0)) throw ConstraintViolation("omega must be strictly positive");
                u[L.omega(g, m)] = std::log(w / ref);
            }
        }
    }
    if (L.off_alpha0 >= 0) {
        if (!(s.alpha0 > 0.0)) throw ConstraintViolation("alpha0 must be positive");
        u[L.off_alpha0] = std::log(s.alpha0);
    }
    if (L.off_alpha1 >= 0) {
        if (!(s.alpha1 > 0.0)) throw ConstraintViolation("alpha1 must be positive");
        u[L.off_alpha1] = std::log(s.alpha1);
    }
    if (L.comorbidity) {
        if (!(s.gamma[0] > 0.0)) throw ConstraintViolation("gamma[0] must be positive");
        u[L.gamma(0)] = std::log(s.gamma[0]);
        for (int j = 1; j < L.n_d; ++j) u[L.gamma(j)] = s.gamma[j];
    }
    if (L.has_lambda0) {
        for (int i = 0; i < s.z0.size(); ++i) u[L.off_z0 + i] = s.z0[i];
    }
    if (L.has_lambda1) {
        for (int i = 0; i < s.z1.size(); ++i) u[L.off_z1 + i] = s.z1[i];
    }
    if (L.comorbidity) {
        for (int i = 0; i < L.n_s; ++i) u[L.eps(i)] = s.eps[i];
    }
    return u;
}

ParameterState from_unconstrained(const Vec& u, const ParameterLayout& L) {
    if (u.size() != L.dim) {
        throw ConstraintViolation("unconstrained vector has wrong length");
    }
    if (!u.allFinite()) {
        throw ConstraintViolation("unconstrained vector has non-finite entries");
    }
    ParameterState s;
    if (L.direct_mean) {
        s.b0_direct.resize(L.n_d, L.n_p);
        for (int j = 0; j < L.n_d; ++j)
            for (int h = 0; h < L.n_p; ++h) s.b0_direct(j, h) = u[L.b0(j, h)];
    } else {
        s.phi.resize(L.n_d, L.rank);
        s.psi.resize(L.rank, L.n_p);
        s.delta.resize(L.rank);
        for (int j = 0; j < L.n_d; ++j)
            for (int r = 0; r < L.rank; ++r) s.phi(j, r) = u[L.phi(j, r)];
        for (int r = 0; r < L.rank; ++r)
            for (int h = 0; h < L.n_p; ++h) s.psi(r, h) = u[L.psi(r, h)];
        for (int r = 0; r < L.rank; ++r) s.delta[r] = std::exp(u[L.delta(r)]);
    }
    if (L.has_lambda0) {
        s.lambda0.resize(L.n_d, L.n_p);
        for (int j = 0; j < L.n_d; ++j)
            for (int h = 0; h < L.n_p; ++h) s.lambda0(j, h) = std::exp(0.5 * u[L.lambda0(j, h)]);
    }
    if (L.has_lambda1) {
        s.lambda1.resize(L.n_d, L.n_p);
        for (int j = 0; j < L.n_d; ++j)
            for (int h = 0; h < L.n_p; ++h) s.lambda1(j, h) = std::exp(0.5 * u[L.lambda1(j, h)]);
    }
    if (L.off_theta_r >= 0) {
        s.theta_region.resize(L.num_regions);
        for (int r = 0; r < L.num_regions; ++r) {
            s.theta_region[r] = inverse_logit(u[L.theta_r(r)]);
        }
    }
    if (L.off_theta_c >= 0) s.theta_contiguity = inverse_logit(u[L.theta_c()]);
    if (L.off_omega >= 0) {
        s.omega.resize(L.omega_groups, L.num_kernels);
        for (int g = 0; g < L.omega_groups; ++g) {
            double denom = 1.0;
            double mx = 0.0;  // guard the softmax against overflow
            for (int m = 0; m < L.alr_dim; ++m) mx = std::max(mx, u[L.omega(g, m)]);
            denom = std::exp(-mx);
            for (int m = 0; m < L.alr_dim; ++m) denom += std::exp(u[L.omega(g, m)] - mx);
            for (int m = 0; m < L.alr_dim; ++m) {
                s.omega(g, m) = std::exp(u[L.omega(g, m)] - mx) / denom;
            }
            s.omega(g, L.num_kernels - 1) = std::exp(-mx) / denom;
        }
    } else if (L.has_kernels && L.num_kernels == 1) {
        s.omega.resize(L.omega_groups, 1);
        s.omega.setOnes();
    }
    if (L.off_alpha0 >= 0) s.alpha0 = std::exp(u[L.off_alpha0]);
    if (L.off_alpha1 >= 0) {
        s.alpha1 = std::exp(u[L.off_alpha1]);
    } else if (L.shared_alpha) {
        s.alpha1 = s.alpha0;
    }
    if (L.comorbidity) {
        s.gamma.resize(L.n_d);
        s.gamma[0] = std::exp(u[L.gamma(0)]);
        for (int j = 1; j < L.n_d; ++j) s.gamma[j] = u[L.gamma(j)];
    }
    if (L.has_lambda0) {
        s.z0 = u.segment(L.off_z0, L.n_d * L.n_p * L.n_l);
    }
    if (L.has_lambda1) {
        s.z1 = u.segment(L.off_z1, L.n_d * L.n_p * L.z1_slices * L.n_l);
    }
    if (L.comorbidity) {
        s.eps = u.segment(L.off_eps, L.n_s);
    }
    return s;
}

double log_prior(const ParameterState& s, const ParameterLayout& L, const ModelConfig& config) {
    const PriorConfig& p = config.prior;
    double lp = 0.0;

    if (L.direct_mean) {
        const double s2 = p.direct_scale * p.direct_scale;
        for (int j = 0; j < L.n_d; ++j)
            for (int h = 0; h < L.n_p; ++h) {
                lp += -kHalfLog2Pi - std::log(p.direct_scale) -
                      0.5 * s.b0_direct(j, h) * s.b0_direct(j, h) / s2;
            }
    } else {
        for (int j = 0; j < L.n_d; ++j)
            for (int r = 0; r < L.rank; ++r) lp += std_normal_lpdf(s.phi(j, r));
        for (int r = 0; r < L.rank; ++r)
            for (int h = 0; h < L.n_p; ++h) lp += std_normal_lpdf(s.psi(r, h));
        for (int r = 0; r < L.rank; ++r) {
            const double d = s.delta[r];
            if (!(d > 0.0)) throw ConstraintViolation("delta outside support");
            lp += p.a_delta * std::log(p.b_delta) - std::lgamma(p.a_delta) +
                  (p.a_delta - 1.0) * std::log(d) - p.b_delta * d;
        }
    }

    for (int scale = 0; scale < 2; ++scale) {
        const bool present = scale == 0 ? L.has_lambda0 : L.has_lambda1;
        if (!present) continue;
        const Mat& lam = scale == 0 ? s.lambda0 : s.lambda1;
        const double alpha = scale == 0 ? s.alpha0 : s.alpha1;
        if (!(alpha > 0.0)) throw ConstraintViolation("alpha outside support");
        const double rate = alpha / (p.sigma2_zeta * p.rho(scale, L.n_p));
        for (int j = 0; j < L.n_d; ++j)
            for (int h = 0; h < L.n_p; ++h) {
                const double l2 = lam(j, h) * lam(j, h);
                if (!(l2 > 0.0)) throw ConstraintViolation("lambda outside support");
                lp += alpha * std::log(rate) - std::lgamma(alpha) +
                      (alpha - 1.0) * std::log(l2) - rate * l2;
            }
    }
    if (L.off_alpha0 >= 0) lp += -s.alpha0;
    if (L.off_alpha1 >= 0) lp += -s.alpha1;

    auto beta_lpdf = [&p](double t) {
        if (!(t > 0.0 && t < 1.0)) throw ConstraintViolation("theta outside support");
        return std::lgamma(p.theta_beta_a + p.theta_beta_b) - std::lgamma(p.theta_beta_a) -
               std::lgamma(p.theta_beta_b) + (p.theta_beta_a - 1.0) * std::log(t) +
               (p.theta_beta_b - 1.0) * std::log1p(-t);
    };
    if (L.off_theta_r >= 0) {
        for (int r = 0; r < L.num_regions; ++r) lp += beta_lpdf(s.theta_region[r]);
    }
    if (L.off_theta_c >= 0) lp += beta_lpdf(s.theta_contiguity);

    if (L.off_omega >= 0) {
        const int nf = L.num_kernels;
        const double logz =
            std::lgamma(nf * p.a_omega) - static_cast<double>(nf) * std::lgamma(p.a_omega);
        for (int g = 0; g < L.omega_groups; ++g) {
            lp += logz;
            for (int m = 0; m < nf; ++m) {
                const double w = s.omega(g, m);
                if (!(w > 0.0)) throw ConstraintViolation("omega outside support");
                lp += (p.a_omega - 1.0) * std::log(w);
            }
        }
    }

    if (L.comorbidity) {
        const double g1 = s.gamma[0];
        if (!(g1 > 0.0)) throw ConstraintViolation("gamma[0] outside support");
        lp += std::log(2.0) - kHalfLog2Pi - std::log(p.gamma1_scale) -
              0.5 * g1 * g1 / (p.gamma1_scale * p.gamma1_scale);
        for (int j = 1; j < L.n_d; ++j) lp += std_normal_lpdf(s.gamma[j]);
        for (int i = 0; i < L.n_s; ++i) lp += std_normal_lpdf(s.eps[i]);
    }
    if (L.has_lambda0) {
        for (int i = 0; i < s.z0.size(); ++i) lp += std_normal_lpdf(s.z0[i]);
    }
    if (L.has_lambda1) {
        for (int i = 0; i < s.z1.size(); ++i) lp += std_normal_lpdf(s.z1[i]);
    }
    return lp;
}

template <typename Real>
Real log_prior_unconstrained_value(const Real* u, const ParameterLayout& L,
                                   const ModelConfig& config) {
    const PriorConfig& p = config.prior;
    Real lp = 0;

    auto normal0 = [](Real x) { return -Real(kHalfLog2Pi) - Real(0.5) * x * x; };

    if (L.direct_mean) {
        const Real sc = Real(p.direct_scale);
        for (int j = 0; j < L.n_d; ++j)
            for (int h = 0; h < L.n_p; ++h) {
                const Real x = u[L.b0(j, h)];
                lp += -Real(kHalfLog2Pi) - std::log(sc) - Real(0.5) * x * x / (sc * sc);
            }
    } else {
        for (int j = 0; j < L.n_d; ++j)
            for (int r = 0; r < L.rank; ++r) lp += normal0(u[L.phi(j, r)]);
        for (int r = 0; r < L.rank; ++r)
            for (int h = 0; h < L.n_p; ++h) lp += normal0(u[L.psi(r, h)]);
        // Ga(a,b) on delta plus the log-transform Jacobian
        for (int r = 0; r < L.rank; ++r) {
            const Real t = u[L.delta(r)];
            lp += Real(p.a_delta) * std::log(Real(p.b_delta)) - std::lgamma(Real(p.a_delta)) +
                  Real(p.a_delta) * t - Real(p.b_delta) * std::exp(t);
        }
    }

    // Ga(alpha, rate) on lambda^2 in v = log lambda^2 coordinates (Jacobian
    // folded in), plus the exponential prior and Jacobian for alpha itself.
    for (int scale = 0; scale < 2; ++scale) {
        const bool present = scale == 0 ? L.has_lambda0 : L.has_lambda1;
        if (!present) continue;
        const Real w = u[L.alpha(scale)];
        const Real alpha = std::exp(w);
        const Real k = Real(1.0 / (p.sigma2_zeta * p.rho(scale, L.n_p)));
        const Real log_rate = w + std::log(k);
        const int off = scale == 0 ? L.off_lambda0 : L.off_lambda1;
        for (int i = 0; i < L.n_d * L.n_p; ++i) {
            const Real v = u[off + i];
            lp += alpha * log_rate - std::lgamma(alpha) + alpha * v -
                  alpha * k * std::exp(v);
        }
    }
    if (L.off_alpha0 >= 0) {
        lp += -std::exp(u[L.off_alpha0]) + u[L.off_alpha0];
    }
    if (L.off_alpha1 >= 0) {
        lp += -std::exp(u[L.off_alpha1]) + u[L.off_alpha1];
    }

    // Be(a,b) through the logit transform: a*log(theta) + b*log(1-theta)
    auto beta_logit = [&p](Real t) {
        const Real log_theta = -log1pexp(-t);
        const Real log_1m = -log1pexp(t);
        return std::lgamma(Real(p.theta_beta_a + p.theta_beta_b)) -
               std::lgamma(Real(p.theta_beta_a)) - std::lgamma(Real(p.theta_beta_b)) +
               Real(p.theta_beta_a) * log_theta + Real(p.theta_beta_b) * log_1m;
    };
    if (L.off_theta_r >= 0) {
        for (int r = 0; r < L.num_regions; ++r) lp += beta_logit(u[L.theta_r(r)]);
    }
    if (L.off_theta_c >= 0) lp += beta_logit(u[L.theta_c()]);

    // Dirichlet through the additive-log-ratio transform: the density
    // exponents and the Jacobian combine to a_omega * sum_m log omega_m.
    if (L.off_omega >= 0) {
        const int nf = L.num_kernels;
        const Real logz = std::lgamma(Real(nf * p.a_omega)) -
                          Real(nf) * std::lgamma(Real(p.a_omega));
        for (int g = 0; g < L.omega_groups; ++g) {
            Real mx = 0;
            for (int m = 0; m < L.alr_dim; ++m) mx = std::max(mx, u[L.omega(g, m)]);
            Real denom = std::exp(-mx);
            for (int m = 0; m < L.alr_dim; ++m) denom += std::exp(u[L.omega(g, m)] - mx);
            const Real log_denom = mx + std::log(denom);
            lp += logz;
            for (int m = 0; m < L.alr_dim; ++m) {
                lp += Real(p.a_omega) * (u[L.omega(g, m)] - log_denom);
            }
            lp += Real(p.a_omega) * (-log_denom);  // reference component
        }
    }

    if (L.comorbidity) {
        const Real g = u[L.gamma(0)];
        const Real g1 = std::exp(g);
        const Real sc = Real(p.gamma1_scale);
        lp += std::log(Real(2)) - Real(kHalfLog2Pi) - std::log(sc) -
              Real(0.5) * g1 * g1 / (sc * sc) + g;
        for (int j = 1; j < L.n_d; ++j) lp += normal0(u[L.gamma(j)]);
        for (int i = 0; i < L.n_s; ++i) lp += normal0(u[L.eps(i)]);
    }
    if (L.has_lambda0) {
        const int n = L.n_d * L.n_p * L.n_l;
        for (int i = 0; i < n; ++i) lp += normal0(u[L.off_z0 + i]);
    }
    if (L.has_lambda1) {
        const int n = L.n_d * L.n_p * L.z1_slices * L.n_l;
        for (int i = 0; i < n; ++i) lp += normal0(u[L.off_z1 + i]);
    }
    return lp;
}

template double log_prior_unconstrained_value<double>(const double*, const ParameterLayout&,
                                                      const ModelConfig&);
template long double log_prior_unconstrained_value<long double>(const long double*,
                                                                const ParameterLayout&,
                                                                const ModelConfig&);

double log_prior_unconstrained(const Vec& u, const ParameterLayout& L, const ModelConfig& config,
                               Vec* grad) {
    const PriorConfig& p = config.prior;
    const double lp = log_prior_unconstrained_value<double>(u.data(), L, config);
    if (!grad) return lp;
    Vec& g = *grad;

    if (L.direct_mean) {
        const double inv_s2 = 1.0 / (p.direct_scale * p.direct_scale);
        for (int j = 0; j < L.n_d; ++j)
            for (int h = 0; h < L.n_p; ++h) g[L.b0(j, h)] += -u[L.b0(j, h)] * inv_s2;
    } else {
        for (int j = 0; j < L.n_d; ++j)
            for (int r = 0; r < L.rank; ++r) g[L.phi(j, r)] += -u[L.phi(j, r)];
        for (int r = 0; r < L.rank; ++r)
            for (int h = 0; h < L.n_p; ++h) g[L.psi(r, h)] += -u[L.psi(r, h)];
        for (int r = 0; r < L.rank; ++r) {
            g[L.delta(r)] += p.a_delta - p.b_delta * std::exp(u[L.delta(r)]);
        }
    }

    for (int scale = 0; scale < 2; ++scale) {
        const bool present = scale == 0 ? L.has_lambda0 : L.has_lambda1;
        if (!present) continue;
        const double w = u[L.alpha(scale)];
        const double alpha = std::exp(w);
        const double k = 1.0 / (p.sigma2_zeta * p.rho(scale, L.n_p));
        const double log_rate = w + std::log(k);
        const double dig = digamma(alpha);
        const int off = scale == 0 ? L.off_lambda0 : L.off_lambda1;
        double dalpha = 0.0;  // d lp / d alpha from this scale's lambdas
        for (int i = 0; i < L.n_d * L.n_p; ++i) {
            const double v = u[off + i];
            const double l2 = std::exp(v);
            g[off + i] += alpha - alpha * k * l2;
            dalpha += log_rate + 1.0 - dig + v - k * l2;
        }
        g[L.alpha(scale)] += alpha * dalpha;
    }
    if (L.off_alpha0 >= 0) g[L.off_alpha0] += -std::exp(u[L.off_alpha0]) + 1.0;
    if (L.off_alpha1 >= 0) g[L.off_alpha1] += -std::exp(u[L.off_alpha1]) + 1.0;

    auto beta_logit_grad = [&p](double t) {
        const double theta = inverse_logit(t);
        return p.theta_beta_a * (1.0 - theta) - p.theta_beta_b * theta;
    };
    if (L.off_theta_r >= 0) {
        for (int r = 0; r < L.num_regions; ++r) {
            g[L.theta_r(r)] += beta_logit_grad(u[L.theta_r(r)]);
        }
    }
    if (L.off_theta_c >= 0) g[L.theta_c()] += beta_logit_grad(u[L.theta_c()]);

    if (L.off_omega >= 0) {
        const int nf = L.num_kernels;
        for (int gp = 0; gp < L.omega_groups; ++gp) {
            double mx = 0.0;
            for (int m = 0; m < L.alr_dim; ++m) mx = std::max(mx, u[L.omega(gp, m)]);
            double denom = std::exp(-mx);
            for (int m = 0; m < L.alr_dim; ++m) denom += std::exp(u[L.omega(gp, m)] - mx);
            for (int m = 0; m < L.alr_dim; ++m) {
                const double om = std::exp(u[L.omega(gp, m)] - mx) / denom;
                g[L.omega(gp, m)] += p.a_omega - p.a_omega * nf * om;
            }
        }
    }

    if (L.comorbidity) {
        const double g1 = std::exp(u[L.gamma(0)]);
        g[L.gamma(0)] += -g1 * g1 / (p.gamma1_scale * p.gamma1_scale) + 1.0;
        for (int j = 1; j < L.n_d; ++j) g[L.gamma(j)] += -u[L.gamma(j)];
        for (int i = 0; i < L.n_s; ++i) g[L.eps(i)] += -u[L.eps(i)];
    }
    if (L.has_lambda0) {
        const int n = L.n_d * L.n_p * L.n_l;
        for (int i = 0; i < n; ++i) g[L.off_z0 + i] += -u[L.off_z0 + i];
    }
    if (L.has_lambda1) {
        const int n = L.n_d * L.n_p * L.z1_slices * L.n_l;
        for (int i = 0; i < n; ++i) g[L.off_z1 + i] += -u[L.off_z1 + i];
    }
    return lp;
}

ParameterState sample_prior(const ParameterLayout& L, const ModelConfig& config, Rng& rng) {
    const PriorConfig& p = config.prior;
    ParameterState s;
    if (L.direct_mean) {
        s.b0_direct.resize(L.n_d, L.n_p);
        for (int j = 0; j < L.n_d; ++j)
            for (int h = 0; h < L.n_p; ++h) s.b0_direct(j, h) = rng.normal(0.0, p.direct_scale);
    } else {
        s.delta.resize(L.rank);
        for (int r = 0; r < L.rank; ++r) s.delta[r] = rng.gamma(p.a_delta, p.b_delta);
        s.phi.resize(L.n_d, L.rank);
        for (int j = 0; j < L.n_d; ++j)
            for (int r = 0; r < L.rank; ++r) s.phi(j, r) = rng.normal();
        s.psi.resize(L.rank, L.n_p);
        for (int r = 0; r < L.rank; ++r)
            for (int h = 0; h < L.n_p; ++h) s.psi(r, h) = rng.normal();
    }
    if (L.off_alpha0 >= 0) s.alpha0 = rng.exponential(1.0);
    if (L.off_alpha1 >= 0) {
        s.alpha1 = rng.exponential(1.0);
    } else if (L.shared_alpha) {
        s.alpha1 = s.alpha0;
    }
    for (int scale = 0; scale < 2; ++scale) {
        const bool present = scale == 0 ? L.has_lambda0 : L.has_lambda1;
        if (!present) continue;
        Mat& lam = scale == 0 ? s.lambda0 : s.lambda1;
        const double alpha = scale == 0 ? s.alpha0 : s.alpha1;
        const double rate = alpha / (p.sigma2_zeta * p.rho(scale, L.n_p));
        lam.resize(L.n_d, L.n_p);
        for (int j = 0; j < L.n_d; ++j)
            for (int h = 0; h < L.n_p; ++h) lam(j, h) = std::sqrt(rng.gamma(alpha, rate));
    }
    if (L.off_theta_r >= 0) {
        s.theta_region.resize(L.num_regions);
        for (int r = 0; r < L.num_regions; ++r) {
            s.theta_region[r] = rng.beta(p.theta_beta_a, p.theta_beta_b);
        }
    }
    if (L.off_theta_c >= 0) s.theta_contiguity = rng.beta(p.theta_beta_a, p.theta_beta_b);
    if (L.off_omega >= 0) {
        s.omega.resize(L.omega_groups, L.num_kernels);
        for (int g = 0; g < L.omega_groups; ++g) {
            const auto w = rng.dirichlet_symmetric(p.a_omega, L.num_kernels);
            for (int m = 0; m < L.num_kernels; ++m) s.omega(g, m) = w[m];
        }
    } else if (L.has_kernels && L.num_kernels == 1) {
        s.omega.resize(L.omega_groups, 1);
        s.omega.setOnes();
    }
    if (L.comorbidity) {
        s.gamma.resize(L.n_d);
        s.gamma[0] = std::abs(rng.normal(0.0, p.gamma1_scale));
        for (int j = 1; j < L.n_d; ++j) s.gamma[j] = rng.normal();
    }
    if (L.has_lambda0) {
        s.z0.resize(L.n_d * L.n_p * L.n_l);
        for (int i = 0; i < s.z0.size(); ++i) s.z0[i] = rng.normal();
    }
    if (L.has_lambda1) {
        s.z1.resize(L.n_d * L.n_p * L.z1_slices * L.n_l);
        for (int i = 0; i < s.z1.size(); ++i) s.z1[i] = rng.normal();
    }
    if (L.comorbidity) {
        s.eps.resize(L.n_s);
        for (int i = 0; i < L.n_s; ++i) s.eps[i] = rng.normal();
    }
    return s;
}

}  // namespace mstlogit
