#pragma once

#include <string>
#include <vector>

#include "mstlogit/config.hpp"
#include "mstlogit/data.hpp"

namespace mstlogit {

/// Offsets of every sampled block inside the flat unconstrained vector.
///
/// The order is fixed: Phi, Psi, log delta (or the direct mean entries),
/// log lambda0^2, log lambda1^2, logit theta_r, logit theta_c, the
/// additive-log-ratio coordinates of omega, log alpha0, log alpha1,
/// gamma (first entry on the log scale), z0 seeds, z1 seeds, epsilon.
/// Blocks masked out by the model variant are absent and their offsets -1.
struct ParameterLayout {
    int n_d = 0;
    int n_p = 0;
    int n_l = 0;
    int n_c = 0;
    int n_s = 0;
    int rank = 0;         // factorized mean rank, min(n_d, n_p)
    int num_regions = 0;
    std::vector<KernelSpec> roster;  // kernels after the variant mask
    int num_kernels = 0;
    bool has_partition = false;
    bool has_contiguity = false;
    bool direct_mean = false;
    bool has_lambda0 = false;
    bool has_lambda1 = false;
    bool has_kernels = false;
    bool identity_correlation = false;  // IL variant: xi == z
    bool comorbidity = false;
    bool shared_omega = true;
    bool shared_alpha = false;
    DynamicsMode dynamics = DynamicsMode::Linear;
    int z1_slices = 0;       // 1 in linear mode, n_c - 1 under the random walk
    int num_scales = 0;      // deviation scales present (lambda0, lambda1)
    int omega_groups = 0;    // simplexes: per disease, possibly per scale
    int alr_dim = 0;         // num_kernels - 1

    int off_phi = -1;
    int off_psi = -1;
    int off_delta = -1;
    int off_b0 = -1;
    int off_lambda0 = -1;
    int off_lambda1 = -1;
    int off_theta_r = -1;
    int off_theta_c = -1;
    int off_omega = -1;
    int off_alpha0 = -1;
    int off_alpha1 = -1;
    int off_gamma = -1;
    int off_z0 = -1;
    int off_z1 = -1;
    int off_eps = -1;
    int dim = 0;

    static ParameterLayout create(const ModelConfig& config, const LocationTable& table,
                                  int num_respondents);

    int phi(int j, int r) const { return off_phi + j * rank + r; }
    int psi(int r, int h) const { return off_psi + r * n_p + h; }
    int delta(int r) const { return off_delta + r; }
    int b0(int j, int h) const { return off_b0 + j * n_p + h; }
    int lambda0(int j, int h) const { return off_lambda0 + j * n_p + h; }
    int lambda1(int j, int h) const { return off_lambda1 + j * n_p + h; }
    int theta_r(int r) const { return off_theta_r + r; }
    int theta_c() const { return off_theta_c; }
    /// Which omega simplex the pair (disease, scale) uses.
    int omega_group(int j, int scale) const;
    int omega(int group, int m) const { return off_omega + group * alr_dim + m; }
    int alpha(int scale) const {
        return (scale == 0 || shared_alpha) ? off_alpha0 : off_alpha1;
    }
    int gamma(int j) const { return off_gamma + j; }
    int z0(int j, int h, int l) const { return off_z0 + (j * n_p + h) * n_l + l; }
    int z1(int j, int h, int slice, int l) const {
        return off_z1 + ((j * n_p + h) * z1_slices + slice) * n_l + l;
    }
    int eps(int i) const { return off_eps + i; }

    /// Coordinate names matching the offsets; draw CSV headers use these.
    std::vector<std::string> names() const;
};

}  // namespace mstlogit
