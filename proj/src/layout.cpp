#include "mstlogit/layout.hpp"

#include <algorithm>

#include "mstlogit/errors.hpp"

namespace mstlogit {

ParameterLayout ParameterLayout::create(const ModelConfig& config, const LocationTable& table,
                                        int num_respondents) {
    ParameterLayout L;
    L.n_d = config.num_diseases;
    L.n_p = config.num_predictors();
    L.n_l = table.num_locations;
    L.n_c = config.num_cohorts;
    L.n_s = num_respondents;
    L.num_regions = table.num_regions;
    L.direct_mean = config.mean == MeanParametrization::Direct;
    L.rank = L.direct_mean ? 0 : std::min(L.n_d, L.n_p);
    L.has_lambda0 = config.has_lambda0();
    L.has_lambda1 = config.has_lambda1();
    L.identity_correlation = config.variant == ModelVariant::IL;
    L.roster = config.effective_kernels();
    L.num_kernels = static_cast<int>(L.roster.size());
    L.has_kernels = config.has_kernels();
    for (const auto& k : L.roster) {
        if (k.kind == KernelKind::Partition) L.has_partition = true;
        if (k.kind == KernelKind::Contiguity) L.has_contiguity = true;
    }
    L.comorbidity = config.comorbidity;
    L.shared_omega = config.shared_omega_scales;
    L.shared_alpha = config.shared_alpha_lambda;
    L.dynamics = config.dynamics;
    L.num_scales = (L.has_lambda0 ? 1 : 0) + (L.has_lambda1 ? 1 : 0);
    L.z1_slices =
        L.has_lambda1 ? (config.dynamics == DynamicsMode::RandomWalk ? std::max(1, L.n_c - 1) : 1)
                      : 0;
    L.alr_dim = L.has_kernels ? L.num_kernels - 1 : 0;
    // one covariance mixture per disease, or per (disease, scale) when the
    // weights are not shared across the two deviation scales
    L.omega_groups = L.has_kernels ? L.n_d * (L.shared_omega ? 1 : std::max(1, L.num_scales)) : 0;

    int off = 0;
    auto block = [&off](int size) {
        const int at = off;
        off += size;
        return at;
    };
    if (L.direct_mean) {
        L.off_b0 = block(L.n_d * L.n_p);
    } else {
        L.off_phi = block(L.n_d * L.rank);
        L.off_psi = block(L.rank * L.n_p);
        L.off_delta = block(L.rank);
    }
    if (L.has_lambda0) L.off_lambda0 = block(L.n_d * L.n_p);
    if (L.has_lambda1) L.off_lambda1 = block(L.n_d * L.n_p);
    if (L.has_kernels) {
        if (L.has_partition) L.off_theta_r = block(L.num_regions);
        if (L.has_contiguity) L.off_theta_c = block(1);
        if (L.omega_groups > 0 && L.alr_dim > 0) L.off_omega = block(L.omega_groups * L.alr_dim);
    }
    if (L.has_lambda0 || L.has_lambda1) {
        L.off_alpha0 = block(1);
        if (L.has_lambda1 && L.has_lambda0 && !L.shared_alpha) L.off_alpha1 = block(1);
        // a lone lambda1 (impossible under current variants) would reuse alpha0
    }
    if (L.comorbidity) L.off_gamma = block(L.n_d);
    if (L.has_lambda0) L.off_z0 = block(L.n_d * L.n_p * L.n_l);
    if (L.has_lambda1) L.off_z1 = block(L.n_d * L.n_p * L.z1_slices * L.n_l);
    if (L.comorbidity) L.off_eps = block(L.n_s);
    L.dim = off;
    return L;
}

int ParameterLayout::omega_group(int j, int scale) const {
    if (shared_omega || num_scales == 1) return j;
    return j * num_scales + scale;
}

std::vector<std::string> ParameterLayout::names() const {
    std::vector<std::string> out(dim);
    auto idx = [](std::initializer_list<int> parts) {
        std::string s;
        for (int p : parts) s += "[" + std::to_string(p) + "]";
        return s;
    };
    if (direct_mean) {
        for (int j = 0; j < n_d; ++j)
            for (int h = 0; h < n_p; ++h) out[b0(j, h)] = "b0" + idx({j, h});
    } else {
        for (int j = 0; j < n_d; ++j)
            for (int r = 0; r < rank; ++r) out[phi(j, r)] = "phi" + idx({j, r});
        for (int r = 0; r < rank; ++r)
            for (int h = 0; h < n_p; ++h) out[psi(r, h)] = "psi" + idx({r, h});
        for (int r = 0; r < rank; ++r) out[delta(r)] = "log_delta" + idx({r});
    }
    if (has_lambda0) {
        for (int j = 0; j < n_d; ++j)
            for (int h = 0; h < n_p; ++h) out[lambda0(j, h)] = "log_lambda0_sq" + idx({j, h});
    }
    if (has_lambda1) {
        for (int j = 0; j < n_d; ++j)
            for (int h = 0; h < n_p; ++h) out[lambda1(j, h)] = "log_lambda1_sq" + idx({j, h});
    }
    if (off_theta_r >= 0) {
        for (int r = 0; r < num_regions; ++r) out[theta_r(r)] = "logit_theta_r" + idx({r});
    }
    if (off_theta_c >= 0) out[theta_c()] = "logit_theta_c";
    if (off_omega >= 0) {
        for (int g = 0; g < omega_groups; ++g)
            for (int m = 0; m < alr_dim; ++m) out[omega(g, m)] = "alr_omega" + idx({g, m});
    }
    if (off_alpha0 >= 0) out[off_alpha0] = "log_alpha0";
    if (off_alpha1 >= 0) out[off_alpha1] = "log_alpha1";
    if (comorbidity) {
        out[gamma(0)] = "log_gamma1";
        for (int j = 1; j < n_d; ++j) out[gamma(j)] = "gamma" + idx({j});
    }
    if (has_lambda0) {
        for (int j = 0; j < n_d; ++j)
            for (int h = 0; h < n_p; ++h)
                for (int l = 0; l < n_l; ++l) out[z0(j, h, l)] = "z0" + idx({j, h, l});
    }
    if (has_lambda1) {
        for (int j = 0; j < n_d; ++j)
            for (int h = 0; h < n_p; ++h)
                for (int t = 0; t < z1_slices; ++t)
                    for (int l = 0; l < n_l; ++l) out[z1(j, h, t, l)] = "z1" + idx({j, h, t, l});
    }
    if (comorbidity) {
        for (int i = 0; i < n_s; ++i) out[eps(i)] = "eps" + idx({i});
    }
    return out;
}

}  // namespace mstlogit
