#pragma once

#include <cmath>
#include <functional>

#include "mstlogit/config.hpp"
#include "mstlogit/data.hpp"
#include "mstlogit/model.hpp"
#include "mstlogit/rng.hpp"
#include "mstlogit/simulator.hpp"

namespace testsupport {

using namespace mstlogit;

/// Central finite differences of a scalar function, fixed step.
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x,
                       double step = 1e-4) {
    Vec g(x.size());
    Vec xp = x;
    for (int i = 0; i < x.size(); ++i) {
        const double x0 = x[i];
        xp[i] = x0 + step;
        const double up = f(xp);
        xp[i] = x0 - step;
        const double dn = f(xp);
        xp[i] = x0;
        g[i] = (up - dn) / (2.0 * step);
    }
    return g;
}

/// Relative gradient error with a magnitude floor: errors on components whose
/// scale is below the floor are measured against the floor itself.
inline double max_rel_error(const Vec& analytic, const Vec& numeric, double floor_scale = 1e-3) {
    double worst = 0.0;
    for (int i = 0; i < analytic.size(); ++i) {
        const double scale =
            std::max({std::abs(analytic[i]), std::abs(numeric[i]), floor_scale});
        worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
    }
    return worst;
}

/// A small location table with a hand-specified structure: two regions, a
/// path graph, one distance matrix.
inline LocationTable tiny_table(int n = 4, int distance_kernels = 1) {
    LocationTable t;
    t.num_locations = n;
    t.num_regions = 2;
    t.region_of.resize(n);
    for (int l = 0; l < n; ++l) t.region_of[l] = l < (n + 1) / 2 ? 0 : 1;
    t.adjacency.assign(n, {});
    for (int l = 0; l + 1 < n; ++l) {
        t.adjacency[l].push_back(l + 1);
        t.adjacency[l + 1].push_back(l);
    }
    for (auto& a : t.adjacency) std::sort(a.begin(), a.end());
    t.degree.resize(n);
    for (int l = 0; l < n; ++l) t.degree[l] = static_cast<int>(t.adjacency[l].size());
    for (int m = 0; m < distance_kernels; ++m) {
        Mat d(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) d(a, b) = 0.35 * std::abs(a - b) * (m + 1);
        t.distance_matrices.push_back(d);
    }
    return t;
}

/// Model configuration for gradient and sampler toys.
inline ModelConfig toy_config(int n_d = 2, int n_c = 3, ModelVariant variant = ModelVariant::FullST,
                              int distance_kernels = 1) {
    ModelConfig cfg;
    cfg.num_diseases = n_d;
    cfg.num_cohorts = n_c;
    cfg.covariates = {Covariate::Intercept, Covariate::Sex, Covariate::Age};
    cfg.kernels = {{KernelKind::Partition, -1}, {KernelKind::Contiguity, -1}};
    for (int m = 0; m < distance_kernels; ++m) {
        cfg.kernels.push_back({KernelKind::Distance, m});
    }
    cfg.variant = variant;
    return cfg;
}

/// Simulated dataset for a given config/table (prior-drawn truth).
inline Dataset toy_dataset(const ModelConfig& cfg, const LocationTable& table,
                           int per_cell, std::uint64_t seed) {
    SimConfig sim;
    sim.num_locations = table.num_locations;
    sim.num_regions = table.num_regions;
    sim.num_cohorts = cfg.num_cohorts;
    sim.respondents_per_cell = per_cell;
    sim.num_distance_kernels = static_cast<int>(table.distance_matrices.size());
    Rng rng(seed);
    return gen_dataset(sim, cfg, table, nullptr, rng).dataset;
}

}  // namespace testsupport
