#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "mstlogit/config.hpp"
#include "mstlogit/model.hpp"
#include "mstlogit/rng.hpp"

namespace mstlogit {

/// Position/momentum pair with the cached density value and gradient.
struct PhasePoint {
    Vec q;
    Vec p;
    Vec grad;
    double logp = 0.0;
};

/// Leapfrog integrator under a diagonal inverse metric (posterior-variance
/// scaling). Exposed separately so reversibility and energy-scaling checks
/// can drive it directly.
struct Integrator {
    const LogDensityModel* target = nullptr;
    Vec inv_metric;

    PhasePoint make(Vec q, Vec p) const;
    void step(PhasePoint& z, double eps) const;
    double hamiltonian(const PhasePoint& z) const;
};

struct IterationStats {
    bool divergent = false;
    int treedepth = 0;
    int n_leapfrog = 0;
    double step_size = 0.0;
    double energy = 0.0;
    double accept_stat = 0.0;
};

struct ChainResult {
    Mat draws;      // sampling x dim
    Mat pointwise;  // sampling x n (empty when no hook is given)
    std::vector<IterationStats> stats;
    double step_size = 0.0;
    Vec inv_metric;
    int divergences = 0;  // over the sampling phase
};

struct ParameterDiagnostic {
    bool rhat_defined = false;
    double rhat = 0.0;
    bool ess_defined = false;
    double ess_bulk = 0.0;
};

struct DrawMatrix {
    std::vector<ChainResult> chains;
    std::vector<ParameterDiagnostic> diagnostics;  // per parameter
    int dim = 0;
    int sampling = 0;

    int num_chains() const { return static_cast<int>(chains.size()); }
    int total_draws() const { return num_chains() * sampling; }
    /// All chains stacked in chain order: (chains*sampling) x dim.
    Mat stacked() const;
    Mat stacked_pointwise() const;
};

/// One NUTS chain: multinomial sampling over the doubling trajectory,
/// dual-averaging step size, windowed diagonal-metric adaptation.
class NutsChain {
  public:
    NutsChain(const LogDensityModel& target, const SamplerConfig& config, Rng rng);

    /// Draws the starting point uniformly on [-init_range, init_range],
    /// retrying until the density is finite. Throws NonFiniteDensity after
    /// 100 failures.
    void init_random();
    /// Starts from a given point; throws NonFiniteDensity if not finite there.
    void init_at(const Vec& q0);

    IterationStats transition();

    /// Runs the warmup schedule: dual averaging throughout, expanding
    /// variance windows for the diagonal metric when warmup >= 150,
    /// step-size-only otherwise. Freezes adaptation afterwards.
    void adapt(int warmup_iterations);

    const Vec& position() const { return current_.q; }
    double step_size() const { return step_size_; }
    const Vec& inv_metric() const { return integrator_.inv_metric; }
    Rng& rng() { return rng_; }

  private:
    struct Subtree;
    Subtree build_tree(int depth, const PhasePoint& from, int direction, double h0);
    void find_initial_step_size();

    const LogDensityModel& target_;
    SamplerConfig config_;
    Rng rng_;
    Integrator integrator_;
    PhasePoint current_;
    double step_size_ = 1.0;
};

/// Runs all chains (optionally in parallel; MSTLOGIT_THREADS caps the worker
/// count), merges results in chain order, computes diagnostics, and throws
/// AllChainsDiverged when more than half of every chain's kept iterations
/// diverged. The optional hook is evaluated at every retained draw.
DrawMatrix run_sampler(const LogDensityModel& target, const SamplerConfig& config,
                       const std::function<Vec(const Vec&)>* draw_hook = nullptr);

/// Rank-normalized split R-hat and bulk effective sample size, following the
/// folded/split recipe with Geyer initial-monotone truncation. Throws
/// InsufficientDraws when a split sequence would hold fewer than 4 draws.
std::vector<ParameterDiagnostic> compute_diagnostics(const std::vector<Mat>& chain_draws);

}  // namespace mstlogit
