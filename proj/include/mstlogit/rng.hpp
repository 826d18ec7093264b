#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace mstlogit {

/// Deterministic random number source.
///
/// The engine is std::mt19937_64 and every distribution is generated by a
/// fixed, explicitly coded algorithm (53-bit uniforms, Box-Muller normals,
/// Marsaglia-Tsang gammas), so streams are reproducible across standard
/// library implementations. The algorithm identifier below is recorded in
/// run manifests.
class Rng {
  public:
    static constexpr const char* kAlgorithm = "mt19937_64/u53/box-muller/marsaglia-tsang";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Derives an independent stream for a worker (chain, cell, ...) from a
    /// root seed. SplitMix64 applied to seed XOR a stream tag.
    static Rng stream(std::uint64_t root_seed, std::uint64_t stream_index);

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();

    /// Uniform on (0, 1); never returns an endpoint.
    double uniform_pos();

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n);

    /// Standard normal via Box-Muller (pairs cached).
    double normal();

    double normal(double mean, double sd) { return mean + sd * normal(); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Gamma(shape, rate) by Marsaglia-Tsang squeeze; shape < 1 handled by
    /// the boost relation Ga(a) = Ga(a+1) * U^{1/a}.
    double gamma(double shape, double rate);

    double beta(double a, double b);

    double exponential(double rate = 1.0) ;

    /// Dirichlet with a common concentration, via normalized gammas.
    std::vector<double> dirichlet_symmetric(double concentration, int dim);

    std::uint64_t raw() { return engine_(); }

  private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// SplitMix64 finalizer; used for seed derivation and cheap hashing.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace mstlogit
