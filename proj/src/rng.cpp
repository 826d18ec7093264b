#include "mstlogit/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace mstlogit {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Rng Rng::stream(std::uint64_t root_seed, std::uint64_t stream_index) {
    return Rng(splitmix64(root_seed ^ splitmix64(stream_index + 1)));
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform_pos() {
    double u;
    do {
        u = uniform();
    } while (u <= 0.0);
    return u;
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
    // rejection from the top to avoid modulo bias
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
        v = engine_();
    } while (v >= limit);
    return v % n;
}

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

double Rng::gamma(double shape, double rate) {
    if (shape <= 0.0 || rate <= 0.0) {
        throw std::invalid_argument("gamma: shape and rate must be positive");
    }
    if (shape < 1.0) {
        const double boost = std::pow(uniform_pos(), 1.0 / shape);
        return gamma(shape + 1.0, rate) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform_pos();
        if (u < 1.0 - 0.0331 * x * x * x * x) {
            return d * v / rate;
        }
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
            return d * v / rate;
        }
    }
}

double Rng::beta(double a, double b) {
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    return x / (x + y);
}

double Rng::exponential(double rate) {
    return -std::log(uniform_pos()) / rate;
}

std::vector<double> Rng::dirichlet_symmetric(double concentration, int dim) {
    std::vector<double> w(dim);
    double total = 0.0;
    for (int i = 0; i < dim; ++i) {
        w[i] = gamma(concentration, 1.0);
        total += w[i];
    }
    for (auto& v : w) {
        v /= total;
    }
    return w;
}

}  // namespace mstlogit
