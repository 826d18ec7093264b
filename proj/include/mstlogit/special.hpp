#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mstlogit {

/// log(1 + exp(x)) without overflow or cancellation (Maechler's branches).
template <typename Real>
Real log1pexp(Real x) {
    if (x <= Real(-37)) return std::exp(x);
    if (x <= Real(18)) return std::log1p(std::exp(x));
    if (x <= Real(33.3)) return x + std::exp(-x);
    return x;
}

/// Stable inverse logit; result in (0, 1), saturating in the tails.
template <typename Real>
Real inverse_logit(Real x) {
    if (x >= Real(0)) {
        return Real(1) / (Real(1) + std::exp(-x));
    }
    const Real e = std::exp(x);
    return e / (Real(1) + e);
}

template <typename Real>
Real logit(Real p) {
    return std::log(p) - std::log1p(-p);
}

double log_sum_exp(std::span<const double> v);

inline double log_add_exp(double a, double b) {
    if (a == -INFINITY) return b;
    if (b == -INFINITY) return a;
    const double m = a > b ? a : b;
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

/// Fixed-order pairwise summation; deterministic and accurate for long sums.
double pairwise_sum(std::span<const double> v);

/// Neumaier compensated sum; used where a single rounding-tight total matters.
double compensated_sum(std::span<const double> v);

/// Digamma via upward recurrence into the asymptotic series.
double digamma(double x);

/// Inverse standard normal CDF (Acklam's rational approximation with one
/// Halley refinement; relative error below 1e-13 on (0,1)).
double inverse_normal_cdf(double p);

/// FNV-1a 64-bit over raw bytes; digest for manifests and idempotence checks.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes);
std::uint64_t fnv1a64(const std::string& s);

/// Hex string of a 64-bit digest.
std::string digest_hex(std::uint64_t d);

/// Canonical shortest round-trip decimal rendering of a double.
std::string format_double(double v);

/// Type-7 (linear interpolation) quantile of a sample; sorts a copy.
double quantile(std::vector<double> v, double p);

}  // namespace mstlogit
