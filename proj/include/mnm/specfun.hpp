#pragma once

// Distribution functions used throughout the toolkit: standard normal,
// chi-square and the Beta(1, m) law of the minimum of m uniforms.
//
// All functions are pure and thread-safe.

#include <cstdint>

namespace mnm {

/// Positive integer degrees of freedom of a chi-square law.
class DegreesOfFreedom {
 public:
  explicit DegreesOfFreedom(std::int64_t k);
  std::int64_t value() const noexcept { return k_; }
  double half() const noexcept { return 0.5 * static_cast<double>(k_); }

 private:
  std::int64_t k_;
};

/// Probabilities that feed logarithms are clamped into this interval.
inline constexpr double kMinProbability = 1e-300;
inline constexpr double kMaxProbability = 1.0 - 1e-16;

/// Clamp into [kMinProbability, kMaxProbability]. Returns true through
/// `clamped` when the value was moved.
double clamp_probability(double p, bool* clamped = nullptr) noexcept;

double std_normal_pdf(double x) noexcept;

/// Phi(x). Throws DomainError for non-finite x.
double std_normal_cdf(double x);

/// 1 - Phi(x), accurate in the upper tail.
double std_normal_sf(double x);

/// Phi^{-1}(p) for 0 < p < 1. Throws InfiniteQuantileError at p in {0, 1}
/// and DomainError outside [0, 1].
double std_normal_quantile(double p);

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed directly
/// so that small upper tails keep their relative accuracy.
double gamma_q(double a, double x);

double chisq_pdf(double x, DegreesOfFreedom k);

/// F_{chi^2_k}(x). Throws DomainError for x < 0 or NaN.
double chisq_cdf(double x, DegreesOfFreedom k);

/// 1 - F_{chi^2_k}(x).
double chisq_sf(double x, DegreesOfFreedom k);

/// Smallest x with chisq_cdf(x, k) = p, for 0 <= p < 1. Throws
/// InfiniteQuantileError at p = 1.
double chisq_quantile(double p, DegreesOfFreedom k);

/// Upper-tail quantile: x with chisq_sf(x, k) = q, 0 < q <= 1. Used for
/// thresholds F^{-1}(1 - alpha) when alpha is tiny.
double chisq_quantile_upper(double q, DegreesOfFreedom k);

/// CDF of min(U_1..U_m) for iid uniforms: 1 - (1 - x)^m.
double tippett_cdf(double x, std::int64_t m);

}  // namespace mnm
