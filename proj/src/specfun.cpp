#include "mnm/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mnm/error.hpp"

namespace mnm {

namespace {

constexpr double kLnSqrt2Pi = 0.918938533204672741780329736406;

void require_finite(double x, const char* fn) {
  if (!std::isfinite(x)) {
    throw DomainError(std::string(fn) + ": argument must be finite");
  }
}

void require_probability(double p, const char* fn) {
  if (std::isnan(p) || p < 0.0 || p > 1.0) {
    throw DomainError(std::string(fn) + ": probability outside [0, 1]");
  }
}

// Error of Stirling's approximation: lgamma(a + 1) - [(a + 1/2) log a - a +
// log sqrt(2 pi)]. Series for large a (Loader 2000), direct otherwise.
double stirling_error(double a) {
  constexpr double s0 = 1.0 / 12.0;
  constexpr double s1 = 1.0 / 360.0;
  constexpr double s2 = 1.0 / 1260.0;
  constexpr double s3 = 1.0 / 1680.0;
  constexpr double s4 = 1.0 / 1188.0;
  if (a > 15.0) {
    const double a2 = a * a;
    if (a > 500.0) return (s0 - s1 / a2) / a;
    if (a > 80.0) return (s0 - (s1 - s2 / a2) / a2) / a;
    if (a > 35.0) return (s0 - (s1 - (s2 - s3 / a2) / a2) / a2) / a;
    return (s0 - (s1 - (s2 - (s3 - s4 / a2) / a2) / a2) / a2) / a;
  }
  return std::lgamma(a + 1.0) - (a + 0.5) * std::log(a) + a - kLnSqrt2Pi;
}

// Deviance term a log(a / x) + x - a, evaluated without cancellation when
// a and x are close.
double deviance(double a, double x) {
  if (std::fabs(a - x) < 0.1 * (a + x)) {
    const double v = (a - x) / (a + x);
    double s = (a - x) * v;
    double ej = 2.0 * a * v;
    const double v2 = v * v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v2;
      const double s1 = s + ej / (2 * j + 1);
      if (s1 == s) return s1;
      s = s1;
    }
    return s;
  }
  return a * std::log(a / x) + x - a;
}

// x^a e^{-x} / Gamma(a + 1) for a > -1, x >= 0.
double gamma_prefix(double a, double x) {
  if (x == 0.0) {
    if (a > 0.0) return 0.0;
    if (a == 0.0) return 1.0;
    return std::numeric_limits<double>::infinity();
  }
  if (a < 10.0) {
    return std::exp(a * std::log(x) - x - std::lgamma(a + 1.0));
  }
  return std::exp(-stirling_error(a) - deviance(a, x)) /
         std::sqrt(2.0 * std::numbers::pi * a);
}

// P(a, x) by the power series; valid and fast for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0;
  double sum = 1.0;
  for (int n = 1; n < 10'000'000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return gamma_prefix(a, x) * sum;
}

// Q(a, x) by the Legendre continued fraction (modified Lentz); x >= a + 1.
double gamma_q_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10'000'000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return gamma_prefix(a, x) * a * h;
}

void require_gamma_args(double a, double x, const char* fn) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw DomainError(std::string(fn) + ": shape must be positive");
  }
  if (std::isnan(x) || x < 0.0) {
    throw DomainError(std::string(fn) + ": argument must be >= 0");
  }
}

// Monotone root search for increasing `f` with f(lo) <= 0 <= f(hi):
// Newton steps from `x`, falling back to bisection when a step leaves the
// bracket.
template <class Residual, class Slope>
double bracketed_newton(Residual f, Slope slope, double lo, double hi,
                        double x, double tol) {
  for (int iter = 0; iter < 4000; ++iter) {
    const double r = f(x);
    if (r == 0.0 || std::fabs(r) < tol) return x;
    if (r < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      return 0.5 * (lo + hi);
    }
    const double s = slope(x);
    double next = (s > 0.0 && std::isfinite(s)) ? x - r / s : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  return x;
}

double wilson_hilferty(double z, double k) {
  const double c = 2.0 / (9.0 * k);
  const double t = 1.0 - c + z * std::sqrt(c);
  return std::max(k * t * t * t, 1e-3);
}

}  // namespace

DegreesOfFreedom::DegreesOfFreedom(std::int64_t k) : k_(k) {
  if (k < 1) throw DomainError("degrees of freedom must be >= 1");
}

double clamp_probability(double p, bool* clamped) noexcept {
  const double c = std::clamp(p, kMinProbability, kMaxProbability);
  if (clamped != nullptr) *clamped = (c != p);
  return c;
}

double std_normal_pdf(double x) noexcept {
  return std::exp(-0.5 * x * x - kLnSqrt2Pi);
}

double std_normal_cdf(double x) {
  require_finite(x, "std_normal_cdf");
  return 0.5 * std::erfc(-x * (0.5 * std::numbers::sqrt2));
}

double std_normal_sf(double x) {
  require_finite(x, "std_normal_sf");
  return 0.5 * std::erfc(x * (0.5 * std::numbers::sqrt2));
}

// Wichura's AS 241 (PPND16), followed by one Newton correction.
double std_normal_quantile(double p) {
  require_probability(p, "std_normal_quantile");
  if (p == 0.0 || p == 1.0) {
    throw InfiniteQuantileError("std_normal_quantile: p must be in (0, 1)");
  }
  const double q = p - 0.5;
  double x;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    x = q *
        (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r +
              67265.770927008700853) * r + 45921.953931549871457) * r +
            13731.693765509461125) * r + 1971.5909503065514427) * r +
          133.14166789178437745) * r + 3.387132872796366608) /
        (((((((r * 5226.495278852545925 + 28729.085735721942674) * r +
              39307.89580009271061) * r + 21213.794301586595867) * r +
            5394.1960214247511077) * r + 687.1870074920579083) * r +
          42.313330701600911252) * r + 1.0);
  } else {
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    if (r <= 5.0) {
      r -= 1.6;
      x = (((((((r * 7.7454501427834140764e-4 + .0227238449892691845833) * r +
                .24178072517745061177) * r + 1.27045825245236838258) * r +
              3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r +
                .0151986665636164571966) * r + .14810397642748007459) * r +
              .68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
    } else {
      r -= 5.0;
      x = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r +
                .0012426609473880784386) * r + .026532189526576123093) * r +
              .29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r +
                1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
              .0148753612908506148525) * r + .13692988092273580531) * r +
            .59983220655588793769) * r + 1.0);
    }
    if (q < 0.0) x = -x;
  }
  const double dens = std_normal_pdf(x);
  if (dens > 0.0) {
    const double resid = p < 0.5 ? std_normal_cdf(x) - p
                                 : (1.0 - p) - std_normal_sf(x);
    x -= resid / dens;
  }
  return x;
}

double gamma_p(double a, double x) {
  require_gamma_args(a, x, "gamma_p");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return std::min(1.0, gamma_p_series(a, x));
  return std::clamp(1.0 - gamma_q_fraction(a, x), 0.0, 1.0);
}

double gamma_q(double a, double x) {
  require_gamma_args(a, x, "gamma_q");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return std::clamp(1.0 - gamma_p_series(a, x), 0.0, 1.0);
  return std::min(1.0, gamma_q_fraction(a, x));
}

double chisq_pdf(double x, DegreesOfFreedom k) {
  if (std::isnan(x)) throw DomainError("chisq_pdf: NaN argument");
  if (x < 0.0) return 0.0;
  return 0.5 * gamma_prefix(k.half() - 1.0, 0.5 * x);
}

double chisq_cdf(double x, DegreesOfFreedom k) {
  if (std::isnan(x) || x < 0.0) {
    throw DomainError("chisq_cdf: argument must be >= 0");
  }
  return gamma_p(k.half(), 0.5 * x);
}

double chisq_sf(double x, DegreesOfFreedom k) {
  if (std::isnan(x) || x < 0.0) {
    throw DomainError("chisq_sf: argument must be >= 0");
  }
  return gamma_q(k.half(), 0.5 * x);
}

double chisq_quantile(double p, DegreesOfFreedom k) {
  require_probability(p, "chisq_quantile");
  if (p == 1.0) throw InfiniteQuantileError("chisq_quantile: p = 1");
  if (p == 0.0) return 0.0;
  if (p > 0.5) return chisq_quantile_upper(1.0 - p, k);

  const double kk = static_cast<double>(k.value());
  double x = wilson_hilferty(std_normal_quantile(p), kk);
  double hi = x;
  while (chisq_cdf(hi, k) < p) hi *= 2.0;
  return bracketed_newton([&](double t) { return chisq_cdf(t, k) - p; },
                          [&](double t) { return chisq_pdf(t, k); }, 0.0, hi,
                          std::min(x, hi), 1e-15 * p);
}

double chisq_quantile_upper(double q, DegreesOfFreedom k) {
  require_probability(q, "chisq_quantile_upper");
  if (q == 0.0) throw InfiniteQuantileError("chisq_quantile_upper: q = 0");
  if (q == 1.0) return 0.0;
  if (q > 0.5) return chisq_quantile(1.0 - q, k);

  const double kk = static_cast<double>(k.value());
  double x = wilson_hilferty(std_normal_quantile(1.0 - q), kk);
  double hi = x;
  while (chisq_sf(hi, k) > q) hi *= 2.0;
  return bracketed_newton([&](double t) { return q - chisq_sf(t, k); },
                          [&](double t) { return chisq_pdf(t, k); }, 0.0, hi,
                          std::min(x, hi), 1e-15 * q);
}

double tippett_cdf(double x, std::int64_t m) {
  require_probability(x, "tippett_cdf");
  if (m < 1) throw DomainError("tippett_cdf: m must be >= 1");
  if (x == 1.0) return 1.0;
  return -std::expm1(static_cast<double>(m) * std::log1p(-x));
}

}  // namespace mnm
