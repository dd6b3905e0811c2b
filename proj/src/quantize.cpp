#include "mnm/quantize.hpp"

#include <cmath>
#include <string>

#include "mnm/error.hpp"

namespace mnm {

namespace {

std::uint8_t digit_at(double v, int shift) {
  const double scaled = std::ldexp(v, shift);
  if (std::isinf(scaled)) return 0;
  return static_cast<std::uint8_t>(std::fmod(std::floor(scaled), 2.0));
}

}  // namespace

double BinaryApproximation::reconstruct() const {
  double v = 0.0;
  const int k = static_cast<int>(integer_digits.size()) - 1;
  for (int i = 0; i <= k; ++i) {
    if (integer_digits[i] != 0) v += std::ldexp(1.0, k - i);
  }
  for (std::size_t i = 0; i < fractional_digits.size(); ++i) {
    if (fractional_digits[i] != 0) v += std::ldexp(1.0, -static_cast<int>(i) - 1);
  }
  return negative ? -v : v;
}

int integer_exponent(double x) {
  if (!std::isfinite(x)) throw DomainError("integer_exponent: x must be finite");
  const double a = std::fabs(x);
  int k = 0;
  while (std::ldexp(1.0, k + 1) - 1.0 <= a) ++k;
  return k;
}

BinaryApproximation binary_expand(double x, int bits) {
  const int k = integer_exponent(x);
  if (bits < k + 2) {
    throw InsufficientBitsError("binary_expand: need at least " +
                                std::to_string(k + 2) + " bits, got " +
                                std::to_string(bits));
  }
  const int frac = bits - k - 2;
  const double a = std::fabs(x);

  double value = a;
  const double scaled = std::ldexp(a, frac);
  if (!std::isinf(scaled)) {
    const double down = std::ldexp(std::floor(scaled), -frac);
    const double up = down + std::ldexp(1.0, -frac);
    value = (up - a < a - down) ? up : down;
  }

  BinaryApproximation out;
  out.value = (x < 0.0 && value != 0.0) ? -value : value;
  out.bits_used = bits;
  out.integer_exponent = k;
  out.negative = std::signbit(x) && value != 0.0;
  out.integer_digits.resize(k + 1);
  for (int i = 0; i <= k; ++i) out.integer_digits[i] = digit_at(value, -(k - i));
  out.fractional_digits.resize(frac);
  for (int i = 0; i < frac; ++i) out.fractional_digits[i] = digit_at(value, i + 1);
  return out;
}

double expansion_error_bound(double x, int bits) {
  return std::ldexp(1.0, -(bits - integer_exponent(x) - 2));
}

int bits_for_accuracy(double x, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw DomainError("bits_for_accuracy: eps must lie in (0, 1)");
  }
  const int k = integer_exponent(x);
  for (int b = k + 2;; ++b) {
    if (std::fabs(x - binary_expand(x, b).value) <= eps) return b;
  }
}

}  // namespace mnm
