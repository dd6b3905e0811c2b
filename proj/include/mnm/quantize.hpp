#pragma once

// B-bit binary-expansion codec.
//
// x = sign(x) (sum_{i=0}^{k} 2^i a_i + sum_{i>=1} 2^{-i} b_i), with k = k_x the
// largest integer >= 0 such that 2^k - 1 <= |x|. A B-bit code spends one bit
// on the sign, k + 1 on the integer digits and F = B - k - 2 on fractional
// digits. Of the two F-digit candidates bracketing |x| (truncation and
// truncation + 2^{-F}) the closer one is kept, ties going to truncation, so
//   |x - x_B| <= 2^{-(F+1)} <= 2^{-(B - k - 2)}.

#include <cstdint>
#include <vector>

namespace mnm {

struct BinaryApproximation {
  double value = 0.0;  // reconstructed x_B
  int bits_used = 0;   // B
  int integer_exponent = 0;  // k
  bool negative = false;
  std::vector<std::uint8_t> integer_digits;     // a_k, ..., a_0
  std::vector<std::uint8_t> fractional_digits;  // b_1, ..., b_F

  /// Value recomputed from the stored digits.
  double reconstruct() const;
};

/// k_x; 0 for |x| < 1.
int integer_exponent(double x);

/// Throws DomainError for non-finite x and InsufficientBitsError for
/// B < k_x + 2.
BinaryApproximation binary_expand(double x, int bits);

/// 2^{-(B - k_x - 2)}.
double expansion_error_bound(double x, int bits);

/// Minimal B with |x - binary_expand(x, B).value| <= eps, 0 < eps < 1.
int bits_for_accuracy(double x, double eps);

}  // namespace mnm
