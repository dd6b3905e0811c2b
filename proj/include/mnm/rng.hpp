#pragma once

// Splittable counter-based randomness.
//
// A RandomStream is a value: (root seed, label path, key, counter). Output
// block i of a stream is Philox4x32-10(key, i), so the sequence depends only
// on the key, and the key depends only on the root seed and the label path.
// Children are derived by hashing a label into the parent's key. Monte Carlo
// replicate r uses derive(root, "rep:<r>") regardless of which worker runs
// it, which makes results independent of the worker count.

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mnm {

class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed);

  /// Child stream for `label`. Equal (seed, path) give equal streams.
  RandomStream derive(std::string_view label) const;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t key() const noexcept { return key_; }
  const std::vector<std::string>& path() const noexcept { return path_; }
  /// Path joined with '/', e.g. "rep:17/trial:3".
  std::string path_string() const;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()();

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  /// Standard normal (Box-Muller; the second variate of a pair is cached).
  double gaussian();
  /// +1 or -1 with probability 1/2 each.
  int rademacher();

 private:
  RandomStream(std::uint64_t seed, std::uint64_t key,
               std::vector<std::string> path);
  void refill();

  std::uint64_t seed_;
  std::uint64_t key_;
  std::vector<std::string> path_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> block_{};
  int block_pos_ = 2;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Philox4x32 with 10 rounds; exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key);

/// Free-function spelling of RandomStream::derive. Throws
/// std::invalid_argument for an empty label.
RandomStream derive_stream(const RandomStream& parent, std::string_view label);

Eigen::VectorXd sample_gaussian_vector(int d, RandomStream& stream);

int sample_rademacher(RandomStream& stream);

/// d x d matrix with orthonormal columns.
class OrthogonalMatrix {
 public:
  /// Checks U^T U = I within `tol` per entry; throws std::invalid_argument.
  explicit OrthogonalMatrix(Eigen::MatrixXd entries, double tol = 1e-10);

  const Eigen::MatrixXd& matrix() const noexcept { return u_; }
  int dim() const noexcept { return static_cast<int>(u_.rows()); }
  static OrthogonalMatrix identity(int d);

 private:
  Eigen::MatrixXd u_;
};

/// Haar-distributed orthogonal matrix: Gaussian matrix, Householder QR, then
/// columns of Q flipped so the triangular factor has a positive diagonal.
OrthogonalMatrix sample_haar_orthogonal(int d, RandomStream& stream);

}  // namespace mnm
