#include "mnm/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace mnm {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
  constexpr std::uint64_t m0 = 0xD2511F53u;
  constexpr std::uint64_t m1 = 0xCD9E8D57u;
  constexpr std::uint32_t w0 = 0x9E3779B9u;
  constexpr std::uint32_t w1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += w0;
      key[1] += w1;
    }
    const std::uint64_t p0 = m0 * ctr[0];
    const std::uint64_t p1 = m1 * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
           static_cast<std::uint32_t>(p0)};
  }
  return ctr;
}

RandomStream::RandomStream(std::uint64_t seed)
    : RandomStream(seed, mix64(seed + 0x9e3779b97f4a7c15ull), {}) {}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t key,
                           std::vector<std::string> path)
    : seed_(seed), key_(key), path_(std::move(path)) {}

RandomStream RandomStream::derive(std::string_view label) const {
  if (label.empty()) throw std::invalid_argument("derive: empty label");
  const std::uint64_t child =
      mix64(key_ ^ mix64(fnv1a(label) + 0x9e3779b97f4a7c15ull));
  std::vector<std::string> path = path_;
  path.emplace_back(label);
  return RandomStream(seed_, child, std::move(path));
}

std::string RandomStream::path_string() const {
  std::string out;
  for (const auto& p : path_) {
    if (!out.empty()) out += '/';
    out += p;
  }
  return out;
}

void RandomStream::refill() {
  const auto out = philox4x32_10(
      {static_cast<std::uint32_t>(counter_),
       static_cast<std::uint32_t>(counter_ >> 32), 0u, 0u},
      {static_cast<std::uint32_t>(key_), static_cast<std::uint32_t>(key_ >> 32)});
  ++counter_;
  block_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  block_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  block_pos_ = 0;
}

RandomStream::result_type RandomStream::operator()() {
  if (block_pos_ >= 2) refill();
  return block_[block_pos_++];
}

double RandomStream::uniform() {
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double radius = std::sqrt(-2.0 * std::log(uniform()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

int RandomStream::rademacher() { return ((*this)() >> 63) != 0 ? 1 : -1; }

RandomStream derive_stream(const RandomStream& parent, std::string_view label) {
  return parent.derive(label);
}

Eigen::VectorXd sample_gaussian_vector(int d, RandomStream& stream) {
  if (d < 1) throw std::invalid_argument("sample_gaussian_vector: d < 1");
  Eigen::VectorXd z(d);
  for (int i = 0; i < d; ++i) z[i] = stream.gaussian();
  return z;
}

int sample_rademacher(RandomStream& stream) { return stream.rademacher(); }

OrthogonalMatrix::OrthogonalMatrix(Eigen::MatrixXd entries, double tol)
    : u_(std::move(entries)) {
  if (u_.rows() != u_.cols() || u_.rows() < 1) {
    throw std::invalid_argument("OrthogonalMatrix: matrix must be square");
  }
  const Eigen::MatrixXd gram = u_.transpose() * u_;
  const Eigen::MatrixXd err =
      gram - Eigen::MatrixXd::Identity(u_.rows(), u_.cols());
  if (err.cwiseAbs().maxCoeff() > tol) {
    throw std::invalid_argument("OrthogonalMatrix: U^T U differs from I");
  }
}

OrthogonalMatrix OrthogonalMatrix::identity(int d) {
  return OrthogonalMatrix(Eigen::MatrixXd::Identity(d, d));
}

OrthogonalMatrix sample_haar_orthogonal(int d, RandomStream& stream) {
  if (d < 1) throw std::invalid_argument("sample_haar_orthogonal: d < 1");
  Eigen::MatrixXd g(d, d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) g(i, j) = stream.gaussian();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (int j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return OrthogonalMatrix(std::move(q));
}

}  // namespace mnm
