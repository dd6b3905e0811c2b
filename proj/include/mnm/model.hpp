#pragma once

// Many normal means model: each of m trials observes
//   X^(j) = f + Z^(j) / sqrt(n),   Z^(j) ~ N(0, I_d) iid,
// and the meta-analysis tests f = 0 against ||f||_2 >= rho.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mnm/rng.hpp"

namespace mnm {

enum class SignalLaw {
  null,               // f = 0
  fixed,              // user-supplied f with ||f|| = rho
  rademacher_scaled,  // f_i = rho R_i / sqrt(d), fresh per replicate
  first_axis,         // f = rho e_1, worst case for coordinate partitions
};

std::string_view to_string(SignalLaw law);
/// Throws ConfigError for unknown names.
SignalLaw parse_signal_law(std::string_view name);

struct Scenario {
  int d = 1;
  int n = 1;
  int m = 1;
  double rho = 0.0;
  SignalLaw law = SignalLaw::rademacher_scaled;
  std::vector<double> fixed_signal;  // used when law == fixed

  /// Throws ConfigError when dimensions are non-positive, rho is negative or
  /// non-finite, a null law carries rho != 0, or a fixed f has the wrong
  /// length or a norm differing from rho by more than 1e-12.
  void validate() const;

  /// Same (d, n, m) with f = 0.
  Scenario null_counterpart() const;

  bool operator==(const Scenario&) const = default;
};

struct Signal {
  Eigen::VectorXd f;
};

using TrialMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Where a TrialSet's randomness came from; equal provenance means equal data.
struct Provenance {
  std::uint64_t seed = 0;
  std::string stream_path;

  bool operator==(const Provenance&) const = default;
};

struct TrialSet {
  TrialMatrix x;  // m x d; row j is X^(j)
  Scenario scenario;
  Provenance provenance;

  int m() const noexcept { return static_cast<int>(x.rows()); }
  int d() const noexcept { return static_cast<int>(x.cols()); }
  int n() const noexcept { return scenario.n; }
};

Signal draw_signal(const Scenario& scenario, RandomStream& stream);

/// Row j = f + z_j / sqrt(n), z_j drawn from `stream` in row order.
TrialSet gen_trials(const Signal& signal, const Scenario& scenario,
                    RandomStream& stream);

}  // namespace mnm
