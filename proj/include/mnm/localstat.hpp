#pragma once

// Per-trial statistics S^(j) = f_j(X^(j), U^(j)).

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mnm/model.hpp"
#include "mnm/rng.hpp"
#include "mnm/specfun.hpp"

namespace mnm {

enum class StatisticKind { raw, pvalue, evalue };

struct StatisticVector {
  std::vector<double> values;
  StatisticKind kind = StatisticKind::raw;
  /// Empty for purely local randomness; otherwise an identifier of the shared
  /// object (e.g. the Haar matrix's stream path).
  std::string shared_randomness;

  std::size_t size() const noexcept { return values.size(); }
};

/// Round-robin assignment of trials to coordinates: trial j (0-based) goes to
/// coordinate j mod d. Block sizes differ by at most one.
class Partition {
 public:
  int m() const noexcept { return static_cast<int>(assignment_.size()); }
  int d() const noexcept { return static_cast<int>(block_sizes_.size()); }
  int coordinate(int trial) const { return assignment_.at(trial); }
  const std::vector<int>& block_sizes() const noexcept { return block_sizes_; }
  bool balanced() const noexcept;

 private:
  friend Partition make_partition(int m, int d);
  std::vector<int> assignment_;
  std::vector<int> block_sizes_;
};

/// Throws UnsupportedRegimeError when m < d.
Partition make_partition(int m, int d);

/// n ||X^(j)||^2.
StatisticVector chisq_norm_stats(const TrialSet& trials);

/// 1 - F_{chi^2_d}(S^(j)). Input must be raw chi-square norms.
StatisticVector chisq_pvalues(const StatisticVector& stats, DegreesOfFreedom d);

/// sqrt(n) X^(j)_{part(j)}.
StatisticVector directional_stats(const TrialSet& trials, const Partition& part);

/// (sqrt(n) U X^(j))_1, tagged with `shared_id`.
StatisticVector projected_stats(const TrialSet& trials, const OrthogonalMatrix& u,
                                std::string shared_id = "haar");

/// Value above which likelihood-ratio e-values are clamped.
inline constexpr double kMaxEvalue = 1e300;

/// exp(n <g, X^(j)> - n ||g||^2 / 2). Entries above kMaxEvalue are clamped and
/// counted in `*overflow_count` when provided.
StatisticVector lr_evalues(const TrialSet& trials, const Eigen::VectorXd& g,
                           std::uint64_t* overflow_count = nullptr);

/// Logarithms of lr_evalues, which never overflow.
StatisticVector lr_log_evalues(const TrialSet& trials, const Eigen::VectorXd& g);

}  // namespace mnm
