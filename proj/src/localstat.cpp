#include "mnm/localstat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mnm/error.hpp"
#include "mnm/specfun.hpp"

namespace mnm {

bool Partition::balanced() const noexcept {
  return std::all_of(block_sizes_.begin(), block_sizes_.end(),
                     [&](int s) { return s == block_sizes_.front(); });
}

Partition make_partition(int m, int d) {
  if (d < 1 || m < 1) throw std::invalid_argument("make_partition: m, d >= 1");
  if (m < d) {
    throw UnsupportedRegimeError("coordinate partition requires m >= d (m = " +
                                 std::to_string(m) + ", d = " +
                                 std::to_string(d) + ")");
  }
  Partition p;
  p.assignment_.resize(m);
  p.block_sizes_.assign(d, 0);
  for (int j = 0; j < m; ++j) {
    p.assignment_[j] = j % d;
    ++p.block_sizes_[j % d];
  }
  return p;
}

StatisticVector chisq_norm_stats(const TrialSet& trials) {
  StatisticVector s;
  s.values.resize(trials.m());
  const double n = trials.n();
  for (int j = 0; j < trials.m(); ++j) {
    s.values[j] = n * trials.x.row(j).squaredNorm();
  }
  return s;
}

StatisticVector chisq_pvalues(const StatisticVector& stats, DegreesOfFreedom d) {
  if (stats.kind != StatisticKind::raw) {
    throw std::invalid_argument("chisq_pvalues: expected raw chi-square norms");
  }
  StatisticVector p;
  p.kind = StatisticKind::pvalue;
  p.shared_randomness = stats.shared_randomness;
  p.values.resize(stats.size());
  std::transform(stats.values.begin(), stats.values.end(), p.values.begin(),
                 [&](double s) { return chisq_sf(s, d); });
  return p;
}

StatisticVector directional_stats(const TrialSet& trials, const Partition& part) {
  if (part.m() != trials.m() || part.d() != trials.d()) {
    throw std::invalid_argument("directional_stats: partition does not match");
  }
  StatisticVector s;
  s.values.resize(trials.m());
  const double root_n = std::sqrt(static_cast<double>(trials.n()));
  for (int j = 0; j < trials.m(); ++j) {
    s.values[j] = root_n * trials.x(j, part.coordinate(j));
  }
  return s;
}

StatisticVector projected_stats(const TrialSet& trials, const OrthogonalMatrix& u,
                                std::string shared_id) {
  if (u.dim() != trials.d()) {
    throw std::invalid_argument("projected_stats: U has wrong dimension");
  }
  StatisticVector s;
  s.shared_randomness = std::move(shared_id);
  s.values.resize(trials.m());
  const double root_n = std::sqrt(static_cast<double>(trials.n()));
  const Eigen::RowVectorXd first_row = u.matrix().row(0);
  for (int j = 0; j < trials.m(); ++j) {
    s.values[j] = root_n * first_row.dot(trials.x.row(j));
  }
  return s;
}

StatisticVector lr_log_evalues(const TrialSet& trials, const Eigen::VectorXd& g) {
  if (g.size() != trials.d()) {
    throw std::invalid_argument("lr_evalues: g must have length d");
  }
  StatisticVector s;
  s.values.resize(trials.m());
  const double n = trials.n();
  const double half_energy = 0.5 * n * g.squaredNorm();
  for (int j = 0; j < trials.m(); ++j) {
    s.values[j] = n * trials.x.row(j).dot(g) - half_energy;
  }
  return s;
}

StatisticVector lr_evalues(const TrialSet& trials, const Eigen::VectorXd& g,
                           std::uint64_t* overflow_count) {
  StatisticVector s = lr_log_evalues(trials, g);
  s.kind = StatisticKind::evalue;
  const double log_max = std::log(kMaxEvalue);
  for (double& v : s.values) {
    if (v > log_max) {
      v = kMaxEvalue;
      if (overflow_count != nullptr) ++*overflow_count;
    } else {
      v = std::exp(v);
    }
  }
  return s;
}

}  // namespace mnm
