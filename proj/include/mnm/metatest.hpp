#pragma once

// Meta-level decision rules T_alpha = 1{ C_m(S) >= kappa_alpha }.
//
// Every test is oriented so that larger statistics are stronger evidence
// against the null; two-sided tests use an absolute-value statistic. The
// threshold map alpha -> kappa_alpha is either analytic (known null law) or a
// Monte Carlo calibration table. Analytic tests reject on `>=`, calibrated
// ones on `>` so that a constant statistic never rejects.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "mnm/combine.hpp"
#include "mnm/localstat.hpp"
#include "mnm/model.hpp"
#include "mnm/rng.hpp"

namespace mnm {

/// One replicate's data with lazily computed local statistics shared by all
/// tests evaluated on it. Not thread-safe; one instance per worker.
class Evidence {
 public:
  Evidence(const TrialSet& trials, RandomStream shared);

  const TrialSet& trials() const noexcept { return *trials_; }
  const std::vector<double>& chisq_stats();
  const std::vector<double>& chisq_pvalues();
  /// Haar matrix drawn from the replicate's shared stream.
  const OrthogonalMatrix& shared_rotation();
  Diagnostics& diagnostics() noexcept { return diag_; }

 private:
  const TrialSet* trials_;
  RandomStream shared_;
  std::optional<std::vector<double>> chisq_;
  std::optional<std::vector<double>> pvalues_;
  std::optional<OrthogonalMatrix> rotation_;
  Diagnostics diag_;
};

using StatisticFn = std::function<double(Evidence&)>;

enum class Sides { one, two };

struct CalibrationTable {
  std::vector<double> alphas;  // strictly increasing, in (0, 1)
  std::vector<double> kappas;  // nonincreasing
  std::uint64_t reps = 0;
  std::uint64_t seed = 0;
  std::string stream_path;
  std::vector<std::string> warnings;

  /// kappa at a grid alpha (matched within 1e-9); throws std::out_of_range
  /// for alphas not on the grid.
  double kappa(double alpha) const;
  bool strictly_decreasing() const;
};

struct AnalyticThreshold {
  std::string formula;
  std::function<double(double)> kappa;
};

using ThresholdMap = std::variant<AnalyticThreshold, CalibrationTable>;

class MetaTest {
 public:
  MetaTest(std::string name, StatisticFn statistic, ThresholdMap threshold,
           Sides sides, bool exact_level);

  /// Placeholder for a test that is undefined in this regime (e.g. m < d for
  /// coordinate partitions). Never rejects.
  static MetaTest unsupported(std::string name, std::string reason);

  const std::string& name() const noexcept { return name_; }
  bool supported() const noexcept { return supported_; }
  const std::string& unsupported_reason() const noexcept { return reason_; }
  Sides sides() const noexcept { return sides_; }
  /// True when P0(reject) = alpha exactly (analytic null law) or up to
  /// calibration error; false for conservative rules (Markov, union bound).
  bool exact_level() const noexcept { return exact_level_; }
  bool calibrated() const noexcept;
  const ThresholdMap& threshold_map() const noexcept { return threshold_; }

  double statistic(Evidence& ev) const;
  double kappa(double alpha) const;
  bool rejects(double statistic, double kappa) const noexcept;
  bool decide(Evidence& ev, double alpha) const;

 private:
  std::string name_;
  StatisticFn statistic_;
  ThresholdMap threshold_;
  Sides sides_ = Sides::one;
  bool exact_level_ = false;
  bool supported_ = true;
  std::string reason_;
};

/// Empirical (1 - alpha)-quantiles of `statistic` over `reps` null
/// replicates. Replicate i uses stream.derive("rep:<i>"). Warns when
/// alpha * reps < 20. Throws std::invalid_argument for reps < 1000 or alphas
/// outside (0, 1) or not strictly increasing.
CalibrationTable calibrate_threshold(const StatisticFn& statistic,
                                     const Scenario& scenario,
                                     std::span<const double> alphas,
                                     std::uint64_t reps, const RandomStream& stream);

/// Calibration tables keyed by (test, d, n, m); shared between tests built for
/// different signal strengths at the same dimensions.
class CalibrationCache {
 public:
  std::optional<CalibrationTable> find(const std::string& key) const;
  void insert(const std::string& key, CalibrationTable table);

 private:
  mutable std::mutex mu_;
  std::map<std::string, CalibrationTable> tables_;
};

struct TestOptions {
  /// Grid on which Monte Carlo thresholds are tabulated; every alpha later
  /// passed to kappa() must be on it.
  std::vector<double> calibration_alphas;
  std::uint64_t calibration_reps = 100'000;
  /// Root of calibration randomness; keep distinct from evaluation streams.
  RandomStream calibration_stream{0x6d6e6d2d63616cull};
  /// Alternative direction g for likelihood-ratio e-values. Defaults to a
  /// Rademacher-scaled vector of norm rho drawn from calibration_stream.
  std::optional<Eigen::VectorXd> evalue_direction;
  std::shared_ptr<CalibrationCache> cache;
};

/// 0.01, 0.02, ..., 0.99.
std::vector<double> default_alpha_grid();

// Statistics of the individual tests.
StatisticFn chisq_combined_statistic();
StatisticFn uncoordinated_directional_statistic(Partition part);
StatisticFn edgington_directional_statistic(Partition part);
StatisticFn coordinated_projection_statistic();
StatisticFn single_trial_statistic();
StatisticFn pooled_statistic();
/// Oriented so that larger is stronger evidence (see pvalue_method_test).
StatisticFn pvalue_statistic(const Combiner& combiner);
StatisticFn evalue_statistic(EvalueMode mode, Eigen::VectorXd g);

/// sum_j n ||X^(j)||^2 >= F^{-1}_{chi^2_{dm}}(1 - alpha).
MetaTest chisq_combined_test(const Scenario& scenario);
/// (sqrt(d)/m) sum_i (sum_{j in J_i} S^(j))^2 >= d^{-1/2} F^{-1}_{chi^2_d}(1 - alpha)
/// for balanced partitions; Monte Carlo threshold otherwise. Unsupported for
/// m < d.
MetaTest uncoordinated_directional_test(const Scenario& scenario,
                                        const TestOptions& options);
/// (sqrt(d)/m) sum_i (sum_{j in J_i} (Phi(sqrt(n) X_i^(j)) - 1/2))^2 > kappa.
MetaTest edgington_directional_test(const Scenario& scenario,
                                    const CalibrationTable& calibration);
/// |m^{-1/2} sum_j (sqrt(n) U X^(j))_1| >= Phi^{-1}(1 - alpha/2).
MetaTest coordinated_projection_test(const Scenario& scenario);
MetaTest single_trial_test(const Scenario& scenario);
MetaTest pooled_test(const Scenario& scenario);
/// Combination of the local chi-square p-values. Analytic thresholds for
/// fisher, pearson, stouffer, tippett and generalized_mean(r) with
/// r in {-inf, 1, inf} (a_{r,m} = m, 2, 1); Monte Carlo otherwise.
MetaTest pvalue_method_test(const Combiner& combiner, const Scenario& scenario,
                            const TestOptions& options);
/// product: sum_j log E^(j) >= log(1/alpha); average: mean E^(j) >= 1/alpha.
MetaTest evalue_test(EvalueMode mode, const Scenario& scenario,
                     const Eigen::VectorXd& g);

/// Canonical registry names (generalized means listed for r in {-inf, 1, inf};
/// any "pvalue:generalized_mean(<r>)" is accepted).
std::vector<std::string> registered_test_names();
bool is_registered_test(std::string_view name);

/// Builds a registered test for the dimensions of `scenario`; rho and the
/// signal law only affect the e-value alternative. Throws UnknownTestError.
MetaTest make_test(std::string_view name, const Scenario& scenario,
                   const TestOptions& options);

}  // namespace mnm
