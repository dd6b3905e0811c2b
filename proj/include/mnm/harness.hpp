#pragma once

// Monte Carlo experiments: risk, ROC curves and rate sweeps.
//
// Replicate r draws everything from root.derive("rep:<r>"):
//   "null"   -> null TrialSet
//   "signal" -> alternative signal f
//   "alt"    -> alternative TrialSet
//   "shared" -> shared randomness (the Haar matrix of coordinated tests)
// All tests see the same replicate data (common random numbers), and counts
// do not depend on how replicates are spread across workers.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mnm/combine.hpp"
#include "mnm/metatest.hpp"
#include "mnm/model.hpp"
#include "mnm/rng.hpp"

namespace mnm {

/// 3 sqrt(p (1 - p) / reps).
double binomial_band(double p, std::uint64_t reps);

struct Replicate {
  TrialSet null_trials;
  TrialSet alt_trials;
  Signal signal;
  RandomStream shared;
};

Replicate draw_replicate(const Scenario& scenario, const RandomStream& root,
                         std::uint64_t rep);

struct EvaluationOptions {
  /// 0 means std::thread::hardware_concurrency().
  unsigned workers = 0;
  bool run_null = true;
  bool run_alternative = true;
  /// Called once per (test, replicate, arm) with the data the test saw; must
  /// be thread-safe when workers > 1. Arm is "null" or "alt".
  std::function<void(const std::string& test, std::uint64_t rep,
                     const std::string& arm, const TrialSet&)>
      observer;
};

struct TestCounts {
  std::string test;
  bool supported = true;
  std::vector<std::uint64_t> null_rejections;  // per alpha
  std::vector<std::uint64_t> alt_rejections;   // per alpha
};

struct Evaluation {
  std::vector<double> alphas;
  std::uint64_t reps = 0;
  std::uint64_t seed = 0;
  std::vector<TestCounts> counts;
  Diagnostics diagnostics;
};

/// Rejection counts of every test at every alpha over `reps` replicates.
Evaluation evaluate(std::span<const MetaTest> tests, const Scenario& scenario,
                    std::span<const double> alphas, std::uint64_t reps,
                    const RandomStream& root, const EvaluationOptions& options = {});

struct RiskEstimate {
  std::string test;
  Scenario scenario;
  double alpha = 0.0;
  double type1 = 0.0;
  double type1_band = 0.0;
  double type2 = 0.0;
  double type2_band = 0.0;
  std::uint64_t reps = 0;
  std::uint64_t seed = 0;

  double risk() const noexcept { return type1 + type2; }
};

/// Type I error from null replicates and Type II error from alternative
/// replicates with a fresh signal each (a lower bound on the sup over f).
/// Throws std::invalid_argument for reps < 100.
RiskEstimate estimate_risk(const MetaTest& test, const Scenario& scenario,
                           double alpha, std::uint64_t reps, const RandomStream& root,
                           const EvaluationOptions& options = {});

struct RocPoint {
  double alpha = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::string test;
  Scenario scenario;
  std::vector<RocPoint> points;
  std::uint64_t reps = 0;
  std::uint64_t seed = 0;
  bool supported = true;

  /// Point whose alpha matches within 1e-9; throws std::out_of_range.
  const RocPoint& at_alpha(double alpha) const;
};

/// One curve per test, all evaluated on the same replicates. Unsupported tests
/// get fpr = tpr = 0 at every alpha.
std::vector<RocCurve> roc_curve(std::span<const MetaTest> tests,
                                const Scenario& scenario,
                                std::span<const double> alphas, std::uint64_t reps,
                                const RandomStream& root,
                                const EvaluationOptions& options = {});

enum class RateFormula { single, pooled, sqrt_m, directional, coordinated };

std::string_view to_string(RateFormula f);
/// Throws ConfigError.
RateFormula parse_rate_formula(std::string_view name);

/// rho^2 reference rate:
///   single       sqrt(d) / n
///   pooled       sqrt(d) / (m n)
///   sqrt-m       sqrt(d) / (sqrt(m) n)
///   directional  min(sqrt(m), d) sqrt(d) / (m n)
///   coordinated  d / (m n)
double rate_value(RateFormula f, int d, int m, int n);

struct RateGrid {
  std::vector<int> d;
  std::vector<int> m;
  std::vector<int> n;
};

struct RateCell {
  int d = 0;
  int m = 0;
  int n = 0;
  double c = 0.0;
  RateFormula formula = RateFormula::sqrt_m;
  double rho2 = 0.0;
  std::string test;
  double alpha = 0.0;
  double power = 0.0;
  double band = 0.0;
  bool supported = true;
  std::uint64_t reps = 0;
  std::uint64_t seed = 0;
};

/// Power gap of the directional test over chisq-combined at fixed (d, n, c)
/// across m.
struct ElbowRow {
  int d = 0;
  int m = 0;
  int n = 0;
  double c = 0.0;
  std::string directional_test;
  double directional_power = 0.0;
  double chisq_power = 0.0;
  double gap = 0.0;
  double band = 0.0;  // sqrt(band_dir^2 + band_chisq^2)
};

struct RateSweepResult {
  std::vector<RateCell> cells;
  std::vector<ElbowRow> elbow;
};

struct RateSweepOptions {
  RateFormula formula = RateFormula::sqrt_m;
  double alpha = 0.05;
  SignalLaw law = SignalLaw::rademacher_scaled;
  TestOptions test_options;
  EvaluationOptions evaluation;
};

/// Power of every test at rho^2 = c * rate(d, m, n) for each grid point and c.
/// Alternative-only: each cell is evaluated on root.derive("cell:d=..,m=..,n=..")
/// so the same noise is reused across c. The elbow report is filled when both
/// chisq-combined and a directional test (edgington-directional preferred,
/// else uncoordinated-directional) are present.
RateSweepResult rate_sweep(const std::vector<std::string>& tests,
                           const RateGrid& grid, const std::vector<double>& c_values,
                           std::uint64_t reps, const RandomStream& root,
                           const RateSweepOptions& options = {});

}  // namespace mnm
