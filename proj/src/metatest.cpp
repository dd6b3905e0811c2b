#include "mnm/metatest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mnm/error.hpp"
#include "mnm/specfun.hpp"

namespace mnm {

// ---------------------------------------------------------------------------
// Evidence

Evidence::Evidence(const TrialSet& trials, RandomStream shared)
    : trials_(&trials), shared_(std::move(shared)) {}

const std::vector<double>& Evidence::chisq_stats() {
  if (!chisq_) chisq_ = mnm::chisq_norm_stats(*trials_).values;
  return *chisq_;
}

const std::vector<double>& Evidence::chisq_pvalues() {
  if (!pvalues_) {
    const DegreesOfFreedom d(trials_->d());
    std::vector<double> p(chisq_stats().size());
    std::transform(chisq_->begin(), chisq_->end(), p.begin(),
                   [&](double s) { return chisq_sf(s, d); });
    pvalues_ = std::move(p);
  }
  return *pvalues_;
}

const OrthogonalMatrix& Evidence::shared_rotation() {
  if (!rotation_) {
    RandomStream s = shared_.derive("haar");
    rotation_ = sample_haar_orthogonal(trials_->d(), s);
  }
  return *rotation_;
}

// ---------------------------------------------------------------------------
// Thresholds

double CalibrationTable::kappa(double alpha) const {
  const auto it = std::lower_bound(alphas.begin(), alphas.end(), alpha - 1e-9);
  if (it == alphas.end() || std::fabs(*it - alpha) > 1e-9) {
    throw std::out_of_range("calibration table has no entry for alpha = " +
                            std::to_string(alpha));
  }
  return kappas[static_cast<std::size_t>(it - alphas.begin())];
}

bool CalibrationTable::strictly_decreasing() const {
  for (std::size_t i = 1; i < kappas.size(); ++i) {
    if (!(kappas[i] < kappas[i - 1])) return false;
  }
  return true;
}

MetaTest::MetaTest(std::string name, StatisticFn statistic,
                   ThresholdMap threshold, Sides sides, bool exact_level)
    : name_(std::move(name)),
      statistic_(std::move(statistic)),
      threshold_(std::move(threshold)),
      sides_(sides),
      exact_level_(exact_level) {}

MetaTest MetaTest::unsupported(std::string name, std::string reason) {
  MetaTest t(std::move(name), [](Evidence&) { return 0.0; },
             AnalyticThreshold{"unsupported", [](double) {
                                 return std::numeric_limits<double>::infinity();
                               }},
             Sides::one, false);
  t.supported_ = false;
  t.reason_ = std::move(reason);
  return t;
}

bool MetaTest::calibrated() const noexcept {
  return std::holds_alternative<CalibrationTable>(threshold_);
}

double MetaTest::statistic(Evidence& ev) const { return statistic_(ev); }

double MetaTest::kappa(double alpha) const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("kappa: alpha must lie in (0, 1)");
  }
  return std::visit(
      [&](const auto& t) {
        if constexpr (std::is_same_v<std::decay_t<decltype(t)>, CalibrationTable>) {
          return t.kappa(alpha);
        } else {
          return t.kappa(alpha);
        }
      },
      threshold_);
}

bool MetaTest::rejects(double statistic, double kappa) const noexcept {
  if (!supported_) return false;
  return calibrated() ? statistic > kappa : statistic >= kappa;
}

bool MetaTest::decide(Evidence& ev, double alpha) const {
  if (!supported_) return false;
  return rejects(statistic(ev), kappa(alpha));
}

std::vector<double> default_alpha_grid() {
  std::vector<double> a;
  for (int i = 1; i <= 99; ++i) a.push_back(i / 100.0);
  return a;
}

CalibrationTable calibrate_threshold(const StatisticFn& statistic,
                                     const Scenario& scenario,
                                     std::span<const double> alphas,
                                     std::uint64_t reps, const RandomStream& stream) {
  if (reps < 1000) throw std::invalid_argument("calibrate_threshold: reps >= 1000");
  if (alphas.empty()) throw std::invalid_argument("calibrate_threshold: no alphas");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0 && alphas[i] < 1.0) ||
        (i > 0 && !(alphas[i] > alphas[i - 1]))) {
      throw std::invalid_argument(
          "calibrate_threshold: alphas must be strictly increasing in (0, 1)");
    }
  }
  const Scenario null = scenario.null_counterpart();
  const Signal zero{Eigen::VectorXd::Zero(null.d)};
  std::vector<double> sample(reps);
  for (std::uint64_t r = 0; r < reps; ++r) {
    const RandomStream rep = stream.derive("rep:" + std::to_string(r));
    RandomStream data = rep.derive("data");
    const TrialSet trials = gen_trials(zero, null, data);
    Evidence ev(trials, rep.derive("shared"));
    sample[r] = statistic(ev);
  }
  std::sort(sample.begin(), sample.end());

  CalibrationTable table;
  table.reps = reps;
  table.seed = stream.seed();
  table.stream_path = stream.path_string();
  const double n = static_cast<double>(reps);
  for (double a : alphas) {
    const double pos = std::ceil((1.0 - a) * n - 1e-9);
    const auto k = static_cast<std::size_t>(std::clamp(pos, 1.0, n));
    table.alphas.push_back(a);
    table.kappas.push_back(sample[k - 1]);
    if (a * n < 20.0) {
      table.warnings.push_back("unstable tail quantile: alpha * reps = " +
                               std::to_string(a * n) + " < 20");
    }
  }
  return table;
}

std::optional<CalibrationTable> CalibrationCache::find(const std::string& key) const {
  std::lock_guard lock(mu_);
  const auto it = tables_.find(key);
  if (it == tables_.end()) return std::nullopt;
  return it->second;
}

void CalibrationCache::insert(const std::string& key, CalibrationTable table) {
  std::lock_guard lock(mu_);
  tables_.insert_or_assign(key, std::move(table));
}

// ---------------------------------------------------------------------------
// Statistics

namespace {

double sum_of_squared_block_sums(std::span<const double> s, const Partition& part) {
  std::vector<double> block(part.d(), 0.0);
  for (int j = 0; j < part.m(); ++j) block[part.coordinate(j)] += s[j];
  double out = 0.0;
  for (double b : block) out += b * b;
  return out;
}

}  // namespace

StatisticFn chisq_combined_statistic() {
  return [](Evidence& ev) { return sum(ev.chisq_stats()); };
}

StatisticFn uncoordinated_directional_statistic(Partition part) {
  return [part = std::move(part)](Evidence& ev) {
    const TrialSet& t = ev.trials();
    const double root_n = std::sqrt(static_cast<double>(t.n()));
    std::vector<double> block(part.d(), 0.0);
    for (int j = 0; j < t.m(); ++j) {
      block[part.coordinate(j)] += root_n * t.x(j, part.coordinate(j));
    }
    double out = 0.0;
    for (double b : block) out += b * b;
    return std::sqrt(static_cast<double>(t.d())) / t.m() * out;
  };
}

StatisticFn edgington_directional_statistic(Partition part) {
  return [part = std::move(part)](Evidence& ev) {
    const TrialSet& t = ev.trials();
    const StatisticVector s = directional_stats(t, part);
    std::vector<double> centered(s.values.size());
    for (std::size_t j = 0; j < centered.size(); ++j) {
      centered[j] = std_normal_cdf(s.values[j]) - 0.5;
    }
    return std::sqrt(static_cast<double>(t.d())) / t.m() *
           sum_of_squared_block_sums(centered, part);
  };
}

StatisticFn coordinated_projection_statistic() {
  return [](Evidence& ev) {
    const TrialSet& t = ev.trials();
    const Eigen::RowVectorXd first_row = ev.shared_rotation().matrix().row(0);
    const Eigen::RowVectorXd total = t.x.colwise().sum();
    const double scale = std::sqrt(static_cast<double>(t.n()) / t.m());
    return std::fabs(scale * first_row.dot(total));
  };
}

StatisticFn single_trial_statistic() {
  return [](Evidence& ev) {
    const TrialSet& t = ev.trials();
    return t.n() * t.x.row(0).squaredNorm();
  };
}

StatisticFn pooled_statistic() {
  return [](Evidence& ev) {
    const TrialSet& t = ev.trials();
    const Eigen::RowVectorXd mean = t.x.colwise().mean();
    return static_cast<double>(t.n()) * t.m() * mean.squaredNorm();
  };
}

StatisticFn pvalue_statistic(const Combiner& combiner) {
  switch (combiner.method()) {
    case CombinerMethod::fisher:
      return [](Evidence& ev) {
        return fisher(ev.chisq_pvalues(), &ev.diagnostics());
      };
    case CombinerMethod::pearson:
      // 2 sum log(1 - p) is minus a chi^2_{2m} variable; small sums reject.
      return [](Evidence& ev) {
        return -2.0 * pearson(ev.chisq_pvalues(), &ev.diagnostics());
      };
    case CombinerMethod::mudholkar_george:
      return [](Evidence& ev) {
        return mudholkar_george(ev.chisq_pvalues(), &ev.diagnostics());
      };
    case CombinerMethod::edgington:
      return [](Evidence& ev) { return -edgington(ev.chisq_pvalues()); };
    case CombinerMethod::stouffer:
      return [](Evidence& ev) {
        return -stouffer(ev.chisq_pvalues(), &ev.diagnostics());
      };
    case CombinerMethod::tippett:
      return [](Evidence& ev) { return tippett(ev.chisq_pvalues()); };
    case CombinerMethod::generalized_mean:
      return [r = combiner.r()](Evidence& ev) {
        return -generalized_mean(ev.chisq_pvalues(), r);
      };
    default:
      throw ConfigError("combiner '" + combiner.name() +
                        "' does not combine p-values");
  }
}

StatisticFn evalue_statistic(EvalueMode mode, Eigen::VectorXd g) {
  if (mode == EvalueMode::product) {
    return [g = std::move(g)](Evidence& ev) {
      return sum(lr_log_evalues(ev.trials(), g).values);
    };
  }
  return [g = std::move(g)](Evidence& ev) {
    std::uint64_t overflow = 0;
    const StatisticVector e = lr_evalues(ev.trials(), g, &overflow);
    ev.diagnostics().evalue_overflows += overflow;
    return evalue_combine(e.values, EvalueMode::average);
  };
}

// ---------------------------------------------------------------------------
// Tests

namespace {

std::string calibration_key(const std::string& name, const Scenario& s,
                            const TestOptions& o) {
  std::ostringstream k;
  k << name << '|' << s.d << '|' << s.n << '|' << s.m << '|'
    << o.calibration_reps << '|' << o.calibration_alphas.size() << '|'
    << o.calibration_stream.key();
  return k.str();
}

CalibrationTable calibrate_for(const std::string& name, const StatisticFn& stat,
                               const Scenario& scenario, const TestOptions& options) {
  const std::string key = calibration_key(name, scenario, options);
  if (options.cache) {
    if (auto hit = options.cache->find(key)) return *hit;
  }
  std::vector<double> alphas = options.calibration_alphas;
  if (alphas.empty()) alphas = default_alpha_grid();
  std::sort(alphas.begin(), alphas.end());
  alphas.erase(std::unique(alphas.begin(), alphas.end(),
                           [](double a, double b) { return std::fabs(a - b) < 1e-12; }),
               alphas.end());
  const RandomStream stream = options.calibration_stream.derive(
      "calibration:" + name + ":d=" + std::to_string(scenario.d) +
      ":n=" + std::to_string(scenario.n) + ":m=" + std::to_string(scenario.m));
  CalibrationTable table =
      calibrate_threshold(stat, scenario, alphas, options.calibration_reps, stream);
  if (options.cache) options.cache->insert(key, table);
  return table;
}

AnalyticThreshold chisq_upper(std::string formula, std::int64_t dof, double scale = 1.0) {
  const DegreesOfFreedom k(dof);
  return {std::move(formula),
          [k, scale](double a) { return scale * chisq_quantile_upper(a, k); }};
}

Eigen::VectorXd default_evalue_direction(const Scenario& s, const TestOptions& o) {
  RandomStream stream = o.calibration_stream.derive("evalue-direction");
  Scenario design = s;
  if (design.law == SignalLaw::null || design.law == SignalLaw::fixed ||
      design.law == SignalLaw::first_axis) {
    design.law = SignalLaw::rademacher_scaled;
    design.fixed_signal.clear();
  }
  return draw_signal(design, stream).f;
}

}  // namespace

MetaTest chisq_combined_test(const Scenario& s) {
  return MetaTest("chisq-combined", chisq_combined_statistic(),
                  chisq_upper("F^{-1}_{chi2(dm)}(1-alpha)",
                              static_cast<std::int64_t>(s.d) * s.m),
                  Sides::one, true);
}

MetaTest uncoordinated_directional_test(const Scenario& s, const TestOptions& o) {
  const std::string name = "uncoordinated-directional";
  Partition part;
  try {
    part = make_partition(s.m, s.d);
  } catch (const UnsupportedRegimeError& e) {
    return MetaTest::unsupported(name, e.what());
  }
  const bool balanced = part.balanced();
  StatisticFn stat = uncoordinated_directional_statistic(std::move(part));
  if (balanced) {
    return MetaTest(name, stat,
                    chisq_upper("d^{-1/2} F^{-1}_{chi2(d)}(1-alpha)", s.d,
                                1.0 / std::sqrt(static_cast<double>(s.d))),
                    Sides::one, true);
  }
  CalibrationTable table = calibrate_for(name, stat, s, o);
  return MetaTest(name, std::move(stat), std::move(table), Sides::one, true);
}

MetaTest edgington_directional_test(const Scenario& s,
                                    const CalibrationTable& calibration) {
  if (calibration.alphas.empty()) {
    throw std::invalid_argument("edgington-directional: missing calibration");
  }
  return MetaTest("edgington-directional",
                  edgington_directional_statistic(make_partition(s.m, s.d)),
                  calibration, Sides::one, true);
}

MetaTest coordinated_projection_test(const Scenario&) {
  return MetaTest("coordinated-projection", coordinated_projection_statistic(),
                  AnalyticThreshold{"Phi^{-1}(1-alpha/2)",
                                    [](double a) {
                                      return std_normal_quantile(1.0 - 0.5 * a);
                                    }},
                  Sides::two, true);
}

MetaTest single_trial_test(const Scenario& s) {
  return MetaTest("single-trial", single_trial_statistic(),
                  chisq_upper("F^{-1}_{chi2(d)}(1-alpha)", s.d), Sides::one, true);
}

MetaTest pooled_test(const Scenario& s) {
  return MetaTest("pooled", pooled_statistic(),
                  chisq_upper("F^{-1}_{chi2(d)}(1-alpha)", s.d), Sides::one, true);
}

MetaTest pvalue_method_test(const Combiner& c, const Scenario& s,
                            const TestOptions& o) {
  const std::string name = "pvalue:" + c.name();
  StatisticFn stat = pvalue_statistic(c);
  const double m = s.m;
  switch (c.method()) {
    case CombinerMethod::fisher:
      return MetaTest(name, stat, chisq_upper("F^{-1}_{chi2(2m)}(1-alpha)", 2 * s.m),
                      Sides::one, true);
    case CombinerMethod::pearson: {
      const DegreesOfFreedom k(2 * s.m);
      return MetaTest(name, stat,
                      AnalyticThreshold{"-F^{-1}_{chi2(2m)}(alpha)",
                                        [k](double a) { return -chisq_quantile(a, k); }},
                      Sides::one, true);
    }
    case CombinerMethod::stouffer:
      return MetaTest(name, stat,
                      AnalyticThreshold{"Phi^{-1}(1-alpha)",
                                        [](double a) {
                                          return std_normal_quantile(1.0 - a);
                                        }},
                      Sides::one, true);
    case CombinerMethod::tippett:
      return MetaTest(name, stat,
                      AnalyticThreshold{"log(1-alpha)",
                                        [](double a) { return std::log1p(-a); }},
                      Sides::one, true);
    case CombinerMethod::generalized_mean: {
      const double r = c.r();
      std::optional<double> a_rm;
      if (r == -std::numeric_limits<double>::infinity()) a_rm = m;
      if (r == 1.0) a_rm = 2.0;
      if (r == std::numeric_limits<double>::infinity()) a_rm = 1.0;
      if (a_rm) {
        const double a = *a_rm;
        return MetaTest(name, stat,
                        AnalyticThreshold{"-alpha/a_{r,m}",
                                          [a](double alpha) { return -alpha / a; }},
                        Sides::one, false);
      }
      break;
    }
    case CombinerMethod::mudholkar_george:
    case CombinerMethod::edgington:
      break;
    default:
      throw UnknownTestError("combiner '" + c.name() + "' does not take p-values");
  }
  CalibrationTable table = calibrate_for(name, stat, s, o);
  return MetaTest(name, std::move(stat), std::move(table), Sides::one, true);
}

MetaTest evalue_test(EvalueMode mode, const Scenario& s, const Eigen::VectorXd& g) {
  if (g.size() != s.d) throw std::invalid_argument("evalue_test: g must have length d");
  if (mode == EvalueMode::product) {
    return MetaTest("evalue:product", evalue_statistic(mode, g),
                    AnalyticThreshold{"log(1/alpha)",
                                      [](double a) { return -std::log(a); }},
                    Sides::one, false);
  }
  return MetaTest("evalue:average", evalue_statistic(mode, g),
                  AnalyticThreshold{"1/alpha", [](double a) { return 1.0 / a; }},
                  Sides::one, false);
}

std::vector<std::string> registered_test_names() {
  return {"chisq-combined",
          "uncoordinated-directional",
          "edgington-directional",
          "coordinated-projection",
          "single-trial",
          "pooled",
          "pvalue:fisher",
          "pvalue:pearson",
          "pvalue:mudholkar_george",
          "pvalue:edgington",
          "pvalue:stouffer",
          "pvalue:tippett",
          "pvalue:generalized_mean(-inf)",
          "pvalue:generalized_mean(1)",
          "pvalue:generalized_mean(inf)",
          "evalue:product",
          "evalue:average"};
}

bool is_registered_test(std::string_view name) {
  if (name.starts_with("pvalue:")) {
    try {
      return Combiner::parse(name.substr(7)).takes_pvalues();
    } catch (const ConfigError&) {
      return false;
    }
  }
  const auto names = registered_test_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

MetaTest make_test(std::string_view name, const Scenario& s, const TestOptions& o) {
  if (!is_registered_test(name)) {
    std::string msg = "unknown test '" + std::string(name) + "'; registered tests:";
    for (const auto& n : registered_test_names()) msg += " " + n;
    msg += " (plus pvalue:generalized_mean(<r>))";
    throw UnknownTestError(msg);
  }
  if (name == "chisq-combined") return chisq_combined_test(s);
  if (name == "uncoordinated-directional") return uncoordinated_directional_test(s, o);
  if (name == "edgington-directional") {
    if (s.m < s.d) {
      return MetaTest::unsupported(std::string(name),
                                   "coordinate partition requires m >= d");
    }
    StatisticFn stat = edgington_directional_statistic(make_partition(s.m, s.d));
    return edgington_directional_test(s, calibrate_for(std::string(name), stat, s, o));
  }
  if (name == "coordinated-projection") return coordinated_projection_test(s);
  if (name == "single-trial") return single_trial_test(s);
  if (name == "pooled") return pooled_test(s);
  if (name.starts_with("pvalue:")) {
    return pvalue_method_test(Combiner::parse(name.substr(7)), s, o);
  }
  const Eigen::VectorXd g =
      o.evalue_direction ? *o.evalue_direction : default_evalue_direction(s, o);
  if (name == "evalue:product") return evalue_test(EvalueMode::product, s, g);
  return evalue_test(EvalueMode::average, s, g);
}

}  // namespace mnm
