#include "mnm/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>

#include "mnm/error.hpp"
#include "mnm/harness.hpp"
#include "mnm/metatest.hpp"
#include "mnm/quantize.hpp"

namespace mnm {

namespace {

std::string fmt(double v, int prec = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Alpha closest to 0.05, used for the one-line summaries.
std::size_t summary_index(const std::vector<double>& alphas) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < alphas.size(); ++i) {
    if (std::abs(alphas[i] - 0.05) < std::abs(alphas[best] - 0.05)) best = i;
  }
  return best;
}

TestOptions test_options(const ExperimentConfig& c, std::vector<double> alphas) {
  TestOptions o;
  o.calibration_alphas = sorted_unique(std::move(alphas));
  o.calibration_reps = c.calibration_reps;
  o.calibration_stream = RandomStream(*c.seed).derive("calibration");
  o.cache = std::make_shared<CalibrationCache>();
  return o;
}

std::vector<MetaTest> build_tests(const ExperimentConfig& c, const TestOptions& o) {
  std::vector<MetaTest> tests;
  tests.reserve(c.tests.size());
  for (const auto& name : c.tests) tests.push_back(make_test(name, c.scenario, o));
  return tests;
}

ResultSet run_roc(const ExperimentConfig& c, std::ostream& out) {
  const std::vector<double> alphas = sorted_unique(c.alphas);
  const TestOptions o = test_options(c, alphas);
  const std::vector<MetaTest> tests = build_tests(c, o);
  EvaluationOptions eo;
  eo.workers = c.workers;
  auto curves = roc_curve(tests, c.scenario, alphas, c.reps,
                          RandomStream(*c.seed).derive("roc"), eo);
  const std::size_t k = summary_index(alphas);
  for (const RocCurve& curve : curves) {
    if (!curve.supported) {
      out << curve.test << ": unsupported for m < d, recorded as TPR 0\n";
      continue;
    }
    const RocPoint& p = curve.points[k];
    out << curve.test << ": alpha=" << fmt(p.alpha, 2) << " fpr=" << fmt(p.fpr)
        << " tpr=" << fmt(p.tpr) << " band=" << fmt(binomial_band(p.tpr, c.reps))
        << " reps=" << c.reps << '\n';
  }
  return curves;
}

ResultSet run_risk(const ExperimentConfig& c, std::ostream& out) {
  const std::vector<double> alphas = sorted_unique(c.alphas);
  const TestOptions o = test_options(c, alphas);
  const std::vector<MetaTest> tests = build_tests(c, o);
  EvaluationOptions eo;
  eo.workers = c.workers;
  const Evaluation ev = evaluate(tests, c.scenario, alphas, c.reps,
                                RandomStream(*c.seed).derive("risk"), eo);
  std::vector<RiskEstimate> rows;
  const double reps = static_cast<double>(c.reps);
  for (const TestCounts& tc : ev.counts) {
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      RiskEstimate r;
      r.test = tc.test;
      r.scenario = c.scenario;
      r.alpha = alphas[a];
      r.type1 = static_cast<double>(tc.null_rejections[a]) / reps;
      r.type2 = 1.0 - static_cast<double>(tc.alt_rejections[a]) / reps;
      r.type1_band = binomial_band(r.type1, c.reps);
      r.type2_band = binomial_band(r.type2, c.reps);
      r.reps = c.reps;
      r.seed = *c.seed;
      rows.push_back(r);
    }
    const RiskEstimate& s = rows[rows.size() - alphas.size() + summary_index(alphas)];
    out << s.test << ": alpha=" << fmt(s.alpha, 2) << " type1=" << fmt(s.type1)
        << " type2=" << fmt(s.type2) << " risk=" << fmt(s.risk())
        << (tc.supported ? "" : " (unsupported)") << '\n';
  }
  return rows;
}

ResultSet run_rates(const ExperimentConfig& c, std::ostream& out) {
  RateSweepOptions o;
  o.formula = c.rate;
  o.alpha = c.alpha;
  o.law = c.worst_case_probe ? SignalLaw::first_axis : c.scenario.law;
  if (o.law == SignalLaw::null || o.law == SignalLaw::fixed) {
    throw ConfigError("rates needs a random or first_axis signal law");
  }
  o.test_options = test_options(c, {c.alpha});
  o.evaluation.workers = c.workers;
  RateSweepResult r = rate_sweep(c.tests, c.grid, c.c_values, c.reps,
                                 RandomStream(*c.seed).derive("rates"), o);
  for (const auto& name : c.tests) {
    double lo = 1.0, hi = 0.0;
    std::size_t cells = 0, unsupported = 0;
    for (const RateCell& cell : r.cells) {
      if (cell.test != name) continue;
      ++cells;
      if (!cell.supported) {
        ++unsupported;
        continue;
      }
      lo = std::min(lo, cell.power);
      hi = std::max(hi, cell.power);
    }
    out << name << ": cells=" << cells << " unsupported=" << unsupported;
    if (cells > unsupported) out << " power=[" << fmt(lo) << ", " << fmt(hi) << ']';
    out << '\n';
  }
  return r;
}

ResultSet run_calibrate(const ExperimentConfig& c, std::ostream& out) {
  const std::vector<double> alphas = sorted_unique(c.alphas);
  TestOptions o = test_options(c, alphas);
  std::vector<CalibrationRecord> recs;
  for (const auto& name : c.tests) {
    const MetaTest test = make_test(name, c.scenario, o);
    if (!test.supported()) {
      out << name << ": unsupported (" << test.unsupported_reason() << ")\n";
      continue;
    }
    CalibrationTable table;
    if (const auto* t = std::get_if<CalibrationTable>(&test.threshold_map())) {
      table = *t;
    } else {
      // Analytic tests get an empirical table too, for comparison with the
      // closed form.
      StatisticFn stat = [test](Evidence& ev) { return test.statistic(ev); };
      table = calibrate_threshold(stat, c.scenario, alphas, c.calibration_reps,
                                  o.calibration_stream.derive("calibration:" + name));
    }
    const std::size_t k = summary_index(table.alphas);
    out << name << ": kappa(" << fmt(table.alphas[k], 2) << ")=" << fmt(table.kappas[k], 6)
        << " reps=" << table.reps;
    if (!std::holds_alternative<CalibrationTable>(test.threshold_map())) {
      out << " analytic=" << fmt(test.kappa(table.alphas[k]), 6);
    }
    out << '\n';
    for (const auto& w : table.warnings) out << "  warning: " << w << '\n';
    recs.push_back({name, c.scenario, std::move(table)});
  }
  return recs;
}

ResultSet run_quantize(const ExperimentConfig& c, std::ostream& out) {
  std::vector<QuantizeRow> rows;
  auto add = [&](double x, int bits) {
    const BinaryApproximation a = binary_expand(x, bits);
    rows.push_back({x, bits, a.value, std::abs(x - a.value), expansion_error_bound(x, bits)});
  };
  for (double x : c.quantize_x) {
    for (int b : c.quantize_bits) add(x, b);
    for (double eps : c.quantize_eps) add(x, bits_for_accuracy(x, eps));
  }
  std::size_t ok = 0;
  for (const QuantizeRow& r : rows) ok += r.error <= r.bound;
  out << "quantize: rows=" << rows.size() << " within_bound=" << ok << '\n';
  return rows;
}

}  // namespace

int run(std::string_view subcommand, ExperimentConfig c, std::ostream& out,
        std::ostream& err) {
  static const std::set<std::string_view> known = {"roc", "risk", "rates", "calibrate",
                                                   "quantize"};
  try {
    if (!known.count(subcommand)) {
      throw ConfigError("unknown subcommand '" + std::string(subcommand) +
                        "' (expected roc, risk, rates, calibrate, quantize)");
    }
    if (c.worst_case_probe && subcommand != "rates") {
      c.scenario.law = SignalLaw::first_axis;
    }
    if (c.alphas.empty()) {
      c.alphas = (subcommand == "risk") ? std::vector<double>{0.05} : default_alpha_grid();
    }
    c.validate(subcommand);
    const std::string echo = c.to_json().dump();

    ResultSet results;
    std::ostream& summary = c.out.empty() ? err : out;
    if (subcommand == "roc") {
      results = run_roc(c, summary);
    } else if (subcommand == "risk") {
      results = run_risk(c, summary);
    } else if (subcommand == "rates") {
      results = run_rates(c, summary);
    } else if (subcommand == "calibrate") {
      results = run_calibrate(c, summary);
    } else {
      results = run_quantize(c, summary);
    }

    if (c.out.empty()) {
      out << render(results, c.format, echo);
    } else {
      emit(results, c.format, c.out, echo);
      out << "wrote " << c.out << '\n';
    }
    return kExitOk;
  } catch (const UnknownTestError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUnknownTest;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int run(std::string_view subcommand, const std::filesystem::path& config_path,
        const Overrides& overrides, std::ostream& out, std::ostream& err) {
  ExperimentConfig c;
  try {
    if (!config_path.empty()) c = ExperimentConfig::load(config_path);
    apply_overrides(c, overrides);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return run(subcommand, std::move(c), out, err);
}

}  // namespace mnm
