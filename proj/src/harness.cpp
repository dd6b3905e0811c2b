#include "mnm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "mnm/error.hpp"

namespace mnm {

double binomial_band(double p, std::uint64_t reps) {
  if (reps == 0) return 0.0;
  return 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(reps));
}

namespace {

struct ArmStreams {
  RandomStream null_data;
  RandomStream signal;
  RandomStream alt_data;
  RandomStream shared;
};

ArmStreams arm_streams(const RandomStream& root, std::uint64_t rep) {
  const RandomStream r = root.derive("rep:" + std::to_string(rep));
  return {r.derive("null"), r.derive("signal"), r.derive("alt"), r.derive("shared")};
}

unsigned resolve_workers(unsigned requested, std::uint64_t reps) {
  unsigned w = requested != 0 ? requested : std::thread::hardware_concurrency();
  w = std::max(1u, w);
  return static_cast<unsigned>(std::min<std::uint64_t>(w, std::max<std::uint64_t>(reps, 1)));
}

}  // namespace

Replicate draw_replicate(const Scenario& scenario, const RandomStream& root,
                         std::uint64_t rep) {
  ArmStreams s = arm_streams(root, rep);
  const Scenario null = scenario.null_counterpart();
  const Signal zero{Eigen::VectorXd::Zero(scenario.d)};
  Replicate out{gen_trials(zero, null, s.null_data), {}, draw_signal(scenario, s.signal),
                s.shared};
  out.alt_trials = gen_trials(out.signal, scenario, s.alt_data);
  return out;
}

Evaluation evaluate(std::span<const MetaTest> tests, const Scenario& scenario,
                    std::span<const double> alphas, std::uint64_t reps,
                    const RandomStream& root, const EvaluationOptions& options) {
  scenario.validate();
  const std::size_t nt = tests.size();
  const std::size_t na = alphas.size();

  std::vector<std::vector<double>> kappas(nt, std::vector<double>(na, 0.0));
  for (std::size_t t = 0; t < nt; ++t) {
    if (!tests[t].supported()) continue;
    for (std::size_t a = 0; a < na; ++a) kappas[t][a] = tests[t].kappa(alphas[a]);
  }

  struct Partial {
    std::vector<std::vector<std::uint64_t>> null_counts;
    std::vector<std::vector<std::uint64_t>> alt_counts;
    Diagnostics diag;
  };
  const unsigned workers = resolve_workers(options.workers, reps);
  std::vector<Partial> partials(
      workers, Partial{std::vector(nt, std::vector<std::uint64_t>(na, 0)),
                       std::vector(nt, std::vector<std::uint64_t>(na, 0)),
                       {}});
  const Scenario null_scenario = scenario.null_counterpart();
  const Signal zero{Eigen::VectorXd::Zero(scenario.d)};

  auto run_arm = [&](Partial& part, std::uint64_t rep, const char* arm,
                     const TrialSet& trials, const RandomStream& shared,
                     std::vector<std::vector<std::uint64_t>>& counts) {
    Evidence ev(trials, shared);
    for (std::size_t t = 0; t < nt; ++t) {
      const MetaTest& test = tests[t];
      if (options.observer) options.observer(test.name(), rep, arm, trials);
      if (!test.supported()) continue;
      const double stat = test.statistic(ev);
      for (std::size_t a = 0; a < na; ++a) {
        if (test.rejects(stat, kappas[t][a])) ++counts[t][a];
      }
    }
    part.diag += ev.diagnostics();
  };

  auto work = [&](unsigned w) {
    Partial& part = partials[w];
    for (std::uint64_t rep = w; rep < reps; rep += workers) {
      ArmStreams s = arm_streams(root, rep);
      if (options.run_null) {
        const TrialSet trials = gen_trials(zero, null_scenario, s.null_data);
        run_arm(part, rep, "null", trials, s.shared, part.null_counts);
      }
      if (options.run_alternative) {
        const Signal signal = draw_signal(scenario, s.signal);
        const TrialSet trials = gen_trials(signal, scenario, s.alt_data);
        run_arm(part, rep, "alt", trials, s.shared, part.alt_counts);
      }
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          work(w);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  Evaluation out;
  out.alphas.assign(alphas.begin(), alphas.end());
  out.reps = reps;
  out.seed = root.seed();
  for (std::size_t t = 0; t < nt; ++t) {
    TestCounts c{tests[t].name(), tests[t].supported(),
                 std::vector<std::uint64_t>(na, 0), std::vector<std::uint64_t>(na, 0)};
    for (const Partial& p : partials) {
      for (std::size_t a = 0; a < na; ++a) {
        c.null_rejections[a] += p.null_counts[t][a];
        c.alt_rejections[a] += p.alt_counts[t][a];
      }
    }
    out.counts.push_back(std::move(c));
  }
  for (const Partial& p : partials) out.diagnostics += p.diag;
  return out;
}

RiskEstimate estimate_risk(const MetaTest& test, const Scenario& scenario,
                           double alpha, std::uint64_t reps, const RandomStream& root,
                           const EvaluationOptions& options) {
  if (reps < 100) throw std::invalid_argument("estimate_risk: reps must be >= 100");
  const double alphas[] = {alpha};
  const Evaluation ev = evaluate(std::span(&test, 1), scenario, alphas, reps, root, options);
  const double n = static_cast<double>(reps);
  RiskEstimate r;
  r.test = test.name();
  r.scenario = scenario;
  r.alpha = alpha;
  r.type1 = static_cast<double>(ev.counts[0].null_rejections[0]) / n;
  r.type2 = 1.0 - static_cast<double>(ev.counts[0].alt_rejections[0]) / n;
  r.type1_band = binomial_band(r.type1, reps);
  r.type2_band = binomial_band(r.type2, reps);
  r.reps = reps;
  r.seed = root.seed();
  return r;
}

const RocPoint& RocCurve::at_alpha(double alpha) const {
  for (const RocPoint& p : points) {
    if (std::fabs(p.alpha - alpha) < 1e-9) return p;
  }
  throw std::out_of_range("RocCurve " + test + ": no point at alpha = " +
                          std::to_string(alpha));
}

std::vector<RocCurve> roc_curve(std::span<const MetaTest> tests,
                                const Scenario& scenario,
                                std::span<const double> alphas, std::uint64_t reps,
                                const RandomStream& root,
                                const EvaluationOptions& options) {
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0 && alphas[i] < 1.0) ||
        (i > 0 && !(alphas[i] > alphas[i - 1]))) {
      throw std::invalid_argument("roc_curve: alphas must be strictly increasing in (0, 1)");
    }
  }
  const Evaluation ev = evaluate(tests, scenario, alphas, reps, root, options);
  const double n = static_cast<double>(reps);
  std::vector<RocCurve> curves;
  for (const TestCounts& c : ev.counts) {
    RocCurve curve;
    curve.test = c.test;
    curve.scenario = scenario;
    curve.reps = reps;
    curve.seed = root.seed();
    curve.supported = c.supported;
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      curve.points.push_back({alphas[a], static_cast<double>(c.null_rejections[a]) / n,
                              static_cast<double>(c.alt_rejections[a]) / n});
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

std::string_view to_string(RateFormula f) {
  switch (f) {
    case RateFormula::single:
      return "single";
    case RateFormula::pooled:
      return "pooled";
    case RateFormula::sqrt_m:
      return "sqrt-m";
    case RateFormula::directional:
      return "directional";
    case RateFormula::coordinated:
      return "coordinated";
  }
  return "unknown";
}

RateFormula parse_rate_formula(std::string_view name) {
  if (name == "single") return RateFormula::single;
  if (name == "pooled") return RateFormula::pooled;
  if (name == "sqrt-m") return RateFormula::sqrt_m;
  if (name == "directional") return RateFormula::directional;
  if (name == "coordinated") return RateFormula::coordinated;
  throw ConfigError("unknown rate formula '" + std::string(name) +
                    "' (expected single, pooled, sqrt-m, directional, coordinated)");
}

double rate_value(RateFormula f, int d, int m, int n) {
  const double dd = d;
  const double mm = m;
  const double nn = n;
  switch (f) {
    case RateFormula::single:
      return std::sqrt(dd) / nn;
    case RateFormula::pooled:
      return std::sqrt(dd) / (mm * nn);
    case RateFormula::sqrt_m:
      return std::sqrt(dd) / (std::sqrt(mm) * nn);
    case RateFormula::directional:
      return std::min(std::sqrt(mm), dd) * std::sqrt(dd) / (mm * nn);
    case RateFormula::coordinated:
      return dd / (mm * nn);
  }
  return 0.0;
}

RateSweepResult rate_sweep(const std::vector<std::string>& tests,
                           const RateGrid& grid, const std::vector<double>& c_values,
                           std::uint64_t reps, const RandomStream& root,
                           const RateSweepOptions& options) {
  if (tests.empty() || grid.d.empty() || grid.m.empty() || grid.n.empty() ||
      c_values.empty()) {
    throw std::invalid_argument("rate_sweep: empty grid");
  }
  TestOptions topts = options.test_options;
  if (!topts.cache) topts.cache = std::make_shared<CalibrationCache>();
  if (std::none_of(topts.calibration_alphas.begin(), topts.calibration_alphas.end(),
                   [&](double a) { return std::fabs(a - options.alpha) < 1e-12; })) {
    topts.calibration_alphas.push_back(options.alpha);
  }
  std::sort(topts.calibration_alphas.begin(), topts.calibration_alphas.end());

  EvaluationOptions eopts = options.evaluation;
  eopts.run_null = false;
  eopts.run_alternative = true;

  RateSweepResult out;
  const double alphas[] = {options.alpha};
  for (int d : grid.d) {
    for (int n : grid.n) {
      for (double c : c_values) {
        std::vector<ElbowRow> rows;
        for (int m : grid.m) {
          Scenario s;
          s.d = d;
          s.n = n;
          s.m = m;
          s.law = options.law;
          const double rho2 = c * rate_value(options.formula, d, m, n);
          s.rho = std::sqrt(rho2);
          if (s.rho == 0.0) s.law = SignalLaw::null;

          std::vector<MetaTest> built;
          for (const auto& name : tests) built.push_back(make_test(name, s, topts));
          const RandomStream cell = root.derive(
              "cell:d=" + std::to_string(d) + ",m=" + std::to_string(m) +
              ",n=" + std::to_string(n));
          const Evaluation ev = evaluate(built, s, alphas, reps, cell, eopts);

          std::map<std::string, const RateCell*> by_name;
          const std::size_t first = out.cells.size();
          for (const TestCounts& tc : ev.counts) {
            RateCell rc;
            rc.d = d;
            rc.m = m;
            rc.n = n;
            rc.c = c;
            rc.formula = options.formula;
            rc.rho2 = rho2;
            rc.test = tc.test;
            rc.alpha = options.alpha;
            rc.power = static_cast<double>(tc.alt_rejections[0]) / static_cast<double>(reps);
            rc.band = binomial_band(rc.power, reps);
            rc.supported = tc.supported;
            rc.reps = reps;
            rc.seed = root.seed();
            out.cells.push_back(std::move(rc));
          }
          for (std::size_t i = first; i < out.cells.size(); ++i) {
            by_name[out.cells[i].test] = &out.cells[i];
          }
          const RateCell* chisq = by_name.count("chisq-combined") ? by_name["chisq-combined"] : nullptr;
          const RateCell* dir = by_name.count("edgington-directional")
                                    ? by_name["edgington-directional"]
                                    : (by_name.count("uncoordinated-directional")
                                           ? by_name["uncoordinated-directional"]
                                           : nullptr);
          if (chisq != nullptr && dir != nullptr) {
            ElbowRow row;
            row.d = d;
            row.m = m;
            row.n = n;
            row.c = c;
            row.directional_test = dir->test;
            row.directional_power = dir->power;
            row.chisq_power = chisq->power;
            row.gap = dir->power - chisq->power;
            row.band = std::hypot(dir->band, chisq->band);
            rows.push_back(std::move(row));
          }
        }
        out.elbow.insert(out.elbow.end(), rows.begin(), rows.end());
      }
    }
  }
  return out;
}

}  // namespace mnm
