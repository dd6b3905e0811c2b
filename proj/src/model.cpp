#include "mnm/model.hpp"

#include <cmath>
#include <stdexcept>

#include "mnm/error.hpp"

namespace mnm {

std::string_view to_string(SignalLaw law) {
  switch (law) {
    case SignalLaw::null:
      return "null";
    case SignalLaw::fixed:
      return "fixed";
    case SignalLaw::rademacher_scaled:
      return "rademacher_scaled";
    case SignalLaw::first_axis:
      return "first_axis";
  }
  return "unknown";
}

SignalLaw parse_signal_law(std::string_view name) {
  if (name == "null") return SignalLaw::null;
  if (name == "fixed") return SignalLaw::fixed;
  if (name == "rademacher_scaled") return SignalLaw::rademacher_scaled;
  if (name == "first_axis") return SignalLaw::first_axis;
  throw ConfigError("unknown signal law '" + std::string(name) +
                    "' (expected null, fixed, rademacher_scaled, first_axis)");
}

void Scenario::validate() const {
  if (d < 1 || n < 1 || m < 1) {
    throw ConfigError("scenario: d, n and m must be positive");
  }
  if (!std::isfinite(rho) || rho < 0.0) {
    throw ConfigError("scenario: rho must be finite and >= 0");
  }
  if (law == SignalLaw::null && rho != 0.0) {
    throw ConfigError("scenario: null signal law requires rho = 0");
  }
  if (law == SignalLaw::fixed) {
    if (fixed_signal.size() != static_cast<std::size_t>(d)) {
      throw ConfigError("scenario: fixed signal must have length d");
    }
    double sq = 0.0;
    for (double v : fixed_signal) sq += v * v;
    if (std::fabs(std::sqrt(sq) - rho) > 1e-12) {
      throw ConfigError("scenario: fixed signal norm differs from rho");
    }
  }
}

Scenario Scenario::null_counterpart() const {
  Scenario s = *this;
  s.rho = 0.0;
  s.law = SignalLaw::null;
  s.fixed_signal.clear();
  return s;
}

Signal draw_signal(const Scenario& scenario, RandomStream& stream) {
  scenario.validate();
  Signal s{Eigen::VectorXd::Zero(scenario.d)};
  switch (scenario.law) {
    case SignalLaw::null:
      break;
    case SignalLaw::fixed:
      for (int i = 0; i < scenario.d; ++i) s.f[i] = scenario.fixed_signal[i];
      break;
    case SignalLaw::rademacher_scaled: {
      const double scale = scenario.rho / std::sqrt(static_cast<double>(scenario.d));
      for (int i = 0; i < scenario.d; ++i) s.f[i] = scale * stream.rademacher();
      break;
    }
    case SignalLaw::first_axis:
      s.f[0] = scenario.rho;
      break;
  }
  return s;
}

TrialSet gen_trials(const Signal& signal, const Scenario& scenario,
                    RandomStream& stream) {
  if (signal.f.size() != scenario.d) {
    throw std::invalid_argument("gen_trials: signal length differs from d");
  }
  TrialSet t;
  t.scenario = scenario;
  t.provenance = {stream.seed(), stream.path_string()};
  t.x.resize(scenario.m, scenario.d);
  const double noise = 1.0 / std::sqrt(static_cast<double>(scenario.n));
  for (int j = 0; j < scenario.m; ++j) {
    for (int i = 0; i < scenario.d; ++i) {
      t.x(j, i) = signal.f[i] + noise * stream.gaussian();
    }
  }
  return t;
}

}  // namespace mnm
