#include "mnm/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mnm/error.hpp"
#include "mnm/metatest.hpp"

namespace mnm {

namespace {

using nlohmann::json;

template <class T>
T get_as(const json& doc, const char* key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

template <class T>
void read_opt(const json& doc, const char* key, T& into) {
  if (doc.contains(key)) into = get_as<T>(doc, key);
}

std::uint64_t parse_seed(const json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    std::size_t pos = 0;
    try {
      const unsigned long long x = std::stoull(s, &pos, 10);
      if (pos == s.size() && !s.empty() && s[0] != '-') return x;
    } catch (const std::exception&) {
    }
  }
  throw ConfigError("config key 'seed' must be an unsigned 64-bit decimal integer");
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "seed", "d", "n", "m", "rho", "rho2", "signal_law", "f", "tests", "alphas",
      "reps", "calibration_reps", "workers", "out", "format", "worst_case_probe",
      "grid", "c_values", "rate", "alpha", "quantize"};
  return keys;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  ExperimentConfig c;
  if (doc.contains("seed")) c.seed = parse_seed(doc.at("seed"));
  read_opt(doc, "d", c.scenario.d);
  read_opt(doc, "n", c.scenario.n);
  read_opt(doc, "m", c.scenario.m);
  if (doc.contains("rho") && doc.contains("rho2")) {
    throw ConfigError("config: give either 'rho' or 'rho2', not both");
  }
  read_opt(doc, "rho", c.scenario.rho);
  if (doc.contains("rho2")) {
    const double r2 = get_as<double>(doc, "rho2");
    if (!(r2 >= 0.0)) throw ConfigError("config key 'rho2' must be >= 0");
    c.scenario.rho = std::sqrt(r2);
  }
  if (doc.contains("signal_law")) {
    c.scenario.law = parse_signal_law(get_as<std::string>(doc, "signal_law"));
  }
  read_opt(doc, "f", c.scenario.fixed_signal);
  read_opt(doc, "tests", c.tests);
  read_opt(doc, "alphas", c.alphas);
  read_opt(doc, "reps", c.reps);
  read_opt(doc, "calibration_reps", c.calibration_reps);
  read_opt(doc, "workers", c.workers);
  read_opt(doc, "out", c.out);
  if (doc.contains("format")) c.format = parse_output_format(get_as<std::string>(doc, "format"));
  read_opt(doc, "worst_case_probe", c.worst_case_probe);
  if (doc.contains("grid")) {
    const json& g = doc.at("grid");
    read_opt(g, "d", c.grid.d);
    read_opt(g, "m", c.grid.m);
    read_opt(g, "n", c.grid.n);
  }
  read_opt(doc, "c_values", c.c_values);
  if (doc.contains("rate")) c.rate = parse_rate_formula(get_as<std::string>(doc, "rate"));
  read_opt(doc, "alpha", c.alpha);
  if (doc.contains("quantize")) {
    const json& q = doc.at("quantize");
    read_opt(q, "x", c.quantize_x);
    read_opt(q, "bits", c.quantize_bits);
    read_opt(q, "eps", c.quantize_eps);
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  return from_json(doc);
}

json ExperimentConfig::to_json() const {
  json doc;
  if (seed) doc["seed"] = *seed;
  doc["d"] = scenario.d;
  doc["n"] = scenario.n;
  doc["m"] = scenario.m;
  doc["rho"] = scenario.rho;
  doc["signal_law"] = std::string(mnm::to_string(scenario.law));
  if (scenario.law == SignalLaw::fixed) doc["f"] = scenario.fixed_signal;
  doc["tests"] = tests;
  doc["alphas"] = alphas;
  doc["reps"] = reps;
  doc["calibration_reps"] = calibration_reps;
  doc["workers"] = workers;
  doc["out"] = out;
  doc["format"] = format == OutputFormat::csv    ? "csv"
                  : format == OutputFormat::json ? "json"
                                                 : "svg";
  doc["worst_case_probe"] = worst_case_probe;
  doc["grid"] = {{"d", grid.d}, {"m", grid.m}, {"n", grid.n}};
  doc["c_values"] = c_values;
  doc["rate"] = std::string(mnm::to_string(rate));
  doc["alpha"] = alpha;
  doc["quantize"] = {{"x", quantize_x}, {"bits", quantize_bits}, {"eps", quantize_eps}};
  return doc;
}

void ExperimentConfig::validate(std::string_view subcommand) const {
  if (!seed) throw ConfigError("config: 'seed' is required for reproducibility");
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("config: alphas must lie in (0, 1)");
  }
  if (subcommand == "quantize") {
    if (quantize_x.empty()) throw ConfigError("config: quantize.x must be non-empty");
    for (double e : quantize_eps) {
      if (!(e > 0.0 && e < 1.0)) throw ConfigError("config: quantize.eps must lie in (0, 1)");
    }
    return;
  }
  scenario.validate();
  if (tests.empty()) throw ConfigError("config: 'tests' must list at least one test");
  for (const auto& t : tests) {
    if (!is_registered_test(t)) {
      std::string msg = "unknown test '" + t + "'; registered tests:";
      for (const auto& n : registered_test_names()) msg += " " + n;
      msg += " (plus pvalue:generalized_mean(<r>))";
      throw UnknownTestError(msg);
    }
  }
  if (reps < 1) throw ConfigError("config: 'reps' must be positive");
  if (subcommand == "risk" && reps < 100) {
    throw ConfigError("config: risk estimation needs reps >= 100");
  }
  if (subcommand == "rates") {
    if (grid.d.empty() || grid.m.empty() || grid.n.empty() || c_values.empty()) {
      throw ConfigError("config: rates needs grid.d, grid.m, grid.n and c_values");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("config: 'alpha' must lie in (0, 1)");
  }
  if (subcommand == "calibrate" && calibration_reps < 1000) {
    throw ConfigError("config: calibration_reps must be >= 1000");
  }
}

void apply_overrides(ExperimentConfig& c, const Overrides& o) {
  if (o.seed) c.seed = *o.seed;
  if (o.reps) c.reps = *o.reps;
  if (o.out) c.out = *o.out;
  if (o.format) c.format = parse_output_format(*o.format);
  if (o.tests) c.tests = split_commas(*o.tests);
}

}  // namespace mnm
