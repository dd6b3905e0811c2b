#pragma once

// Experiment configuration: a JSON document whose keys mirror the fields
// below. Command-line flags override file keys. The resolved config is echoed
// into every output file so that a run can be replayed byte for byte.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mnm/emit.hpp"
#include "mnm/harness.hpp"
#include "mnm/model.hpp"

namespace mnm {

struct ExperimentConfig {
  std::optional<std::uint64_t> seed;
  Scenario scenario;
  std::vector<std::string> tests;
  std::vector<double> alphas;
  std::uint64_t reps = 2000;
  std::uint64_t calibration_reps = 100'000;
  unsigned workers = 0;
  std::string out;
  OutputFormat format = OutputFormat::csv;
  bool worst_case_probe = false;

  // rates
  RateGrid grid;
  std::vector<double> c_values;
  RateFormula rate = RateFormula::sqrt_m;
  double alpha = 0.05;

  // quantize
  std::vector<double> quantize_x;
  std::vector<int> quantize_bits;
  std::vector<double> quantize_eps;

  /// Throws ConfigError on malformed or mistyped keys. Unknown keys are
  /// rejected.
  static ExperimentConfig from_json(const nlohmann::json& doc);
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Fully resolved document (defaults filled in).
  nlohmann::json to_json() const;

  /// Checks the keys `subcommand` needs: seed always; tests must be
  /// registered (UnknownTestError otherwise); alphas in (0, 1).
  void validate(std::string_view subcommand) const;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> reps;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<std::string> tests;  // comma-separated
};

void apply_overrides(ExperimentConfig& config, const Overrides& overrides);

}  // namespace mnm
