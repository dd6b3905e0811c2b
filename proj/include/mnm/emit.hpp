#pragma once

// Result serialization. CSV and JSON are byte-deterministic functions of the
// results and the config echo; SVG is presentation only.
//
// CSV files start with a single "# config: <json>" line when a config echo is
// given, followed by the header:
//   roc        alpha,fpr,tpr,test,reps,seed
//   risk       test,alpha,type1,type1_band,type2,type2_band,reps,seed,d,n,m,rho,signal_law
//   rates      d,m,n,c,rate,rho2,test,alpha,power,band,supported,reps,seed
//   calibrate  test,d,n,m,alpha,kappa,reps,seed
//   quantize   x,bits,approx,error,bound

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mnm/harness.hpp"
#include "mnm/metatest.hpp"

namespace mnm {

enum class OutputFormat { csv, json, svg };

/// Throws ConfigError.
OutputFormat parse_output_format(std::string_view name);

struct CalibrationRecord {
  std::string test;
  Scenario scenario;
  CalibrationTable table;
};

struct QuantizeRow {
  double x = 0.0;
  int bits = 0;
  double approx = 0.0;
  double error = 0.0;
  double bound = 0.0;
};

using ResultSet = std::variant<std::vector<RocCurve>, std::vector<RiskEstimate>,
                               RateSweepResult, std::vector<CalibrationRecord>,
                               std::vector<QuantizeRow>>;

/// Shortest round-trip decimal form of a double.
std::string format_real(double v);

/// Throws ConfigError for svg with anything other than ROC curves.
std::string render(const ResultSet& results, OutputFormat format,
                   std::string_view config_echo = {});

/// Writes render(...) to `path`; throws std::runtime_error if the file cannot
/// be written.
void emit(const ResultSet& results, OutputFormat format,
          const std::filesystem::path& path, std::string_view config_echo = {});

}  // namespace mnm
