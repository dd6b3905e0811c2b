#pragma once

// Batch entry point: resolves a config, runs one experiment and writes the
// result file. Exit status 0 on success, 1 on invalid config or runtime
// failure, 2 on an unknown test name.

#include <filesystem>
#include <iosfwd>
#include <string_view>

#include "mnm/config.hpp"

namespace mnm {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUnknownTest = 2;

/// subcommand is one of roc, risk, rates, calibrate, quantize. When
/// config.out is empty the rendered result goes to `out`; otherwise it is
/// written to that file and only the per-test summary lines go to `out`.
int run(std::string_view subcommand, ExperimentConfig config, std::ostream& out,
        std::ostream& err);

/// Loads `config_path` (may be empty: start from defaults), applies the
/// overrides and runs.
int run(std::string_view subcommand, const std::filesystem::path& config_path,
        const Overrides& overrides, std::ostream& out, std::ostream& err);

}  // namespace mnm
