#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "config.hpp"
#include "io.hpp"

namespace paultrap::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitDiverged = 4,
};

struct RunOptions {
  std::string experiment;
  std::filesystem::path config;
  std::filesystem::path out = "out";
  std::size_t jobs = 1;
  bool long_runs = false;
  /// Seconds between heartbeat lines on stderr; 0 disables them.
  double heartbeat_s = 30.0;
};

struct StepEstimate {
  double total = 0.0;    // summed over every integration of the experiment
  double longest = 0.0;  // the longest single integration
};

StepEstimate estimated_steps(const RunConfig& cfg);

/// A single integration above this many steps needs --long-runs.
inline constexpr double kLongRunSteps = 5e9;

/// Runs one experiment and writes its outputs plus manifest.json into out.
/// Returns the summary printed on stdout; "status" is "ok" or "diverged".
Json run_configured(const RunConfig& cfg, OutputDir& out, const RunOptions& options);

/// Full command: load, guard, run, manifest. On failure writes error.json
/// (when the output directory is usable) and prints the error JSON on stdout.
int run_command(const RunOptions& options, std::ostream& stdout_stream);

}  // namespace paultrap::cli
