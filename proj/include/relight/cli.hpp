#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "relight/losses.hpp"
#include "relight/shadow.hpp"

namespace relight {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitCheckFailed = 3,
};

/// Settings shared by the subcommands. Command-line flags override values read from a
/// JSON config file; unset optionals fall back to per-command defaults.
struct RunConfig {
  std::optional<std::string> scene;
  std::optional<std::string> depth;
  std::optional<double> spacing;
  std::optional<std::string> albedo;
  std::optional<std::string> out;

  std::optional<double> azimuth_deg;
  std::optional<double> elevation_deg;
  std::optional<std::array<double, 3>> light_vec;
  std::optional<double> ambient;
  std::optional<double> directional;

  ShadowConfig shadow;
  LossWeights weights;

  std::optional<std::string> target;
  std::optional<std::string> free;
  std::optional<int> iters;
  std::optional<double> lr;
  std::optional<double> tolerance;

  std::optional<int> frames;
  std::optional<std::array<double, 2>> azimuth_range;
  std::optional<std::array<double, 2>> elevation_range;

  std::optional<int> workers;
  std::optional<double> gamma;
};

/// Parses a JSON run config. Every rejected field raises UsageError naming it; syntax
/// errors report the line and column.
RunConfig parse_run_config(const std::string& json_text);

/// Runs the tool with argv-style arguments (without the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, char** argv);

}  // namespace relight
