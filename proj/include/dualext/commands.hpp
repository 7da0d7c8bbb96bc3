#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dualext/config.hpp"

namespace dualext {

inline constexpr const char* kToolVersion = "dualext 0.1.0";
inline constexpr int kSchemaVersion = 1;

enum class Command { check, sweep, oracle };

/// Command-line values that replace the config file entries.
struct Overrides {
  std::optional<std::string> out;
  std::optional<OutputFormat> format;
  std::optional<std::vector<int>> meshes;
  std::optional<double> tol;
};

void apply_overrides(ScenarioConfig& c, const Overrides& o);

/// "64,128,256" -> {64, 128, 256}.
std::vector<int> parse_mesh_list(const std::string& text);

/// Rendered output and exit status:
///   check   0 dissipative, 1 not, 2 outside the theory or error
///   sweep   0 written, 2 error
///   oracle  0 agreement or margin below resolution, 1 disagreement, 2 otherwise
/// Inputs rejected as not dissipative (Im h < 0) exit with 1.
struct CommandOutput {
  int exit_code = 0;
  std::string text;
};

CommandOutput run_check(const ScenarioConfig& c);
/// Row-major over the boundary parameter: Re outer, Im inner. threads = 0
/// uses the hardware concurrency.
CommandOutput run_sweep(const ScenarioConfig& c, unsigned threads = 0);
CommandOutput run_oracle(const ScenarioConfig& c);

CommandOutput error_output(ErrorCode code, const std::string& message);

/// Loads the config, applies overrides, runs and writes to the output path
/// ("-" writes to out). Returns the exit status.
int run_command(Command cmd, const std::string& config_path, const Overrides& o, std::ostream& out);

}  // namespace dualext
