#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dualext/criteria.hpp"
#include "dualext/oracle.hpp"

namespace dualext {

/// Config file format: INI-style sections with key = value lines, comments
/// starting with # or ;.
///
///   [scenario]   name (halfline_laplacian | inverse_square_interval |
///                first_order_interval | halfline_schrodinger, or the aliases
///                potsdam | shirley | konzert), criterion, and the scenario
///                parameters (see scenario_keys)
///   [grid]       n, R, offset
///   [oracle]     meshes (comma list), tol, R
///   [output]     format (json | csv), path (- for stdout)
///   [sweep]      re_min, re_max, re_step, im_min, im_max, im_step
struct GridConfig {
  std::optional<int> n;
  std::optional<double> radius;
  double offset = 0.0;
  bool operator==(const GridConfig&) const = default;
};

struct OracleConfig {
  std::vector<int> meshes = kDefaultMeshes;
  double tol = kOracleTolerance;
  double radius = OracleOptions{}.halfline_radius;
  bool operator==(const OracleConfig&) const = default;
};

enum class OutputFormat { json, csv };

struct OutputConfig {
  OutputFormat format = OutputFormat::json;
  std::string path = "-";
  bool operator==(const OutputConfig&) const = default;
};

struct Axis {
  double min = 0.0;
  double max = 0.0;
  double step = 0.0;
  bool operator==(const Axis&) const = default;
  /// min, min + step, ... up to max; requires step > 0 and max >= min.
  std::vector<double> points() const;
};

struct SweepConfig {
  Axis re;
  Axis im;
  bool operator==(const SweepConfig&) const = default;
};

struct ScenarioConfig {
  Scenario scenario = Scenario::halfline_laplacian;
  std::optional<Criterion> criterion;
  /// Scenario parameters as written (constants or expressions in x).
  std::map<std::string, std::string> params;
  GridConfig grid;
  OracleConfig oracle;
  OutputConfig output;
  std::optional<SweepConfig> sweep;
  bool operator==(const ScenarioConfig&) const = default;
};

/// Keys accepted in [scenario] for a scenario, required ones first.
struct ScenarioKeys {
  std::vector<std::string> required;
  std::vector<std::string> optional;
};
ScenarioKeys scenario_keys(Scenario s);

/// Parses and validates. Errors carry ErrorCode::parse_error (syntax) or
/// invalid_argument (values) and a "line L, column C:" prefix.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
std::string serialize_config(const ScenarioConfig& c);

/// Grid used for the scenario with the config overrides applied.
GridPtr make_scenario_grid(const ScenarioConfig& c);
/// Builds the problem; rho (or h) can be replaced, as done by the sweep.
ExtensionProblem build_problem(const ScenarioConfig& c, std::optional<ExtendedComplex> boundary = {});
/// Name of the boundary parameter swept for the scenario, if any.
std::optional<std::string> boundary_key(Scenario s);

ExtendedComplex parse_extended(const std::string& text);

}  // namespace dualext
