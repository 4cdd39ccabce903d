#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kinorrt/lti.hpp"
#include "kinorrt/planner.hpp"
#include "kinorrt/world.hpp"

namespace kinorrt {

/// How a scenario names its dynamics: a built-in model ("double_integrator"
/// or "quadrotor") or explicit matrices.
struct SystemSpec {
  enum class Penalty { none, builtin, matrix };

  std::string builtin;  // empty for explicit matrices
  QuadrotorParams quadrotor;
  Matrix A, B, R;
  Vector c;
  /// Overrides the built-in partition; required for explicit matrices.
  std::optional<int> n1;
  Penalty penalty = Penalty::none;
  Matrix S;  // used when penalty == matrix

  bool operator==(const SystemSpec& other) const;
};

struct BuiltSystem {
  LinearSystem system;
  std::optional<TerminalPenalty> penalty;
};

/// Throws InvalidScenario for an unknown built-in name and DimensionMismatch
/// (naming the field) for inconsistent matrices.
BuiltSystem build_system(const SystemSpec& spec);

struct Scenario {
  SystemSpec system;
  Environment environment;
  Vector start;
  PlannerConfig planner;
  std::vector<PlannerMode> modes;
  std::vector<std::uint64_t> seeds;

  bool operator==(const Scenario& other) const;
};

inline const std::vector<std::string> kBuiltinScenarios = {"double_integrator", "quadrotor"};

/// Parse and validate scenario text. `source` prefixes error locations.
/// Throws ParseError (line and column) for malformed text, InvalidScenario
/// or DimensionMismatch (field path) for content errors.
Scenario parse_scenario(std::string_view text, const std::string& source = "<scenario>");
/// Throws IoError when the file cannot be read.
Scenario load_scenario(const std::filesystem::path& path);

std::string dump_scenario(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

/// The shipped benchmark maps. Throws InvalidScenario for an unknown name.
Scenario builtin_scenario(std::string_view name);

}  // namespace kinorrt
