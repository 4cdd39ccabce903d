// Command-line front end: plan, compare, validate, scenario init.
// Exit codes: 0 success, 1 validation failure, 2 I/O or parse error.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "kinorrt/bench.hpp"
#include "kinorrt/errors.hpp"
#include "kinorrt/scenario.hpp"

namespace {

using namespace kinorrt;

constexpr int kValidationFailure = 1;
constexpr int kIoFailure = 2;

std::vector<PlannerMode> parse_modes(const std::string& text) {
  std::vector<PlannerMode> modes;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto m = parse_mode(item);
    if (!m) throw CLI::ValidationError("--modes", "unknown mode '" + item + "'");
    modes.push_back(*m);
  }
  if (modes.empty()) throw CLI::ValidationError("--modes", "no modes given");
  return modes;
}

// "1..10", "3" or "1,4,9"
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  try {
    if (auto dots = text.find(".."); dots != std::string::npos) {
      const auto lo = std::stoull(text.substr(0, dots));
      const auto hi = std::stoull(text.substr(dots + 2));
      if (hi < lo) throw CLI::ValidationError("--seeds", "empty range");
      for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    } else {
      std::stringstream in(text);
      std::string item;
      while (std::getline(in, item, ',')) seeds.push_back(std::stoull(item));
    }
  } catch (const std::logic_error&) {
    throw CLI::ValidationError("--seeds", "expected a range like 1..10 or a list like 1,2,3");
  }
  if (seeds.empty()) throw CLI::ValidationError("--seeds", "no seeds given");
  return seeds;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kinodynamic RRT* planning with partial-final-state-free steering"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string mode_name = "kino";
  std::uint64_t seed = 1;
  std::string out_path;
  std::optional<int> iterations;
  bool no_timing = false;

  auto* plan_cmd = app.add_subcommand("plan", "Run one planner and emit its convergence log");
  plan_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
  plan_cmd->add_option("--mode", mode_name, "kino, baseline, kino_delayed or baseline_delayed");
  plan_cmd->add_option("--seed", seed, "Random seed");
  plan_cmd->add_option("--out", out_path, "CSV output (default: stdout)");
  plan_cmd->add_option("--iterations", iterations, "Override the scenario's iteration count");
  plan_cmd->add_flag("--no-timing", no_timing, "Write elapsed_s as 0 for byte-stable output");

  std::string modes_text = "kino,baseline";
  std::string seeds_text = "1..10";
  std::string records_path;
  int jobs = 1;
  auto* compare_cmd = app.add_subcommand("compare", "Run modes x seeds and tabulate quartiles");
  compare_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
  compare_cmd->add_option("--modes", modes_text, "Comma-separated modes");
  compare_cmd->add_option("--seeds", seeds_text, "Seed range a..b or list");
  compare_cmd->add_option("--out", out_path, "Comparison table CSV")->required();
  compare_cmd->add_option("--records", records_path, "Also write the raw convergence records");
  compare_cmd->add_option("--iterations", iterations, "Override the scenario's iteration count");
  compare_cmd->add_option("--jobs", jobs, "Concurrent trials")->check(CLI::PositiveNumber);
  compare_cmd->add_flag("--no-timing", no_timing, "Write elapsed_s as 0 for byte-stable output");

  std::string system_name;
  auto* validate_cmd = app.add_subcommand("validate", "Run the oracle checks for a built-in system");
  validate_cmd->add_option("system", system_name, "double_integrator or quadrotor")->required();

  std::string builtin_name;
  auto* scenario_cmd = app.add_subcommand("scenario", "Scenario file utilities");
  scenario_cmd->require_subcommand(1);
  auto* init_cmd = scenario_cmd->add_subcommand("init", "Write a built-in scenario to a file");
  init_cmd->add_option("builtin", builtin_name, "double_integrator or quadrotor")->required();
  init_cmd->add_option("--out", out_path, "Output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kIoFailure;
  }

  try {
    if (*plan_cmd) {
      const auto mode = parse_mode(mode_name);
      if (!mode) {
        std::cerr << "error: unknown mode '" << mode_name << "'\n";
        return kIoFailure;
      }
      const Scenario scenario = load_scenario(scenario_path);
      std::ofstream file;
      if (!out_path.empty()) file = open_output(out_path);
      bench::RunOptions options;
      options.wall_clock = !no_timing;
      options.iterations = iterations;
      options.stream = out_path.empty() ? static_cast<std::ostream*>(&std::cout) : &file;
      const auto result = bench::run(scenario, *mode, seed, options);
      std::cerr << "nodes=" << result.summary.nodes << " best_cost="
                << (result.summary.best_cost ? bench::format_number(*result.summary.best_cost) : "none")
                << " path_nodes=" << result.summary.path_nodes << '\n';
      return 0;
    }
    if (*compare_cmd) {
      const auto modes = parse_modes(modes_text);
      const auto seeds = parse_seeds(seeds_text);
      const Scenario scenario = load_scenario(scenario_path);
      bench::CompareOptions options;
      options.wall_clock = !no_timing;
      options.iterations = iterations;
      options.jobs = jobs;
      const auto cmp = bench::compare(scenario, modes, seeds, options);
      auto out = open_output(out_path);
      bench::write_table(out, cmp.table);
      if (!records_path.empty()) {
        auto rec = open_output(records_path);
        bench::write_csv(rec, cmp.records);
      }
      return 0;
    }
    if (*validate_cmd) {
      const auto report = bench::validate(system_name);
      bench::write_report(std::cout, report);
      return report.passed() ? 0 : kValidationFailure;
    }
    if (*init_cmd) {
      save_scenario(builtin_scenario(builtin_name), out_path);
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const InvalidScenario& e) {
    std::cerr << "invalid scenario: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationFailure;
  }
  return 0;
}
