#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kinorrt/planner.hpp"
#include "kinorrt/scenario.hpp"

namespace kinorrt::bench {

struct ConvergenceRecord {
  PlannerMode mode = PlannerMode::kino;
  std::uint64_t seed = 0;
  int iteration = 0;
  std::size_t nodes = 0;
  double elapsed_s = 0.0;
  std::optional<double> best_cost;
  bool operator==(const ConvergenceRecord&) const = default;
};

inline constexpr const char* kCsvHeader = "mode,seed,iteration,nodes,elapsed_s,best_cost";

/// Shortest text that reads back to the same double.
std::string format_number(double value);
std::string to_csv_row(const ConvergenceRecord& record);
void write_csv(std::ostream& out, const std::vector<ConvergenceRecord>& records);
/// Inverse of write_csv; throws ParseError on malformed rows.
std::vector<ConvergenceRecord> read_csv(std::istream& in, const std::string& source = "<csv>");

struct RunOptions {
  /// When false every elapsed_s is written as 0, making streams byte-comparable.
  bool wall_clock = true;
  std::optional<int> iterations;
  Planner::Observer observer;
  /// Rows are written and flushed here as they are produced (header first).
  std::ostream* stream = nullptr;
};

struct TreeSummary {
  std::size_t nodes = 0;
  std::optional<double> best_cost;
  /// Nodes on the best root-to-goal path, root included.
  std::size_t path_nodes = 0;
};

struct RunResult {
  std::vector<ConvergenceRecord> records;
  Tree tree;
  TreeSummary summary;
};

RunResult run(const Scenario& scenario, PlannerMode mode, std::uint64_t seed,
              const RunOptions& options = {});

enum class Axis { nodes, elapsed_s };

/// One row of the comparison table: quartiles of best cost across the
/// (mode, seed) runs of one mode at one grid value. Runs without a solution
/// at that point count as +infinity.
struct AggregateRow {
  PlannerMode mode = PlannerMode::kino;
  Axis axis = Axis::nodes;
  double x = 0.0;
  int runs = 0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  bool operator==(const AggregateRow&) const = default;
};

inline constexpr const char* kTableHeader = "mode,axis,x,runs,q1,median,q3";

/// Best cost of one run at grid value x: the value of its last record with
/// axis coordinate <= x, +infinity if none.
double best_cost_at(const std::vector<ConvergenceRecord>& run, Axis axis, double x);

/// Linear-interpolation quantile (q in [0, 1]) of an unsorted sample.
double quantile(std::vector<double> values, double q);

/// Per-mode quartiles on the union grid of every record's node count and
/// elapsed time. Rows are ordered by mode (first appearance), axis, x.
std::vector<AggregateRow> aggregate(const std::vector<ConvergenceRecord>& records);

void write_table(std::ostream& out, const std::vector<AggregateRow>& rows);

struct CompareOptions {
  bool wall_clock = true;
  std::optional<int> iterations;
  /// Concurrent trials; results are merged in (mode, seed) order.
  int jobs = 1;
  Planner::Observer observer;
};

struct Comparison {
  std::vector<ConvergenceRecord> records;
  std::vector<AggregateRow> table;
};

Comparison compare(const Scenario& scenario, const std::vector<PlannerMode>& modes,
                   const std::vector<std::uint64_t>& seeds, const CompareOptions& options = {});

struct OracleCheck {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct OracleReport {
  std::string system;
  std::vector<OracleCheck> checks;
  bool passed() const;
};

/// Analytic and brute-force checks of the steering and Gramian code for a
/// built-in system. Throws InvalidScenario for an unknown name.
OracleReport validate(const std::string& system_name);
void write_report(std::ostream& out, const OracleReport& report);

}  // namespace kinorrt::bench
