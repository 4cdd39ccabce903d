#include "kinorrt/bench.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "kinorrt/errors.hpp"

namespace kinorrt::bench {
namespace {

const std::filesystem::path kScenarioDir = KINORRT_SCENARIO_DIR;
constexpr double kInf = std::numeric_limits<double>::infinity();

ConvergenceRecord record(int iteration, std::size_t nodes, double elapsed,
                         std::optional<double> best, std::uint64_t seed = 1,
                         PlannerMode mode = PlannerMode::kino) {
  return ConvergenceRecord{mode, seed, iteration, nodes, elapsed, best};
}

RunOptions quiet(int iterations, std::ostream* stream = nullptr) {
  RunOptions o;
  o.wall_clock = false;
  o.iterations = iterations;
  o.stream = stream;
  return o;
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(4.0), "4");
  EXPECT_EQ(format_number(1e-7), "1e-07");
  for (double v : {1.0 / 3.0, 16.503117, 2.5e300, -0.0625}) {
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
}

TEST(Csv, RoundTrip) {
  const std::vector<ConvergenceRecord> records = {
      record(1, 2, 0.001, std::nullopt), record(100, 57, 0.25, 31.5),
      record(140, 80, 0.375, 1.0 / 3.0, 2, PlannerMode::baseline_delayed)};
  std::stringstream out;
  write_csv(out, records);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), kCsvHeader);
  EXPECT_NE(text.find("kino,1,1,2,0.001,\n"), std::string::npos);
  std::stringstream in(text);
  EXPECT_EQ(read_csv(in), records);
}

TEST(Csv, MalformedInput) {
  std::stringstream bad_header("mode,seed\nkino,1,1,2,0,\n");
  EXPECT_THROW(read_csv(bad_header), ParseError);
  std::stringstream bad_mode(std::string(kCsvHeader) + "\nrrt,1,1,2,0,\n");
  EXPECT_THROW(read_csv(bad_mode), ParseError);
  std::stringstream short_row(std::string(kCsvHeader) + "\nkino,1,1,2\n");
  try {
    read_csv(short_row, "log.csv");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
}

TEST(Quantile, LinearInterpolation) {
  EXPECT_EQ(quantile({4, 1, 3, 2}, 0.5), 2.5);
  EXPECT_EQ(quantile({4, 1, 3, 2}, 0.25), 1.75);
  EXPECT_EQ(quantile({7}, 0.75), 7.0);
  EXPECT_EQ(quantile({1, 2, kInf}, 0.5), 2.0);
  EXPECT_EQ(quantile({1, 2, kInf}, 0.75), kInf);
  EXPECT_EQ(quantile({1, kInf, kInf}, 0.5), kInf);
  EXPECT_EQ(quantile({}, 0.5), kInf);
}

TEST(BestCostAt, StepFunction) {
  const std::vector<ConvergenceRecord> run = {record(10, 5, 0.1, std::nullopt),
                                              record(20, 9, 0.2, 30.0), record(30, 14, 0.3, 25.0)};
  EXPECT_EQ(best_cost_at(run, Axis::nodes, 4), kInf);
  EXPECT_EQ(best_cost_at(run, Axis::nodes, 5), kInf);
  EXPECT_EQ(best_cost_at(run, Axis::nodes, 9), 30.0);
  EXPECT_EQ(best_cost_at(run, Axis::nodes, 13.9), 30.0);
  EXPECT_EQ(best_cost_at(run, Axis::elapsed_s, 100.0), 25.0);
}

TEST(Aggregate, QuartilesAcrossSeeds) {
  std::vector<ConvergenceRecord> records;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    records.push_back(record(100, 10, 0.5, 10.0 * static_cast<double>(seed), seed));
  }
  records.push_back(record(100, 10, 0.5, std::nullopt, 1, PlannerMode::baseline));
  const auto rows = aggregate(records);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], (AggregateRow{PlannerMode::kino, Axis::nodes, 10, 4, 17.5, 25, 32.5}));
  EXPECT_EQ(rows[1].axis, Axis::elapsed_s);
  EXPECT_EQ(rows[2].mode, PlannerMode::baseline);
  EXPECT_EQ(rows[2].median, kInf);

  std::stringstream out;
  write_table(out, rows);
  EXPECT_NE(out.str().find("kino,nodes,10,4,17.5,25,32.5\n"), std::string::npos);
  EXPECT_NE(out.str().find("baseline,nodes,10,1,,,\n"), std::string::npos);
}

TEST(Run, ZeroIterations) {
  const Scenario s = load_scenario(kScenarioDir / "double_integrator.json");
  std::stringstream stream;
  const RunResult r = run(s, PlannerMode::kino, 1, quiet(0, &stream));
  EXPECT_TRUE(r.records.empty());
  EXPECT_EQ(stream.str(), std::string(kCsvHeader) + "\n");
  EXPECT_EQ(r.tree.size(), 1u);
  EXPECT_EQ(r.summary.nodes, 1u);
  EXPECT_FALSE(r.summary.best_cost.has_value());
}

TEST(Run, DoubleIntegratorFindsGoalWithin400) {
  const Scenario s = load_scenario(kScenarioDir / "double_integrator.json");
  const RunResult r = run(s, PlannerMode::kino, 1, quiet(400));
  ASSERT_TRUE(r.summary.best_cost.has_value());
  EXPECT_GE(r.summary.path_nodes, 2u);
  EXPECT_EQ(r.records.back().best_cost, r.summary.best_cost);
  EXPECT_EQ(r.records.back().iteration, 400);
}

TEST(Run, ByteIdenticalStreams) {
  const Scenario s = load_scenario(kScenarioDir / "double_integrator.json");
  for (PlannerMode mode : {PlannerMode::kino, PlannerMode::baseline}) {
    std::stringstream a, b;
    run(s, mode, 3, quiet(250, &a));
    run(s, mode, 3, quiet(250, &b));
    EXPECT_EQ(a.str(), b.str());
    EXPECT_GT(a.str().size(), std::string(kCsvHeader).size() + 1);
  }
}

TEST(Run, RecordInvariants) {
  const Scenario s = load_scenario(kScenarioDir / "quadrotor.json");
  const RunResult r = run(s, PlannerMode::kino, 2, quiet(300));
  ASSERT_FALSE(r.records.empty());
  for (std::size_t i = 1; i < r.records.size(); ++i) {
    EXPECT_GT(r.records[i].iteration, r.records[i - 1].iteration);
    EXPECT_GE(r.records[i].nodes, r.records[i - 1].nodes);
    if (r.records[i - 1].best_cost) {
      ASSERT_TRUE(r.records[i].best_cost.has_value());
      EXPECT_LE(*r.records[i].best_cost, *r.records[i - 1].best_cost);
    }
  }
}

TEST(Compare, SingleRunTableIsItsRecordStream) {
  const Scenario s = load_scenario(kScenarioDir / "double_integrator.json");
  CompareOptions o;
  o.wall_clock = false;
  o.iterations = 300;
  const Comparison c = compare(s, {PlannerMode::kino}, {1}, o);
  const RunResult r = run(s, PlannerMode::kino, 1, quiet(300));
  EXPECT_EQ(c.records, r.records);
  std::size_t node_rows = 0;
  for (const AggregateRow& row : c.table) {
    if (row.axis != Axis::nodes) continue;
    ++node_rows;
    EXPECT_EQ(row.runs, 1);
    // the last record at this node count
    const ConvergenceRecord* last = nullptr;
    for (const auto& rec : r.records) {
      if (static_cast<double>(rec.nodes) <= row.x) last = &rec;
    }
    ASSERT_NE(last, nullptr);
    const double expected = last->best_cost ? *last->best_cost : kInf;
    EXPECT_EQ(row.q1, expected);
    EXPECT_EQ(row.median, expected);
    EXPECT_EQ(row.q3, expected);
  }
  std::set<std::size_t> distinct;
  for (const auto& rec : r.records) distinct.insert(rec.nodes);
  EXPECT_EQ(node_rows, distinct.size());
}

TEST(Compare, ParallelMatchesSerialAndReaggregates) {
  const Scenario s = load_scenario(kScenarioDir / "double_integrator.json");
  CompareOptions o;
  o.wall_clock = false;
  o.iterations = 150;
  const Comparison serial = compare(s, {PlannerMode::kino, PlannerMode::baseline}, {1, 2, 3}, o);
  o.jobs = 4;
  const Comparison parallel = compare(s, {PlannerMode::kino, PlannerMode::baseline}, {1, 2, 3}, o);
  EXPECT_EQ(serial.records, parallel.records);
  EXPECT_EQ(serial.table, parallel.table);
  EXPECT_EQ(aggregate(serial.records), serial.table);
  std::stringstream csv;
  write_csv(csv, serial.records);
  EXPECT_EQ(aggregate(read_csv(csv)), serial.table);
  EXPECT_THROW(compare(s, {}, {1}, o), InvalidInput);
}

TEST(Validate, BuiltInSystemsPass) {
  for (const char* name : {"double_integrator", "quadrotor"}) {
    const OracleReport report = validate(name);
    EXPECT_TRUE(report.passed()) << name;
    EXPECT_GE(report.checks.size(), 4u);
    for (const auto& check : report.checks) {
      EXPECT_TRUE(check.passed) << name << ": " << check.name << " residual " << check.residual;
    }
  }
  EXPECT_THROW(validate("unicycle"), InvalidScenario);
}

TEST(Validate, DoubleIntegratorAnalyticCase) {
  const OracleReport report = validate("double_integrator");
  std::stringstream out;
  write_report(out, report);
  bool seen = false;
  for (const auto& check : report.checks) {
    if (check.name.find("analytic") == std::string::npos) continue;
    seen = true;
    EXPECT_LE(check.tolerance, 1e-6);
  }
  EXPECT_TRUE(seen);
  EXPECT_NE(out.str().find("PASS"), std::string::npos);
}

// Moves the start into the first obstacle.
std::string replace_start(std::string text) {
  const std::string from = "\"start\": [1.0, 1.0, 0.0, 0.0]";
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos);
  return text.replace(pos, from.size(), "\"start\": [5.0, 5.0, 0.0, 0.0]");
}

int cli(const std::string& args) {
  const std::string cmd = std::string(KINORRT_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  const auto dir = std::filesystem::temp_directory_path() / "kinorrt_cli_test";
  std::filesystem::create_directories(dir);
  const std::string scenario = (kScenarioDir / "double_integrator.json").string();
  EXPECT_EQ(cli("validate double_integrator"), 0);
  EXPECT_EQ(cli("validate unicycle"), 1);
  EXPECT_EQ(cli("plan " + (dir / "missing.json").string()), 2);
  EXPECT_EQ(cli("plan " + scenario + " --mode teleport"), 2);
  EXPECT_EQ(cli("plan"), 2);

  const auto a = dir / "a.csv", b = dir / "b.csv";
  EXPECT_EQ(cli("plan " + scenario + " --seed 2 --iterations 120 --no-timing --out " + a.string()), 0);
  EXPECT_EQ(cli("plan " + scenario + " --seed 2 --iterations 120 --no-timing --out " + b.string()), 0);
  std::ifstream fa(a), fb(b);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(sa.str().rfind(kCsvHeader, 0), 0u);

  const auto init = dir / "quad.json";
  EXPECT_EQ(cli("scenario init quadrotor --out " + init.string()), 0);
  EXPECT_EQ(load_scenario(init), builtin_scenario("quadrotor"));

  const auto broken = dir / "broken.json";
  std::ofstream(broken) << "{ \"system\": ";
  EXPECT_EQ(cli("plan " + broken.string()), 2);
  std::ofstream(broken, std::ios::trunc)
      << replace_start(dump_scenario(builtin_scenario("double_integrator")));
  EXPECT_EQ(cli("plan " + broken.string()), 1);

  const auto table = dir / "table.csv";
  EXPECT_EQ(cli("compare " + scenario + " --modes kino,baseline --seeds 1..2 --iterations 60 "
                "--no-timing --jobs 2 --out " + table.string()),
            0);
  EXPECT_EQ(cli("compare " + scenario + " --seeds 5..1 --out " + table.string()), 2);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace kinorrt::bench
