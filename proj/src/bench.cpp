#include "kinorrt/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "kinorrt/errors.hpp"
#include "kinorrt/oracles.hpp"
#include "kinorrt/steering.hpp"
#include "kinorrt/trajectory.hpp"

namespace kinorrt::bench {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string optional_number(double v) { return std::isfinite(v) ? format_number(v) : ""; }

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

template <typename T>
bool parse_field(const std::string& text, T& value) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc() && ptr == end;
}

double axis_value(const ConvergenceRecord& r, Axis axis) {
  return axis == Axis::nodes ? static_cast<double>(r.nodes) : r.elapsed_s;
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string to_csv_row(const ConvergenceRecord& r) {
  std::string row = std::string(to_string(r.mode)) + "," + std::to_string(r.seed) + "," +
                    std::to_string(r.iteration) + "," + std::to_string(r.nodes) + "," +
                    format_number(r.elapsed_s) + ",";
  if (r.best_cost) row += format_number(*r.best_cost);
  return row;
}

void write_csv(std::ostream& out, const std::vector<ConvergenceRecord>& records) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) out << to_csv_row(r) << '\n';
}

std::vector<ConvergenceRecord> read_csv(std::istream& in, const std::string& source) {
  std::vector<ConvergenceRecord> records;
  std::string line;
  int line_no = 0;
  auto bad = [&](const std::string& what) -> ParseError { return ParseError(source, line_no, 1, what); };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != kCsvHeader) throw bad("unexpected header");
      continue;
    }
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 6) throw bad("expected 6 fields");
    ConvergenceRecord r;
    auto mode = parse_mode(f[0]);
    if (!mode) throw bad("unknown mode '" + f[0] + "'");
    r.mode = *mode;
    if (!parse_field(f[1], r.seed) || !parse_field(f[2], r.iteration) ||
        !parse_field(f[3], r.nodes) || !parse_field(f[4], r.elapsed_s)) {
      throw bad("malformed number");
    }
    if (!f[5].empty()) {
      double c = 0.0;
      if (!parse_field(f[5], c)) throw bad("malformed best_cost");
      r.best_cost = c;
    }
    records.push_back(r);
  }
  return records;
}

RunResult run(const Scenario& scenario, PlannerMode mode, std::uint64_t seed,
              const RunOptions& options) {
  BuiltSystem built = build_system(scenario.system);
  PlannerConfig cfg = scenario.planner;
  cfg.mode = mode;
  cfg.seed = seed;
  if (options.iterations) cfg.iterations = *options.iterations;

  Planner planner(std::move(built.system), std::move(built.penalty), scenario.environment, cfg,
                  scenario.start);
  std::vector<ConvergenceRecord> records;
  if (options.stream) *options.stream << kCsvHeader << '\n' << std::flush;

  Planner::RunHooks hooks;
  hooks.observer = options.observer;
  if (!options.wall_clock) hooks.clock = [] { return 0.0; };
  hooks.on_entry = [&](const ConvergenceEntry& e) {
    records.push_back(ConvergenceRecord{mode, seed, e.iteration, e.nodes, e.elapsed_s, e.best_cost});
    if (options.stream) *options.stream << to_csv_row(records.back()) << '\n' << std::flush;
  };
  planner.run(hooks);

  TreeSummary summary;
  summary.nodes = planner.tree().size();
  if (auto path = best_solution(planner.tree(), planner.environment())) {
    summary.best_cost = path->cost;
    summary.path_nodes = path->nodes.size();
  }
  return RunResult{std::move(records), planner.tree(), summary};
}

double best_cost_at(const std::vector<ConvergenceRecord>& run, Axis axis, double x) {
  double best = kInf;
  for (const auto& r : run) {
    if (axis_value(r, axis) > x) break;
    best = r.best_cost ? *r.best_cost : kInf;
  }
  return best;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return kInf;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0 || values[lo] == values[hi]) return values[lo];
  if (std::isinf(values[hi])) return kInf;
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<AggregateRow> aggregate(const std::vector<ConvergenceRecord>& records) {
  std::vector<PlannerMode> mode_order;
  std::vector<std::pair<PlannerMode, std::uint64_t>> run_order;
  std::map<std::pair<PlannerMode, std::uint64_t>, std::vector<ConvergenceRecord>> runs;
  for (const auto& r : records) {
    if (std::find(mode_order.begin(), mode_order.end(), r.mode) == mode_order.end()) {
      mode_order.push_back(r.mode);
    }
    auto key = std::make_pair(r.mode, r.seed);
    if (!runs.count(key)) run_order.push_back(key);
    runs[key].push_back(r);
  }

  std::vector<AggregateRow> rows;
  for (PlannerMode mode : mode_order) {
    for (Axis axis : {Axis::nodes, Axis::elapsed_s}) {
      std::vector<double> grid;
      for (const auto& r : records) grid.push_back(axis_value(r, axis));
      std::sort(grid.begin(), grid.end());
      grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

      for (double x : grid) {
        std::vector<double> values;
        for (const auto& key : run_order) {
          if (key.first == mode) values.push_back(best_cost_at(runs[key], axis, x));
        }
        rows.push_back(AggregateRow{mode, axis, x, static_cast<int>(values.size()),
                                    quantile(values, 0.25), quantile(values, 0.5),
                                    quantile(values, 0.75)});
      }
    }
  }
  return rows;
}

void write_table(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << kTableHeader << '\n';
  for (const auto& r : rows) {
    out << to_string(r.mode) << ',' << (r.axis == Axis::nodes ? "nodes" : "elapsed_s") << ','
        << format_number(r.x) << ',' << r.runs << ',' << optional_number(r.q1) << ','
        << optional_number(r.median) << ',' << optional_number(r.q3) << '\n';
  }
}

Comparison compare(const Scenario& scenario, const std::vector<PlannerMode>& modes,
                   const std::vector<std::uint64_t>& seeds, const CompareOptions& options) {
  if (modes.empty() || seeds.empty()) throw InvalidInput("compare needs at least one mode and one seed");
  std::vector<std::pair<PlannerMode, std::uint64_t>> trials;
  for (PlannerMode m : modes) {
    for (std::uint64_t s : seeds) trials.emplace_back(m, s);
  }
  std::vector<std::vector<ConvergenceRecord>> results(trials.size());
  std::vector<std::exception_ptr> errors(trials.size());

  RunOptions run_options;
  run_options.wall_clock = options.wall_clock;
  run_options.iterations = options.iterations;
  run_options.observer = options.observer;

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < trials.size();) {
      try {
        results[i] = run(scenario, trials[i].first, trials[i].second, run_options).records;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(trials.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  Comparison out;
  for (auto& r : results) out.records.insert(out.records.end(), r.begin(), r.end());
  out.table = aggregate(out.records);
  return out;
}

bool OracleReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const OracleCheck& c) { return c.passed; });
}

namespace {

class Checks {
 public:
  explicit Checks(OracleReport& report) : report_(report) {}

  void add(std::string name, double residual, double tolerance) {
    report_.checks.push_back(OracleCheck{std::move(name), residual, tolerance,
                                         std::isfinite(residual) && residual <= tolerance});
  }

 private:
  OracleReport& report_;
};

Vector random_state(Rng& rng, int n, double scale) {
  Vector x(n);
  for (int i = 0; i < n; ++i) x(i) = uniform(rng, -scale, scale);
  return x;
}

void gramian_checks(Checks& checks, const LinearSystem& sys, const std::vector<double>& horizons) {
  for (double tf : horizons) {
    const Matrix G = weighted_gramian(sys, tf).matrix;
    checks.add("gramian vs quadrature, tf=" + format_number(tf),
               oracles::relative_error(G, oracles::quadrature_gramian(sys, tf)), 1e-8);
    checks.add("expm vs Taylor series, t=" + format_number(tf),
               oracles::relative_error(matrix_exponential(sys.A(), tf),
                                       oracles::taylor_exponential(sys.A(), tf)),
               1e-12);
  }
}

void transversality_checks(Checks& checks, const LinearSystem& sys,
                           const std::optional<TerminalPenalty>& penalty, double scale,
                           int instances) {
  Rng rng(7);
  double worst_terminal = 0.0;
  double worst_drift = 0.0;
  double worst_cost = 0.0;
  for (int k = 0; k < instances; ++k) {
    const Vector x_a = random_state(rng, sys.n(), scale);
    const Vector x_c = random_state(rng, sys.n1(), scale);
    const TimeBounds bounds = default_time_bounds((x_c.head(std::min(3, sys.n1())) -
                                                   x_a.head(std::min(3, sys.n1()))).norm());
    const SteeringSolution sol = penalty ? solve_pff_penalty_free_time(sys, *penalty, x_a, x_c, bounds)
                                         : solve_pff_free_time(sys, x_a, x_c, bounds);
    if (sol.boundary_solution) continue;
    worst_terminal = std::max(worst_terminal, std::abs(terminal_hamiltonian(sys, sol)));
    for (int i = 0; i <= 10; ++i) {
      worst_drift = std::max(worst_drift, std::abs(hamiltonian_residual(sys, sol, sol.tf * i / 10.0)));
    }
    const double simpson = oracles::simpson_running_cost(sys, sol) + sol.terminal_cost;
    worst_cost = std::max(worst_cost, std::abs(simpson - sol.cost) / sol.cost);
  }
  checks.add("free-time |H(tf)|", worst_terminal, 1e-6);
  checks.add("free-time |H(t)| along trajectory", worst_drift, 1e-6);
  checks.add("cost vs Simpson integral (relative)", worst_cost, 1e-6);
}

void penalty_reduction_check(Checks& checks, const LinearSystem& sys, double scale) {
  Rng rng(11);
  const TerminalPenalty zero(Matrix::Zero(sys.n2(), sys.n2()));
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Vector x_a = random_state(rng, sys.n(), scale);
    const Vector x_c = random_state(rng, sys.n1(), scale);
    const double tf = uniform(rng, 0.5, 5.0);
    const SteeringSolution a = solve_pff_fixed_time(sys, x_a, x_c, tf);
    const SteeringSolution b = solve_pff_penalty(sys, zero, x_a, x_c, tf);
    worst = std::max({worst, (a.x_end - b.x_end).norm() / (1.0 + a.x_end.norm()),
                      (a.lambda_tf - b.lambda_tf).norm() / (1.0 + a.lambda_tf.norm()),
                      std::abs(a.cost - b.cost) / (1.0 + a.cost)});
  }
  checks.add("S = 0 penalty reproduces PFF", worst, 1e-10);
}

void double_integrator_checks(Checks& checks) {
  namespace di = oracles::double_integrator_1d;
  const LinearSystem one = build_double_integrator(1);
  const Vector x_a = Vector::Zero(2);
  Vector x_c(1);
  x_c << 3.0;

  const SteeringSolution free = solve_pff_free_time(one, x_a, x_c);
  checks.add("1-D analytic tf = 3", std::abs(free.tf - di::pff_optimal_time(3.0)), 1e-6);
  checks.add("1-D analytic cost = 4", std::abs(free.cost - di::pff_cost(3.0, di::pff_optimal_time(3.0))), 1e-6);
  checks.add("1-D free final velocity = 1.5", std::abs(free.x_end(1) - di::pff_final_velocity(3.0, free.tf)), 1e-6);
  checks.add("1-D costate lambda1 = -2/3", std::abs(free.lambda_tf(0) + 2.0 / 3.0), 1e-6);

  Matrix expected(2, 2);
  expected << 9.0, 4.5, 4.5, 3.0;
  checks.add("1-D Gramian at tf = 3", (weighted_gramian(one, 3.0).matrix - expected).cwiseAbs().maxCoeff(), 1e-9);

  const TerminalPenalty stiff(Matrix::Constant(1, 1, 1e8));
  const SteeringSolution limit = solve_pff_penalty(one, stiff, x_a, x_c, 3.0);
  checks.add("S = 1e8 drives free velocity to 0", std::abs(limit.x_end(1)), 1e-3);
  checks.add("S = 1e8 cost approaches fixed-state 7", std::abs(limit.cost - 7.0), 1e-3);

  const LinearSystem sys = build_double_integrator_2d();
  gramian_checks(checks, sys, {0.1, 1.0, 3.0, 10.0});
  penalty_reduction_check(checks, sys, 5.0);
  transversality_checks(checks, sys, std::nullopt, 5.0, 200);

  Rng rng(3);
  double worst_gap = 0.0;
  double worst_arg = 0.0;
  double worst_time = 0.0;
  for (int k = 0; k < 10; ++k) {
    const Vector a = random_state(rng, 4, 5.0);
    const Vector c = random_state(rng, 2, 5.0);
    const double tf = uniform(rng, 1.0, 5.0);
    const SteeringSolution pff = solve_pff_fixed_time(sys, a, c, tf);
    const auto grid = oracles::completion_grid_minimum(sys, a, c, tf, -10.0, 10.0, 41);
    worst_gap = std::max(worst_gap, pff.cost - grid.cost);
    worst_arg = std::max(worst_arg, (pff.x_end.tail(2) - grid.free_block).cwiseAbs().maxCoeff() / grid.cell);

    const TimeBounds bounds{0.05, 20.0};
    const SteeringSolution opt = solve_pff_free_time(sys, a, c, bounds);
    const double dense = oracles::dense_time_minimum(
        [&](double t) { return solve_pff_fixed_time(sys, a, c, t).cost; }, bounds, 400);
    worst_time = std::max(worst_time, opt.cost - dense);
  }
  checks.add("PFF cost <= completion grid minimum", worst_gap, 1e-6);
  checks.add("PFF free block within one grid cell (cells)", worst_arg, 1.0);
  checks.add("free-time cost <= dense time sweep", worst_time, 1e-9);
}

void quadrotor_checks(Checks& checks) {
  const QuadrotorModel model = build_quadrotor_10d(QuadrotorParams{});
  gramian_checks(checks, model.system, {0.1, 1.0, 3.0, 10.0});
  penalty_reduction_check(checks, model.system, 3.0);
  transversality_checks(checks, model.system, std::nullopt, 3.0, 100);
  transversality_checks(checks, model.system, model.penalty, 3.0, 100);
}

}  // namespace

OracleReport validate(const std::string& system_name) {
  OracleReport report{system_name, {}};
  Checks checks(report);
  if (system_name == "double_integrator") {
    double_integrator_checks(checks);
  } else if (system_name == "quadrotor") {
    quadrotor_checks(checks);
  } else {
    throw InvalidScenario("unknown built-in system '" + system_name + "'");
  }
  return report;
}

void write_report(std::ostream& out, const OracleReport& report) {
  for (const auto& c : report.checks) {
    out << (c.passed ? "PASS " : "FAIL ") << report.system << ": " << c.name
        << "  residual=" << std::setprecision(3) << std::scientific << c.residual
        << " tol=" << c.tolerance << std::defaultfloat << '\n';
  }
  out << (report.passed() ? "all checks passed" : "some checks FAILED") << '\n';
}

}  // namespace kinorrt::bench
