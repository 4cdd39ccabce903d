#include "kinorrt/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kinorrt/errors.hpp"

namespace kinorrt {
namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw InvalidScenario(path + ": " + what);
}

void check_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* a) { return key == a; });
    if (!known) fail(path.empty() ? key : path + "." + key, "unknown field");
  }
}

const Json& require(const Json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) fail(path.empty() ? key : path + "." + key, "missing field");
  return obj.at(key);
}

double read_number(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int read_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

std::uint64_t read_seed(const Json& j, const std::string& path) {
  if (!j.is_number_unsigned()) fail(path, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

Vector read_vector(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = read_number(j[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

Matrix read_matrix(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix M(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string row_path = path + "[" + std::to_string(r) + "]";
    if (!j[r].is_array()) fail(row_path, "expected a row array");
    if (j[r].size() != cols) throw DimensionMismatch(path, "rows have different lengths");
    for (std::size_t c = 0; c < cols; ++c) {
      M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          read_number(j[r][c], row_path + "[" + std::to_string(c) + "]");
    }
  }
  return M;
}

Interval read_interval(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected [lo, hi]");
  Interval iv{read_number(j[0], path + "[0]"), read_number(j[1], path + "[1]")};
  if (!(iv.lo < iv.hi)) fail(path, "interval must satisfy lo < hi");
  return iv;
}

std::vector<Interval> read_intervals(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of [lo, hi] pairs");
  std::vector<Interval> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(read_interval(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Box read_box(const Json& j, const std::string& path, int dims) {
  check_keys(j, path, {"lo", "hi"});
  Box box{read_vector(require(j, path, "lo"), path + ".lo"),
          read_vector(require(j, path, "hi"), path + ".hi")};
  if (box.lo.size() != dims) throw DimensionMismatch(path + ".lo", "expected " + std::to_string(dims) + " components");
  if (box.hi.size() != dims) throw DimensionMismatch(path + ".hi", "expected " + std::to_string(dims) + " components");
  if (!(box.lo.array() < box.hi.array()).all()) fail(path, "box must satisfy lo < hi on every axis");
  return box;
}

Json write_vector(const Vector& v) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

Json write_matrix(const Matrix& M) {
  Json j = Json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) j.push_back(write_vector(M.row(r).transpose()));
  return j;
}

Json write_box(const Box& b) { return Json{{"lo", write_vector(b.lo)}, {"hi", write_vector(b.hi)}}; }

Json write_intervals(const std::vector<Interval>& ivs) {
  Json j = Json::array();
  for (const auto& iv : ivs) j.push_back(Json::array({iv.lo, iv.hi}));
  return j;
}

bool same(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

SystemSpec read_system(const Json& j) {
  const std::string path = "system";
  SystemSpec spec;
  if (j.contains("builtin")) {
    check_keys(j, path, {"builtin", "params", "n1", "terminal_penalty"});
    if (!j["builtin"].is_string()) fail("system.builtin", "expected a string");
    spec.builtin = j["builtin"].get<std::string>();
    if (std::find(kBuiltinScenarios.begin(), kBuiltinScenarios.end(), spec.builtin) ==
        kBuiltinScenarios.end()) {
      fail("system.builtin", "unknown built-in system '" + spec.builtin + "'");
    }
    if (j.contains("params")) {
      if (spec.builtin != "quadrotor") fail("system.params", "only the quadrotor takes parameters");
      const Json& p = j["params"];
      check_keys(p, "system.params", {"g", "mass", "arm", "inertia"});
      if (p.contains("g")) spec.quadrotor.g = read_number(p["g"], "system.params.g");
      if (p.contains("mass")) spec.quadrotor.mass = read_number(p["mass"], "system.params.mass");
      if (p.contains("arm")) spec.quadrotor.arm = read_number(p["arm"], "system.params.arm");
      if (p.contains("inertia")) spec.quadrotor.inertia = read_number(p["inertia"], "system.params.inertia");
    }
  } else {
    check_keys(j, path, {"A", "B", "c", "R", "n1", "terminal_penalty"});
    spec.A = read_matrix(require(j, path, "A"), "system.A");
    spec.B = read_matrix(require(j, path, "B"), "system.B");
    spec.R = read_matrix(require(j, path, "R"), "system.R");
    spec.c = j.contains("c") ? read_vector(j["c"], "system.c") : Vector::Zero(spec.A.rows());
    require(j, path, "n1");
  }
  if (j.contains("n1")) spec.n1 = read_int(j["n1"], "system.n1");

  if (j.contains("terminal_penalty")) {
    const Json& tp = j["terminal_penalty"];
    if (tp.is_string() && tp == "none") {
      spec.penalty = SystemSpec::Penalty::none;
    } else if (tp.is_string() && tp == "builtin") {
      if (spec.builtin != "quadrotor") fail("system.terminal_penalty", "only the quadrotor has a built-in penalty");
      spec.penalty = SystemSpec::Penalty::builtin;
    } else if (tp.is_array()) {
      spec.penalty = SystemSpec::Penalty::matrix;
      spec.S = read_matrix(tp, "system.terminal_penalty");
    } else {
      fail("system.terminal_penalty", "expected \"none\", \"builtin\" or a matrix");
    }
  }
  return spec;
}

Json write_system(const SystemSpec& spec) {
  Json j = Json::object();
  if (!spec.builtin.empty()) {
    j["builtin"] = spec.builtin;
    if (spec.builtin == "quadrotor") {
      const auto& p = spec.quadrotor;
      j["params"] = Json{{"g", p.g}, {"mass", p.mass}, {"arm", p.arm}, {"inertia", p.inertia}};
    }
  } else {
    j["A"] = write_matrix(spec.A);
    j["B"] = write_matrix(spec.B);
    j["c"] = write_vector(spec.c);
    j["R"] = write_matrix(spec.R);
  }
  if (spec.n1) j["n1"] = *spec.n1;
  switch (spec.penalty) {
    case SystemSpec::Penalty::none: j["terminal_penalty"] = "none"; break;
    case SystemSpec::Penalty::builtin: j["terminal_penalty"] = "builtin"; break;
    case SystemSpec::Penalty::matrix: j["terminal_penalty"] = write_matrix(spec.S); break;
  }
  return j;
}

PlannerConfig read_planner(const Json& j) {
  const std::string path = "planner";
  check_keys(j, path,
             {"iterations", "max_segment_length", "neighbor_radius", "v_des",
              "delayed_update_period", "collision_resolution", "t_bounds", "seed", "mode"});
  PlannerConfig cfg;
  if (j.contains("iterations")) cfg.iterations = read_int(j["iterations"], "planner.iterations");
  if (j.contains("max_segment_length")) cfg.max_segment_length = read_number(j["max_segment_length"], "planner.max_segment_length");
  if (j.contains("neighbor_radius")) cfg.neighbor_radius = read_number(j["neighbor_radius"], "planner.neighbor_radius");
  if (j.contains("v_des")) cfg.v_des = read_number(j["v_des"], "planner.v_des");
  if (j.contains("delayed_update_period")) cfg.delayed_update_period = read_int(j["delayed_update_period"], "planner.delayed_update_period");
  if (j.contains("collision_resolution")) cfg.collision_resolution = read_number(j["collision_resolution"], "planner.collision_resolution");
  if (j.contains("t_bounds")) {
    const Interval iv = read_interval(j["t_bounds"], "planner.t_bounds");
    cfg.t_bounds = TimeBounds{iv.lo, iv.hi};
  }
  if (j.contains("seed")) cfg.seed = read_seed(j["seed"], "planner.seed");
  if (j.contains("mode")) {
    if (!j["mode"].is_string()) fail("planner.mode", "expected a string");
    auto m = parse_mode(j["mode"].get<std::string>());
    if (!m) fail("planner.mode", "unknown mode '" + j["mode"].get<std::string>() + "'");
    cfg.mode = *m;
  }
  cfg.validate();
  return cfg;
}

Json write_planner(const PlannerConfig& cfg) {
  Json j{{"iterations", cfg.iterations},
         {"max_segment_length", cfg.max_segment_length},
         {"neighbor_radius", cfg.neighbor_radius},
         {"v_des", cfg.v_des},
         {"delayed_update_period", cfg.delayed_update_period},
         {"collision_resolution", cfg.collision_resolution}};
  if (cfg.t_bounds) j["t_bounds"] = Json::array({cfg.t_bounds->lo, cfg.t_bounds->hi});
  j["seed"] = cfg.seed;
  j["mode"] = std::string(to_string(cfg.mode));
  return j;
}

bool is_flat(const Json& j) {
  return j.is_array() &&
         std::none_of(j.begin(), j.end(), [](const Json& e) { return e.is_structured(); });
}

bool is_small_object(const Json& j) {
  return j.is_object() && j.size() <= 2 &&
         std::all_of(j.begin(), j.end(), [](const Json& e) { return is_flat(e); });
}

// Like Json::dump(2), but numeric rows stay on one line.
void pretty(std::ostream& out, const Json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  const std::string inner(static_cast<std::size_t>(indent + 2), ' ');
  if (is_flat(j)) {
    out << '[';
    for (std::size_t i = 0; i < j.size(); ++i) out << (i ? ", " : "") << j[i].dump();
    out << ']';
  } else if (is_small_object(j)) {
    out << '{';
    bool first = true;
    for (const auto& [key, value] : j.items()) {
      out << (first ? "" : ", ") << Json(key).dump() << ": ";
      pretty(out, value, indent);
      first = false;
    }
    out << '}';
  } else if (j.is_array()) {
    out << "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      out << inner;
      pretty(out, j[i], indent + 2);
      out << (i + 1 < j.size() ? ",\n" : "\n");
    }
    out << pad << ']';
  } else if (j.is_object()) {
    out << "{\n";
    std::size_t i = 0;
    for (const auto& [key, value] : j.items()) {
      out << inner << Json(key).dump() << ": ";
      pretty(out, value, indent + 2);
      out << (++i < j.size() ? ",\n" : "\n");
    }
    out << pad << '}';
  } else {
    out << j.dump();
  }
}

std::pair<int, int> locate(std::string_view text, std::size_t byte) {
  // nlohmann reports the count of bytes read, so the offending byte is byte - 1
  const std::size_t end = std::min(text.size(), byte == 0 ? 0 : byte - 1);
  int line = 1;
  int column = 1;
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

Environment read_environment(const Json& j) {
  const std::string path = "environment";
  check_keys(j, path, {"position_bounds", "sample_bounds", "obstacles", "goal"});
  auto position = read_intervals(require(j, path, "position_bounds"), "environment.position_bounds");
  if (position.empty()) throw DimensionMismatch("environment.position_bounds", "needs at least one axis");
  std::vector<Interval> extra;
  if (j.contains("sample_bounds")) extra = read_intervals(j["sample_bounds"], "environment.sample_bounds");
  const int p = static_cast<int>(position.size());
  std::vector<Box> obstacles;
  if (j.contains("obstacles")) {
    const Json& obs = j["obstacles"];
    if (!obs.is_array()) fail("environment.obstacles", "expected an array of boxes");
    for (std::size_t i = 0; i < obs.size(); ++i) {
      obstacles.push_back(read_box(obs[i], "environment.obstacles[" + std::to_string(i) + "]", p));
    }
  }
  Box goal = read_box(require(j, path, "goal"), "environment.goal", p);
  try {
    return Environment(std::move(position), std::move(extra), std::move(obstacles), std::move(goal));
  } catch (const DimensionMismatch&) {
    throw;
  } catch (const InvalidScenario& e) {
    fail(path, e.what());
  }
}

void cross_check(const Scenario& s, const BuiltSystem& built) {
  const LinearSystem& sys = built.system;
  const Environment& env = s.environment;
  if (s.start.size() != sys.n()) {
    throw DimensionMismatch("start", "expected " + std::to_string(sys.n()) + " components, got " +
                                         std::to_string(s.start.size()));
  }
  if (env.position_dims() > sys.n()) {
    throw DimensionMismatch("environment.position_bounds", "more position axes than states");
  }
  if (!collision_point(env, s.start)) fail("start", "start state is in collision");

  std::vector<PlannerMode> used = s.modes;
  used.push_back(s.planner.mode);
  for (PlannerMode m : used) {
    if (samples_partial_state(m)) {
      if (sys.n1() < env.position_dims() || sys.n1() > env.sample_dims()) {
        throw DimensionMismatch("environment.sample_bounds",
                                "sampled block of size " + std::to_string(sys.n1()) +
                                    " must cover the position axes and fit the sampling ranges");
      }
    } else if (env.sample_dims() != sys.n()) {
      throw DimensionMismatch("environment.sample_bounds",
                              std::string(to_string(m)) + " samples the full state and needs " +
                                  std::to_string(sys.n() - env.position_dims()) + " ranges");
    }
  }
}

}  // namespace

bool SystemSpec::operator==(const SystemSpec& o) const {
  return builtin == o.builtin && quadrotor == o.quadrotor && same(A, o.A) && same(B, o.B) &&
         same(R, o.R) && same(c, o.c) && n1 == o.n1 && penalty == o.penalty && same(S, o.S);
}

bool Scenario::operator==(const Scenario& o) const {
  return system == o.system && environment == o.environment && same(start, o.start) &&
         planner == o.planner && modes == o.modes && seeds == o.seeds;
}

BuiltSystem build_system(const SystemSpec& spec) {
  try {
    if (spec.builtin == "double_integrator") {
      LinearSystem sys = build_double_integrator_2d();
      if (spec.n1) sys = sys.with_partition(*spec.n1);
      std::optional<TerminalPenalty> penalty;
      if (spec.penalty == SystemSpec::Penalty::matrix) penalty = TerminalPenalty(spec.S);
      if (penalty && penalty->S.rows() != sys.n2()) {
        throw DimensionMismatch("system.terminal_penalty", "must be n2 x n2");
      }
      return BuiltSystem{std::move(sys), std::move(penalty)};
    }
    if (spec.builtin == "quadrotor") {
      spec.quadrotor.validate();
      QuadrotorModel model = build_quadrotor_10d(spec.quadrotor);
      LinearSystem sys = spec.n1 ? model.system.with_partition(*spec.n1) : model.system;
      std::optional<TerminalPenalty> penalty;
      if (spec.penalty == SystemSpec::Penalty::builtin) penalty = model.penalty;
      if (spec.penalty == SystemSpec::Penalty::matrix) penalty = TerminalPenalty(spec.S);
      if (penalty && penalty->S.rows() != sys.n2()) {
        throw DimensionMismatch("system.terminal_penalty", "must be n2 x n2");
      }
      return BuiltSystem{std::move(sys), std::move(penalty)};
    }
    if (!spec.builtin.empty()) fail("system.builtin", "unknown built-in system '" + spec.builtin + "'");

    const Eigen::Index n = spec.A.rows();
    if (spec.A.cols() != n) throw DimensionMismatch("system.A", "must be square");
    if (spec.B.rows() != n) throw DimensionMismatch("system.B", "must have as many rows as A");
    if (spec.c.size() != n) throw DimensionMismatch("system.c", "must have as many entries as A has rows");
    if (spec.R.rows() != spec.B.cols() || spec.R.cols() != spec.B.cols()) {
      throw DimensionMismatch("system.R", "must be m x m where m is the column count of B");
    }
    if (!spec.n1) fail("system.n1", "missing field");
    LinearSystem sys(spec.A, spec.B, spec.c, spec.R, *spec.n1);
    std::optional<TerminalPenalty> penalty;
    if (spec.penalty == SystemSpec::Penalty::matrix) {
      if (spec.S.rows() != sys.n2() || spec.S.cols() != sys.n2()) {
        throw DimensionMismatch("system.terminal_penalty", "must be n2 x n2");
      }
      penalty = TerminalPenalty(spec.S);
    }
    return BuiltSystem{std::move(sys), std::move(penalty)};
  } catch (const InvalidInput& e) {
    fail("system", e.what());
  }
}

Scenario parse_scenario(std::string_view text, const std::string& source) {
  Json root;
  try {
    root = Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, column] = locate(text, e.byte);
    std::string detail = e.what();
    if (auto pos = detail.find("syntax error"); pos != std::string::npos) detail = detail.substr(pos);
    throw ParseError(source, line, column, detail);
  }
  check_keys(root, "", {"system", "environment", "start", "planner", "trials"});

  SystemSpec spec = read_system(require(root, "", "system"));
  Environment env = read_environment(require(root, "", "environment"));
  Vector start = read_vector(require(root, "", "start"), "start");
  PlannerConfig planner = root.contains("planner") ? read_planner(root["planner"]) : PlannerConfig{};

  std::vector<PlannerMode> modes{planner.mode};
  std::vector<std::uint64_t> seeds{planner.seed};
  if (root.contains("trials")) {
    const Json& t = root["trials"];
    check_keys(t, "trials", {"modes", "seeds"});
    if (t.contains("modes")) {
      const Json& jm = t["modes"];
      if (!jm.is_array() || jm.empty()) fail("trials.modes", "expected a non-empty array");
      modes.clear();
      for (std::size_t i = 0; i < jm.size(); ++i) {
        const std::string path = "trials.modes[" + std::to_string(i) + "]";
        auto m = jm[i].is_string() ? parse_mode(jm[i].get<std::string>()) : std::nullopt;
        if (!m) fail(path, "unknown mode");
        modes.push_back(*m);
      }
    }
    if (t.contains("seeds")) {
      const Json& js = t["seeds"];
      if (!js.is_array() || js.empty()) fail("trials.seeds", "expected a non-empty array");
      seeds.clear();
      for (std::size_t i = 0; i < js.size(); ++i) {
        seeds.push_back(read_seed(js[i], "trials.seeds[" + std::to_string(i) + "]"));
      }
    }
  }

  Scenario s{std::move(spec), std::move(env), std::move(start), planner, std::move(modes),
             std::move(seeds)};
  cross_check(s, build_system(s.system));
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

std::string dump_scenario(const Scenario& s) {
  Json env{{"position_bounds", write_intervals(s.environment.position_bounds())},
           {"sample_bounds", write_intervals(s.environment.full_sample_bounds())},
           {"obstacles", Json::array()},
           {"goal", write_box(s.environment.goal())}};
  for (const Box& b : s.environment.obstacles()) env["obstacles"].push_back(write_box(b));

  Json trials{{"modes", Json::array()}, {"seeds", Json::array()}};
  for (PlannerMode m : s.modes) trials["modes"].push_back(std::string(to_string(m)));
  for (std::uint64_t seed : s.seeds) trials["seeds"].push_back(seed);

  Json root{{"system", write_system(s.system)},
            {"environment", env},
            {"start", write_vector(s.start)},
            {"planner", write_planner(s.planner)},
            {"trials", trials}};
  std::ostringstream out;
  pretty(out, root, 0);
  out << '\n';
  return out.str();
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write scenario file " + path.string());
  out << dump_scenario(scenario);
  if (!out) throw IoError("failed writing scenario file " + path.string());
}

Scenario builtin_scenario(std::string_view name) {
  auto box = [](std::initializer_list<double> lo, std::initializer_list<double> hi) {
    Box b{Vector(static_cast<Eigen::Index>(lo.size())), Vector(static_cast<Eigen::Index>(hi.size()))};
    std::copy(lo.begin(), lo.end(), b.lo.data());
    std::copy(hi.begin(), hi.end(), b.hi.data());
    return b;
  };
  std::vector<std::uint64_t> seeds(10);
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = i + 1;

  if (name == "double_integrator") {
    SystemSpec spec;
    spec.builtin = "double_integrator";
    Environment env({{0, 20}, {0, 20}}, {{-2, 2}, {-2, 2}},
                    {box({3.5, 3}, {6.5, 12}), box({9, 8}, {12, 17}), box({13, 2}, {17, 6}),
                     box({14, 11}, {17, 14}), box({3, 15}, {7, 18}), box({8, 0}, {11, 4})},
                    box({17.5, 17.5}, {19.5, 19.5}));
    PlannerConfig cfg;
    cfg.iterations = 4000;
    cfg.max_segment_length = 5.0;
    cfg.neighbor_radius = 6.0;
    Vector start(4);
    start << 1, 1, 0, 0;
    return Scenario{spec, env, start, cfg, {PlannerMode::kino, PlannerMode::baseline}, seeds};
  }
  if (name == "quadrotor") {
    SystemSpec spec;
    spec.builtin = "quadrotor";
    spec.penalty = SystemSpec::Penalty::builtin;
    Environment env({{0, 10}, {0, 10}, {0, 10}},
                    {{-2, 2}, {-2, 2}, {-2, 2}, {-1, 1}, {-1, 1}, {-4, 4}, {-4, 4}},
                    {box({3, 0, 0}, {5, 6, 6}), box({5.5, 4, 0}, {7, 10, 6}),
                     box({1, 7, 2}, {4, 10, 8}), box({6.5, 0, 0}, {9, 3, 10}),
                     box({3, 3, 8}, {6, 7, 10})},
                    box({7.5, 7, 7}, {9.7, 9.7, 9.7}));
    PlannerConfig cfg;
    cfg.iterations = 1000;
    cfg.max_segment_length = 3.0;
    cfg.neighbor_radius = 4.0;
    Vector start = Vector::Zero(10);
    start.head(3) << 1, 1, 1;
    return Scenario{spec, env, start, cfg, {PlannerMode::kino, PlannerMode::kino_delayed}, seeds};
  }
  fail("builtin", "unknown built-in scenario '" + std::string(name) + "'");
}

}  // namespace kinorrt
