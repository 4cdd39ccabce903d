#include "kinorrt/scenario.hpp"

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "kinorrt/errors.hpp"

namespace kinorrt {
namespace {

const std::filesystem::path kScenarioDir = KINORRT_SCENARIO_DIR;

// A one-dimensional double integrator written out as explicit matrices.
constexpr const char* kExplicit = R"({
  "system": {
    "A": [[0, 1], [0, 0]],
    "B": [[0], [1]],
    "c": [0, 0],
    "R": [[2]],
    "n1": 1,
    "terminal_penalty": [[3]]
  },
  "environment": {
    "position_bounds": [[0, 10]],
    "sample_bounds": [[-1, 1]],
    "obstacles": [{"lo": [4], "hi": [5]}],
    "goal": {"lo": [8], "hi": [9]}
  },
  "start": [1, 0],
  "planner": {"iterations": 50, "t_bounds": [0.1, 12], "mode": "kino_delayed", "seed": 7},
  "trials": {"modes": ["kino", "kino_delayed"], "seeds": [3, 5]}
})";

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() /
         (name + "_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + ".json");
}

TEST(LoadScenario, ShippedDoubleIntegrator) {
  const Scenario s = load_scenario(kScenarioDir / "double_integrator.json");
  const BuiltSystem built = build_system(s.system);
  EXPECT_EQ(built.system.n(), 4);
  EXPECT_EQ(built.system.n1(), 2);
  EXPECT_EQ(built.system.R(), Matrix::Identity(2, 2));
  EXPECT_FALSE(built.penalty.has_value());
  EXPECT_EQ(s.environment.position_bounds(), (std::vector<Interval>{{0, 20}, {0, 20}}));
  EXPECT_EQ(s.environment.full_sample_bounds(), (std::vector<Interval>{{-2, 2}, {-2, 2}}));
  EXPECT_EQ(s.planner.max_segment_length, 5.0);
  EXPECT_EQ(s.planner.neighbor_radius, 6.0);
  EXPECT_EQ(s.planner.v_des, 1.5);
  EXPECT_EQ(s.seeds.size(), 10u);
  EXPECT_EQ(s, builtin_scenario("double_integrator"));
}

TEST(LoadScenario, ShippedQuadrotor) {
  const Scenario s = load_scenario(kScenarioDir / "quadrotor.json");
  const BuiltSystem built = build_system(s.system);
  EXPECT_EQ(built.system.n(), 10);
  EXPECT_EQ(built.system.n1(), 3);
  ASSERT_TRUE(built.penalty.has_value());
  Vector s_diag(7);
  s_diag << 0, 0, 0, 20, 20, 0, 0;
  EXPECT_EQ(built.penalty->S.diagonal(), s_diag);
  EXPECT_EQ(s.system.quadrotor, QuadrotorParams{});
  EXPECT_EQ(s.environment.full_sample_bounds(),
            (std::vector<Interval>{{-2, 2}, {-2, 2}, {-2, 2}, {-1, 1}, {-1, 1}, {-4, 4}, {-4, 4}}));
  EXPECT_EQ(s, builtin_scenario("quadrotor"));
}

TEST(LoadScenario, FixtureClutter) {
  // obstacle area share of the planar map, boxes are disjoint
  const Scenario s = builtin_scenario("double_integrator");
  double area = 0.0;
  for (const Box& b : s.environment.obstacles()) area += (b.hi - b.lo).prod();
  EXPECT_GE(area / 400.0, 0.2);
  EXPECT_LE(area / 400.0, 0.3);
}

TEST(ParseScenario, ExplicitMatrices) {
  const Scenario s = parse_scenario(kExplicit);
  const BuiltSystem built = build_system(s.system);
  EXPECT_EQ(built.system.n(), 2);
  EXPECT_EQ(built.system.R()(0, 0), 2.0);
  ASSERT_TRUE(built.penalty.has_value());
  EXPECT_EQ(built.penalty->S(0, 0), 3.0);
  EXPECT_EQ(s.planner.iterations, 50);
  EXPECT_EQ(s.planner.t_bounds, (TimeBounds{0.1, 12}));
  EXPECT_EQ(s.planner.mode, PlannerMode::kino_delayed);
  EXPECT_EQ(s.planner.seed, 7u);
  EXPECT_EQ(s.planner.neighbor_radius, PlannerConfig{}.neighbor_radius);
  EXPECT_EQ(s.modes, (std::vector<PlannerMode>{PlannerMode::kino, PlannerMode::kino_delayed}));
  EXPECT_EQ(s.seeds, (std::vector<std::uint64_t>{3, 5}));
}

TEST(ParseScenario, RoundTrip) {
  for (const std::string& name : kBuiltinScenarios) {
    const Scenario s = builtin_scenario(name);
    EXPECT_EQ(parse_scenario(dump_scenario(s)), s) << name;
    const auto path = temp_path(name);
    save_scenario(s, path);
    EXPECT_EQ(load_scenario(path), s) << name;
    std::filesystem::remove(path);
  }
  const Scenario explicit_system = parse_scenario(kExplicit);
  EXPECT_EQ(parse_scenario(dump_scenario(explicit_system)), explicit_system);
  // a second dump is byte-identical
  EXPECT_EQ(dump_scenario(parse_scenario(dump_scenario(explicit_system))),
            dump_scenario(explicit_system));
}

TEST(ParseScenario, QuadrotorParamsOverride) {
  std::string text = dump_scenario(builtin_scenario("quadrotor"));
  text = replace(text, "\"mass\": 0.5", "\"mass\": 0.75");
  const Scenario s = parse_scenario(text);
  EXPECT_EQ(s.system.quadrotor.mass, 0.75);
  EXPECT_DOUBLE_EQ(build_system(s.system).system.B()(5, 0), 1.0 / 0.75);
}

TEST(ParseScenario, WrongShapeOfA) {
  const std::string text = replace(kExplicit, R"("A": [[0, 1], [0, 0]])", R"("A": [[0, 1, 0], [0, 0, 1]])");
  try {
    parse_scenario(text);
    FAIL() << "expected a dimension mismatch";
  } catch (const DimensionMismatch& e) {
    EXPECT_EQ(e.field(), "system.A");
  }
  const std::string ragged = replace(kExplicit, R"("A": [[0, 1], [0, 0]])", R"("A": [[0, 1], [0]])");
  try {
    parse_scenario(ragged);
    FAIL() << "expected a dimension mismatch";
  } catch (const DimensionMismatch& e) {
    EXPECT_EQ(e.field(), "system.A");
  }
}

TEST(ParseScenario, DimensionErrorsNameTheField) {
  auto field_of = [](const std::string& text) -> std::string {
    try {
      parse_scenario(text);
    } catch (const DimensionMismatch& e) {
      return e.field();
    }
    return "<no error>";
  };
  EXPECT_EQ(field_of(replace(kExplicit, R"("B": [[0], [1]])", R"("B": [[0], [1], [2]])")), "system.B");
  EXPECT_EQ(field_of(replace(kExplicit, R"("R": [[2]])", R"("R": [[2, 0], [0, 2]])")), "system.R");
  EXPECT_EQ(field_of(replace(kExplicit, R"("c": [0, 0])", R"("c": [0])")), "system.c");
  EXPECT_EQ(field_of(replace(kExplicit, R"("start": [1, 0])", R"("start": [1, 0, 0])")), "start");
  EXPECT_EQ(field_of(replace(kExplicit, R"([[3]])", R"([[3, 0], [0, 3]])")), "system.terminal_penalty");
  EXPECT_EQ(field_of(replace(kExplicit, R"({"lo": [4], "hi": [5]})", R"({"lo": [4, 1], "hi": [5, 2]})")),
            "environment.obstacles[0].lo");
}

TEST(ParseScenario, ContentErrors) {
  auto message_of = [](const std::string& text) -> std::string {
    try {
      parse_scenario(text);
    } catch (const InvalidScenario& e) {
      return e.what();
    }
    return "<no error>";
  };
  EXPECT_NE(message_of(replace(kExplicit, "\"obstacles\"", "\"obstacle\"")).find("environment.obstacle"),
            std::string::npos);
  EXPECT_NE(message_of(replace(kExplicit, "\"start\": [1, 0]", "\"start\": [4.5, 0]")).find("start"),
            std::string::npos);
  EXPECT_NE(message_of(replace(kExplicit, "\"seeds\": [3, 5]", "\"seeds\": [-3]")).find("trials.seeds[0]"),
            std::string::npos);
  EXPECT_NE(message_of(replace(kExplicit, "\"kino\",", "\"rrt\",")).find("trials.modes[0]"),
            std::string::npos);
  EXPECT_NE(message_of(replace(kExplicit, "\"iterations\": 50", "\"iterations\": 1.5")).find("planner.iterations"),
            std::string::npos);
  EXPECT_NE(message_of(replace(kExplicit, "\"R\": [[2]]", "\"R\": [[-2]]")).find("system"),
            std::string::npos);
  EXPECT_NE(message_of(replace(kExplicit, "\"goal\": {\"lo\": [8], \"hi\": [9]}",
                               "\"goal\": {\"lo\": [8], \"hi\": [11]}"))
                .find("goal"),
            std::string::npos);
  std::string unknown = dump_scenario(builtin_scenario("quadrotor"));
  unknown = replace(unknown, "\"builtin\": \"quadrotor\"", "\"builtin\": \"hexacopter\"");
  EXPECT_NE(message_of(unknown).find("system.builtin"), std::string::npos);
  EXPECT_THROW(builtin_scenario("hexacopter"), InvalidScenario);
}

TEST(ParseScenario, SyntaxErrorLocation) {
  const std::string text = "{\n  \"system\": {\n    \"builtin\": ,\n  }\n}\n";
  try {
    parse_scenario(text, "broken.json");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_EQ(e.column(), 16);
    EXPECT_EQ(std::string(e.what()).rfind("broken.json:3:16:", 0), 0u) << e.what();
  }
}

TEST(LoadScenario, MissingFile) {
  EXPECT_THROW(load_scenario(kScenarioDir / "does_not_exist.json"), IoError);
}

}  // namespace
}  // namespace kinorrt
