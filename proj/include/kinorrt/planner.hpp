#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kinorrt/lti.hpp"
#include "kinorrt/steering.hpp"
#include "kinorrt/tree.hpp"
#include "kinorrt/world.hpp"

namespace kinorrt {

/// kino: sample the leading block, steer with the free-time PFF controller.
/// baseline: sample the full state, steer with the fixed-final-state
/// free-time controller. The *_delayed variants grow with a heuristic
/// arrival time and periodically re-optimize every edge's arrival time.
enum class PlannerMode { kino, baseline, kino_delayed, baseline_delayed };

std::string_view to_string(PlannerMode mode);
std::optional<PlannerMode> parse_mode(std::string_view name);
bool is_delayed(PlannerMode mode);
bool samples_partial_state(PlannerMode mode);

struct PlannerConfig {
  int iterations = 1000;
  double max_segment_length = 5.0;
  double neighbor_radius = 6.0;
  double v_des = 1.5;
  /// Insertions between delayed arrival-time updates; 0 disables them.
  int delayed_update_period = 500;
  double collision_resolution = kDefaultCollisionResolution;
  /// Arrival-time search interval; defaults to default_time_bounds of the
  /// largest Euclidean connection the planner attempts.
  std::optional<TimeBounds> t_bounds;
  std::uint64_t seed = 1;
  PlannerMode mode = PlannerMode::kino;

  void validate() const;
  TimeBounds effective_time_bounds() const;
  bool operator==(const PlannerConfig&) const = default;
};

struct ConvergenceEntry {
  int iteration = 0;
  std::size_t nodes = 0;
  double elapsed_s = 0.0;
  std::optional<double> best_cost;
  bool operator==(const ConvergenceEntry&) const = default;
};

/// Step toward `toward` by at most `max_length`, measuring distance over the
/// leading `metric_dims` components (all of them when metric_dims < 0). The
/// remaining components are interpolated by the same fraction.
Vector shrink(const Vector& from, const Vector& toward, double max_length, int metric_dims = -1);

struct ParentChoice {
  NodeId parent = 0;
  SteeringSolution edge;
};

struct GoalPath {
  std::vector<NodeId> nodes;  // root first
  std::vector<SteeringSolution> edges;
  double cost = 0.0;
};

/// Cheapest node inside the goal region (ties: lowest id) and its root path.
std::optional<GoalPath> best_solution(const Tree& tree, const Environment& env);

class Planner {
 public:
  /// Seconds since the run started.
  using Clock = std::function<double()>;
  using Observer = std::function<void(const Planner&, int iteration)>;

  struct RunHooks {
    /// Fires every 100 iterations.
    Observer observer;
    /// Receives each log entry as soon as it is recorded.
    std::function<void(const ConvergenceEntry&)> on_entry;
    /// Defaults to a monotonic wall clock.
    Clock clock;
  };

  /// Throws InvalidScenario when the start is in collision or the
  /// configuration does not fit the system and environment.
  Planner(LinearSystem sys, std::optional<TerminalPenalty> penalty, Environment env,
          PlannerConfig cfg, Vector start);
  ~Planner();
  Planner(Planner&&) noexcept;

  /// One growth iteration from a caller-supplied raw sample (leading block
  /// for the kino modes, full state for the baseline modes). Returns true
  /// when a node was inserted.
  bool extend(const Vector& z_rand);

  /// One growth iteration from the planner's own sampler.
  bool iterate();

  /// Run cfg.iterations iterations, logging at every best-cost improvement,
  /// every 100 iterations and at the last one.
  std::vector<ConvergenceEntry> run(const RunHooks& hooks);
  std::vector<ConvergenceEntry> run() { return run(RunHooks{}); }

  ParentChoice choose_parent(const std::vector<NodeId>& near, NodeId nearest, const Vector& z_new,
                             SteeringSolution nearest_edge);
  void rewire(const std::vector<NodeId>& near, NodeId x_new, NodeId x_min);
  void delayed_time_update();

  /// Connection from a node to a sampled block (PFF in the kino modes,
  /// fixed-state in the baseline modes); nullopt when no connection exists.
  std::optional<SteeringSolution> steer_sampled(NodeId from, const Vector& z) const;
  /// Fixed-final-state connection between two full states.
  std::optional<SteeringSolution> steer_state(const Vector& from, const Vector& to) const;
  bool edge_collision_free(const SteeringSolution& edge) const;

  const Tree& tree() const;
  const LinearSystem& system() const;
  const Environment& environment() const;
  const PlannerConfig& config() const;
  std::optional<double> best_cost() const;
  /// Dimension of the raw samples this planner draws.
  int sample_dims() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct PlanResult {
  Tree tree;
  std::vector<ConvergenceEntry> log;
};

PlanResult plan(const LinearSystem& sys, const std::optional<TerminalPenalty>& penalty,
                const Environment& env, const PlannerConfig& cfg, const Vector& start,
                const Planner::RunHooks& hooks = {});

/// Structural and numerical checks on a grown tree. Edge collision and
/// boundary checks are cached per node revision, so auditing the same tree
/// repeatedly only re-examines edges that changed.
class TreeAuditor {
 public:
  struct Report {
    std::vector<std::string> violations;
    double max_cost_error = 0.0;
    double max_boundary_error = 0.0;
    bool ok() const { return violations.empty(); }
  };

  static constexpr double kCostTolerance = 1e-9;
  static constexpr double kBoundaryTolerance = 1e-7;

  TreeAuditor(const LinearSystem& sys, const Environment& env, double resolution);
  Report audit(const Tree& tree);

 private:
  const LinearSystem* sys_;
  const Environment* env_;
  double resolution_;
  std::map<NodeId, std::uint64_t> verified_;
  double worst_boundary_ = 0.0;
};

/// Best-cost sequence never increases and iterations strictly increase.
bool log_is_monotone(const std::vector<ConvergenceEntry>& log);

}  // namespace kinorrt
