#include "kinorrt/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "kinorrt/errors.hpp"
#include "kinorrt/trajectory.hpp"

namespace kinorrt {

std::string_view to_string(PlannerMode mode) {
  switch (mode) {
    case PlannerMode::kino: return "kino";
    case PlannerMode::baseline: return "baseline";
    case PlannerMode::kino_delayed: return "kino_delayed";
    case PlannerMode::baseline_delayed: return "baseline_delayed";
  }
  return "unknown";
}

std::optional<PlannerMode> parse_mode(std::string_view name) {
  for (PlannerMode m : {PlannerMode::kino, PlannerMode::baseline, PlannerMode::kino_delayed,
                        PlannerMode::baseline_delayed}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

bool is_delayed(PlannerMode mode) {
  return mode == PlannerMode::kino_delayed || mode == PlannerMode::baseline_delayed;
}

bool samples_partial_state(PlannerMode mode) {
  return mode == PlannerMode::kino || mode == PlannerMode::kino_delayed;
}

void PlannerConfig::validate() const {
  if (iterations < 0) throw InvalidScenario("planner.iterations must be non-negative");
  if (!(max_segment_length > 0.0)) throw InvalidScenario("planner.max_segment_length must be positive");
  if (!(neighbor_radius > 0.0)) throw InvalidScenario("planner.neighbor_radius must be positive");
  if (!(v_des > 0.0)) throw InvalidScenario("planner.v_des must be positive");
  if (delayed_update_period < 0) throw InvalidScenario("planner.delayed_update_period must be >= 0");
  if (!(collision_resolution > 0.0)) throw InvalidScenario("planner.collision_resolution must be positive");
  if (t_bounds && !(t_bounds->lo > 0.0 && t_bounds->hi > t_bounds->lo)) {
    throw InvalidScenario("planner.t_bounds must satisfy 0 < lo < hi");
  }
}

TimeBounds PlannerConfig::effective_time_bounds() const {
  return t_bounds ? *t_bounds : default_time_bounds(std::max(max_segment_length, neighbor_radius));
}

Vector shrink(const Vector& from, const Vector& toward, double max_length, int metric_dims) {
  if (!(max_length > 0.0)) throw InvalidInput("shrink needs a positive maximum length");
  if (from.size() != toward.size()) throw InvalidInput("shrink arguments differ in size");
  const Eigen::Index dims = metric_dims < 0 ? from.size() : metric_dims;
  const double dist = (toward.head(dims) - from.head(dims)).norm();
  if (dist <= max_length) return toward;
  return from + (toward - from) * (max_length / dist);
}

std::optional<GoalPath> best_solution(const Tree& tree, const Environment& env) {
  std::optional<NodeId> best;
  for (const TreeNode& node : tree.nodes()) {
    if (!in_goal(env, node.state)) continue;
    if (!best || node.cost_to_come < tree.node(*best).cost_to_come) best = node.id;
  }
  if (!best) return std::nullopt;

  GoalPath path;
  path.cost = tree.node(*best).cost_to_come;
  for (std::optional<NodeId> cur = best; cur; cur = tree.node(*cur).parent) {
    path.nodes.push_back(*cur);
    if (tree.node(*cur).edge) path.edges.push_back(*tree.node(*cur).edge);
  }
  std::reverse(path.nodes.begin(), path.nodes.end());
  std::reverse(path.edges.begin(), path.edges.end());
  return path;
}

struct Planner::Impl {
  LinearSystem sys;
  std::optional<TerminalPenalty> penalty;
  Environment env;
  PlannerConfig cfg;
  ArrivalTimeSearch search;
  Tree tree;
  Rng rng;
  std::vector<NodeId> goal_nodes;
  int insertions = 0;

  int position_dims() const { return env.position_dims(); }

  int sample_dims() const { return samples_partial_state(cfg.mode) ? sys.n1() : sys.n(); }

  // Fixed-state edges into a node pay the same terminal charge as the
  // penalized PFF edge that created it, so edge costs stay comparable.
  SteeringSolution charge_terminal(SteeringSolution sol) const {
    if (penalty && sol.variant == SteeringVariant::fixed_state) {
      const auto x2 = sol.x_end.tail(sys.n2());
      sol.terminal_cost = 0.5 * x2.dot(penalty->S * x2);
      sol.cost += sol.terminal_cost;
    }
    return sol;
  }

  double heuristic_time(const Vector& from, const Vector& to) const {
    const int p = position_dims();
    return heuristic_arrival_time(from.head(p), to.head(p), cfg.v_des);
  }
};

Planner::Planner(LinearSystem sys, std::optional<TerminalPenalty> penalty, Environment env,
                 PlannerConfig cfg, Vector start) {
  cfg.validate();
  const TimeBounds bounds = cfg.effective_time_bounds();
  if (penalty && penalty->S.rows() != sys.n2()) {
    throw InvalidScenario("terminal penalty must be n2 x n2");
  }
  const int p = env.position_dims();
  if (p > sys.n()) throw InvalidScenario("environment has more position axes than the state");
  if (samples_partial_state(cfg.mode)) {
    if (sys.n1() < p || sys.n1() > env.sample_dims()) {
      throw InvalidScenario("sampled block must cover the position axes and fit the sampling ranges");
    }
  } else if (env.sample_dims() != sys.n()) {
    throw DimensionMismatch("environment.full_sample_bounds",
                            "full-state sampling needs n - position_dims ranges");
  }
  if (start.size() != sys.n() || !start.allFinite()) {
    throw DimensionMismatch("start", "expected a finite " + std::to_string(sys.n()) + "-vector");
  }
  if (!collision_point(env, start)) throw InvalidScenario("start state is in collision");

  ArrivalTimeSearch search(sys, penalty, bounds);
  Tree tree(start, p);
  impl_ = std::make_unique<Impl>(Impl{std::move(sys), std::move(penalty), std::move(env), cfg,
                                      std::move(search), std::move(tree), Rng(cfg.seed), {}, 0});
  if (in_goal(impl_->env, start)) impl_->goal_nodes.push_back(0);
}

Planner::~Planner() = default;
Planner::Planner(Planner&&) noexcept = default;

const Tree& Planner::tree() const { return impl_->tree; }
const LinearSystem& Planner::system() const { return impl_->sys; }
const Environment& Planner::environment() const { return impl_->env; }
const PlannerConfig& Planner::config() const { return impl_->cfg; }
int Planner::sample_dims() const { return impl_->sample_dims(); }

std::optional<double> Planner::best_cost() const {
  std::optional<double> best;
  for (NodeId id : impl_->goal_nodes) {
    const double c = impl_->tree.node(id).cost_to_come;
    if (!best || c < *best) best = c;
  }
  return best;
}

std::optional<SteeringSolution> Planner::steer_sampled(NodeId from, const Vector& z) const {
  const Impl& s = *impl_;
  const Vector& x_a = s.tree.node(from).state;
  try {
    switch (s.cfg.mode) {
      case PlannerMode::kino:
        return s.search.pff(x_a, z);
      case PlannerMode::baseline:
        return s.charge_terminal(s.search.fixed_state(x_a, z));
      case PlannerMode::kino_delayed: {
        const double tf = s.heuristic_time(x_a, z);
        return s.penalty ? solve_pff_penalty(s.sys, *s.penalty, x_a, z, tf)
                         : solve_pff_fixed_time(s.sys, x_a, z, tf);
      }
      case PlannerMode::baseline_delayed:
        return s.charge_terminal(
            solve_fixed_state_fixed_time(s.sys, x_a, z, s.heuristic_time(x_a, z)));
    }
  } catch (const DegenerateHorizon&) {
  } catch (const NoConnection&) {
  }
  return std::nullopt;
}

std::optional<SteeringSolution> Planner::steer_state(const Vector& from, const Vector& to) const {
  const Impl& s = *impl_;
  try {
    if (is_delayed(s.cfg.mode)) {
      return s.charge_terminal(
          solve_fixed_state_fixed_time(s.sys, from, to, s.heuristic_time(from, to)));
    }
    return s.charge_terminal(s.search.fixed_state(from, to));
  } catch (const DegenerateHorizon&) {
  } catch (const NoConnection&) {
  }
  return std::nullopt;
}

bool Planner::edge_collision_free(const SteeringSolution& edge) const {
  return collision_free_trajectory(impl_->env, Trajectory(impl_->sys, edge),
                                   impl_->cfg.collision_resolution);
}

ParentChoice Planner::choose_parent(const std::vector<NodeId>& near, NodeId nearest,
                                    const Vector& z_new, SteeringSolution nearest_edge) {
  const Tree& tree = impl_->tree;
  ParentChoice best{nearest, std::move(nearest_edge)};
  double c_min = tree.node(nearest).cost_to_come + best.edge.cost;
  for (NodeId id : near) {
    if (id == nearest) continue;
    // the segment cost needs the solve, so the solve is kept for the edge
    auto seg = steer_sampled(id, z_new);
    if (!seg) continue;
    const double c = tree.node(id).cost_to_come + seg->cost;
    if (c < c_min && edge_collision_free(*seg)) {
      best = ParentChoice{id, std::move(*seg)};
      c_min = c;
    }
  }
  return best;
}

void Planner::rewire(const std::vector<NodeId>& near, NodeId x_new, NodeId x_min) {
  Tree& tree = impl_->tree;
  for (NodeId id : near) {
    if (id == x_min || id == x_new) continue;
    auto seg = steer_state(tree.node(x_new).state, tree.node(id).state);
    if (!seg) continue;
    if (tree.node(x_new).cost_to_come + seg->cost < tree.node(id).cost_to_come &&
        !tree.is_ancestor(id, x_new) && edge_collision_free(*seg)) {
      tree.reparent(id, x_new, std::move(*seg));
    }
  }
}

void Planner::delayed_time_update() {
  Tree& tree = impl_->tree;
  for (NodeId id = 1; id < tree.size(); ++id) {
    const TreeNode& node = tree.node(id);
    std::optional<SteeringSolution> updated;
    try {
      updated = impl_->charge_terminal(
          impl_->search.fixed_state(tree.node(*node.parent).state, node.state));
    } catch (const NoConnection&) {
      continue;
    }
    if (updated->cost < node.edge->cost && edge_collision_free(*updated)) {
      tree.replace_edge(id, std::move(*updated));
    }
  }
  tree.recompute_costs();
}

bool Planner::extend(const Vector& z_rand) {
  Impl& s = *impl_;
  const int dims = s.sample_dims();
  if (z_rand.size() != dims) {
    throw InvalidInput("sample must have " + std::to_string(dims) + " components");
  }
  const int p = s.position_dims();

  const NodeId nearest = s.tree.nearest(z_rand.head(p));
  const Vector z_new = shrink(s.tree.node(nearest).state.head(dims), z_rand,
                              s.cfg.max_segment_length, p);
  if (!collision_point(s.env, z_new)) return false;

  auto edge = steer_sampled(nearest, z_new);
  if (!edge || !edge_collision_free(*edge)) return false;

  const std::vector<NodeId> near = s.tree.near(z_new.head(p), s.cfg.neighbor_radius);
  ParentChoice choice = choose_parent(near, nearest, z_new, std::move(*edge));

  // x_end carries z_new in its leading block and the controller's free block
  Vector state = choice.edge.x_end;
  const NodeId x_new = s.tree.add(std::move(state), choice.parent, std::move(choice.edge));
  if (in_goal(s.env, s.tree.node(x_new).state)) s.goal_nodes.push_back(x_new);
  rewire(near, x_new, choice.parent);

  ++s.insertions;
  if (is_delayed(s.cfg.mode) && s.cfg.delayed_update_period > 0 &&
      s.insertions % s.cfg.delayed_update_period == 0) {
    delayed_time_update();
  }
  return true;
}

bool Planner::iterate() {
  Impl& s = *impl_;
  return extend(sample_pff(s.env, s.rng, s.sample_dims()));
}

std::vector<ConvergenceEntry> Planner::run(const RunHooks& hooks) {
  Clock clock = hooks.clock;
  if (!clock) {
    const auto t0 = std::chrono::steady_clock::now();
    clock = [t0] {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
  }
  std::vector<ConvergenceEntry> log;
  std::optional<double> last_best = best_cost();
  const int n_iter = impl_->cfg.iterations;
  for (int i = 1; i <= n_iter; ++i) {
    iterate();
    const std::optional<double> best = best_cost();
    const bool improved = best && (!last_best || *best < *last_best);
    if (improved || i % 100 == 0 || i == n_iter) {
      log.push_back(ConvergenceEntry{i, impl_->tree.size(), clock(), best});
      if (hooks.on_entry) hooks.on_entry(log.back());
    }
    last_best = best;
    if (hooks.observer && i % 100 == 0) hooks.observer(*this, i);
  }
  return log;
}

PlanResult plan(const LinearSystem& sys, const std::optional<TerminalPenalty>& penalty,
                const Environment& env, const PlannerConfig& cfg, const Vector& start,
                const Planner::RunHooks& hooks) {
  Planner planner(sys, penalty, env, cfg, start);
  auto log = planner.run(hooks);
  return PlanResult{planner.tree(), std::move(log)};
}

TreeAuditor::TreeAuditor(const LinearSystem& sys, const Environment& env, double resolution)
    : sys_(&sys), env_(&env), resolution_(resolution) {}

TreeAuditor::Report TreeAuditor::audit(const Tree& tree) {
  Report report;
  auto fail = [&](NodeId id, const std::string& what) {
    report.violations.push_back("node " + std::to_string(id) + ": " + what);
  };
  const auto& nodes = tree.nodes();
  if (nodes.empty()) {
    report.violations.push_back("tree is empty");
    return report;
  }
  if (nodes[0].parent || nodes[0].edge || nodes[0].cost_to_come != 0.0) {
    fail(0, "root must have no parent, no edge and zero cost");
  }

  // reachability and acyclicity: a walk over child lists from the root must
  // visit each node exactly once and agree with the parent pointers
  std::vector<int> seen(nodes.size(), 0);
  std::vector<NodeId> stack{0};
  std::size_t visited = 0;
  while (!stack.empty()) {
    const NodeId cur = stack.back();
    stack.pop_back();
    if (seen[cur]++ != 0) {
      fail(cur, "reached twice from the root");
      continue;
    }
    ++visited;
    for (NodeId child : nodes[cur].children) {
      if (child >= nodes.size() || nodes[child].parent != cur) {
        fail(cur, "child list disagrees with parent pointer");
        continue;
      }
      stack.push_back(child);
    }
  }
  if (visited != nodes.size()) {
    report.violations.push_back("only " + std::to_string(visited) + " of " +
                                std::to_string(nodes.size()) + " nodes reachable from the root");
  }

  for (const TreeNode& node : nodes) {
    if (node.id == 0) continue;
    if (!node.parent || !node.edge || *node.parent >= nodes.size()) {
      fail(node.id, "missing parent or edge");
      continue;
    }
    const TreeNode& parent = nodes[*node.parent];
    const SteeringSolution& edge = *node.edge;
    const double cost_err = std::abs(node.cost_to_come - (parent.cost_to_come + edge.cost));
    report.max_cost_error = std::max(report.max_cost_error, cost_err);
    if (!(cost_err <= kCostTolerance)) fail(node.id, "cost-to-come recursion off by " + std::to_string(cost_err));
    if (!(edge.cost >= edge.tf)) fail(node.id, "edge cost below its duration");
    const double end_err = (edge.x_end - node.state).norm();
    const double start_err = (edge.x_start - parent.state).norm();
    if (!(end_err <= kBoundaryTolerance)) fail(node.id, "edge does not end at the node state");
    if (!(start_err <= kBoundaryTolerance)) fail(node.id, "edge does not start at the parent state");

    auto it = verified_.find(node.id);
    if (it != verified_.end() && it->second == node.revision) continue;
    const Trajectory traj(*sys_, edge);
    const double reach_err = (traj.at(edge.tf).state - node.state).norm();
    worst_boundary_ = std::max(worst_boundary_, reach_err);
    if (!(reach_err <= kBoundaryTolerance)) {
      fail(node.id, "trajectory misses the node state by " + std::to_string(reach_err));
    }
    if (!collision_free_trajectory(*env_, traj, resolution_)) fail(node.id, "edge is in collision");
    verified_[node.id] = node.revision;
  }
  report.max_boundary_error = worst_boundary_;
  return report;
}

bool log_is_monotone(const std::vector<ConvergenceEntry>& log) {
  std::optional<double> last;
  int last_iter = 0;
  for (const auto& e : log) {
    if (e.iteration <= last_iter) return false;
    last_iter = e.iteration;
    if (last && (!e.best_cost || *e.best_cost > *last)) return false;
    if (e.best_cost) last = e.best_cost;
  }
  return true;
}

}  // namespace kinorrt
