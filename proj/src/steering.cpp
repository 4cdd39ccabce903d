#include "kinorrt/steering.hpp"

#include <cmath>
#include <limits>

#include <boost/math/tools/toms748_solve.hpp>

#include "kinorrt/errors.hpp"
#include "kinorrt/trajectory.hpp"

namespace kinorrt {
namespace {

constexpr double kSolveRcond = 1e-14;
constexpr double kSolveResidual = 1e-9;
// A grid time only displaces a refined root when it is cheaper by more than
// rounding noise.
constexpr double kRootPreference = 1e-9;

enum Needs : unsigned { kNeedLeading = 1u, kNeedFull = 2u, kNeedPenalty = 4u };

// One horizon with the factorizations the closed-form solves need.
struct Horizon {
  HorizonResponse response;
  Eigen::LLT<Matrix> leading;
  Eigen::LLT<Matrix> full;
  Matrix penalty_matrix;
  Eigen::PartialPivLU<Matrix> penalty_system;
  bool leading_ok = false;
  bool full_ok = false;
  bool penalty_ok = false;
};

bool usable(const Eigen::LLT<Matrix>& llt) {
  return llt.info() == Eigen::Success && llt.rcond() >= kSolveRcond;
}

Horizon make_horizon(const LinearSystem& sys, const TerminalPenalty* penalty, double t,
                     unsigned needs) {
  Horizon h;
  h.response = horizon_response(sys, t);
  const Matrix& G = h.response.gramian;
  const int n1 = sys.n1();
  const int n2 = sys.n2();
  if (needs & kNeedLeading) {
    h.leading.compute(G.topLeftCorner(n1, n1));
    h.leading_ok = usable(h.leading);
  }
  if (needs & kNeedFull) {
    h.full.compute(G);
    h.full_ok = usable(h.full);
  }
  if ((needs & kNeedPenalty) && penalty != nullptr) {
    const Matrix& S = penalty->S;
    Matrix M(sys.n(), sys.n());
    M.topLeftCorner(n1, n1) = 0.5 * G.topLeftCorner(n1, n1);
    M.topRightCorner(n1, n2) = 0.5 * G.topRightCorner(n1, n2) * S;
    M.bottomLeftCorner(n2, n1) = 0.5 * G.bottomLeftCorner(n2, n1);
    M.bottomRightCorner(n2, n2) =
        0.5 * G.bottomRightCorner(n2, n2) * S + Matrix::Identity(n2, n2);
    h.penalty_system.compute(M);
    h.penalty_matrix = std::move(M);
    h.penalty_ok = h.penalty_system.rcond() >= kSolveRcond;
  }
  return h;
}

template <typename V1, typename V2>
bool small_residual(const V1& residual, const V2& rhs) {
  return residual.norm() <= kSolveResidual * (1.0 + rhs.norm());
}

Vector free_drift(const Horizon& h, const Vector& x_a) {
  return h.response.transition * x_a + h.response.drift;
}

std::optional<SteeringSolution> pff_at(const LinearSystem& sys, const Horizon& h,
                                       const Vector& x_a, const Vector& x_c) {
  if (!h.leading_ok) return std::nullopt;
  const int n = sys.n();
  const int n1 = sys.n1();
  const int n2 = sys.n2();
  const Matrix& G = h.response.gramian;
  const Vector xbar = free_drift(h, x_a);
  const Vector r1 = xbar.head(n1) - x_c;

  Vector lambda = Vector::Zero(n);
  lambda.head(n1) = 2.0 * h.leading.solve(r1);
  if (!small_residual(0.5 * (G.topLeftCorner(n1, n1) * lambda.head(n1)) - r1, r1)) {
    return std::nullopt;
  }

  SteeringSolution sol;
  sol.variant = SteeringVariant::pff;
  sol.tf = h.response.t;
  sol.x_start = x_a;
  sol.x_end.resize(n);
  sol.x_end.head(n1) = x_c;
  sol.x_end.tail(n2) = xbar.tail(n2) - 0.5 * (G.bottomLeftCorner(n2, n1) * lambda.head(n1));
  sol.cost = sol.tf + 0.25 * lambda.dot(G * lambda);
  sol.lambda_tf = std::move(lambda);
  return sol;
}

std::optional<SteeringSolution> penalty_at(const LinearSystem& sys, const TerminalPenalty& penalty,
                                           const Horizon& h, const Vector& x_a,
                                           const Vector& x_c) {
  if (!h.penalty_ok) return std::nullopt;
  const int n = sys.n();
  const int n1 = sys.n1();
  const int n2 = sys.n2();
  const Matrix& G = h.response.gramian;
  const Vector xbar = free_drift(h, x_a);

  Vector rhs(n);
  rhs.head(n1) = xbar.head(n1) - x_c;
  rhs.tail(n2) = xbar.tail(n2);
  const Vector y = h.penalty_system.solve(rhs);
  if (!small_residual(h.penalty_matrix * y - rhs, rhs)) return std::nullopt;

  const Vector x2 = y.tail(n2);
  Vector lambda(n);
  lambda.head(n1) = y.head(n1);
  lambda.tail(n2) = penalty.S * x2;

  SteeringSolution sol;
  sol.variant = SteeringVariant::pff_penalty;
  sol.tf = h.response.t;
  sol.x_start = x_a;
  sol.x_end.resize(n);
  sol.x_end.head(n1) = x_c;
  sol.x_end.tail(n2) = x2;
  sol.terminal_cost = 0.5 * x2.dot(penalty.S * x2);
  sol.cost = sol.tf + 0.25 * lambda.dot(G * lambda) + sol.terminal_cost;
  sol.lambda_tf = std::move(lambda);
  return sol;
}

std::optional<SteeringSolution> fixed_at(const LinearSystem& sys, const Horizon& h,
                                         const Vector& x_a, const Vector& x_b) {
  if (!h.full_ok) return std::nullopt;
  const Matrix& G = h.response.gramian;
  const Vector xbar = free_drift(h, x_a);
  const Vector r = xbar - x_b;

  Vector lambda = Vector::Zero(sys.n());
  lambda.head(sys.n()) = 2.0 * h.full.solve(r);
  if (!small_residual(0.5 * (G * lambda) - r, r)) return std::nullopt;

  SteeringSolution sol;
  sol.variant = SteeringVariant::fixed_state;
  sol.tf = h.response.t;
  sol.x_start = x_a;
  sol.x_end = x_b;
  sol.cost = sol.tf + 0.25 * lambda.dot(G * lambda);
  sol.lambda_tf = std::move(lambda);
  return sol;
}

// Cost and H(tf) at one horizon without assembling a SteeringSolution; the
// grid sweep and the root refinement only need these two numbers.
struct Probe {
  double cost;
  double H;
};

// Vec is Vector or a stack-backed vector of bounded size; the probes run
// thousands of times per planner iteration, so heap traffic dominates.
template <typename Vec>
std::optional<Probe> pff_probe_impl(const LinearSystem& sys, const Horizon& h, const Vector& x_a,
                                    const Vector& x_c) {
  if (!h.leading_ok) return std::nullopt;
  const int n1 = sys.n1();
  const int n2 = sys.n2();
  const Matrix& G = h.response.gramian;
  Vec x = h.response.drift;
  x.noalias() += h.response.transition * x_a;
  const Vec r1 = x.head(n1) - x_c;
  Vec l1 = h.leading.solve(r1);
  l1 *= 2.0;
  Vec g1(n1);
  g1.noalias() = G.topLeftCorner(n1, n1) * l1;
  Vec res = 0.5 * g1 - r1;
  if (!small_residual(res, r1)) return std::nullopt;
  x.tail(n2).noalias() -= 0.5 * (G.bottomLeftCorner(n2, n1) * l1);
  x.head(n1) = x_c;
  Vec flow = sys.c().head(n1);
  flow.noalias() += sys.A().topRows(n1) * x;
  Vec ql(n1);
  ql.noalias() = sys.Q().topLeftCorner(n1, n1) * l1;
  const double cost = h.response.t + 0.25 * l1.dot(g1);
  const double H = 1.0 + l1.dot(flow) - 0.25 * l1.dot(ql);
  return Probe{cost, H};
}

template <typename Vec>
std::optional<Probe> fixed_probe_impl(const LinearSystem& sys, const Horizon& h,
                                      const Vector& x_a, const Vector& x_b) {
  if (!h.full_ok) return std::nullopt;
  const Matrix& G = h.response.gramian;
  Vec r = h.response.drift - x_b;
  r.noalias() += h.response.transition * x_a;
  Vec lambda = h.full.solve(r);
  lambda *= 2.0;
  Vec g(lambda.size());
  g.noalias() = G * lambda;
  Vec res = 0.5 * g - r;
  if (!small_residual(res, r)) return std::nullopt;
  Vec flow = sys.c();
  flow.noalias() += sys.A() * x_b;
  Vec ql(lambda.size());
  ql.noalias() = sys.Q() * lambda;
  const double cost = h.response.t + 0.25 * lambda.dot(g);
  const double H = 1.0 + lambda.dot(flow) - 0.25 * lambda.dot(ql);
  return Probe{cost, H};
}

constexpr int kStackDims = 32;
using StackVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kStackDims, 1>;

std::optional<Probe> pff_probe(const LinearSystem& sys, const Horizon& h, const Vector& x_a,
                               const Vector& x_c) {
  return sys.n() <= kStackDims ? pff_probe_impl<StackVector>(sys, h, x_a, x_c)
                               : pff_probe_impl<Vector>(sys, h, x_a, x_c);
}

std::optional<Probe> fixed_probe(const LinearSystem& sys, const Horizon& h, const Vector& x_a,
                                 const Vector& x_b) {
  return sys.n() <= kStackDims ? fixed_probe_impl<StackVector>(sys, h, x_a, x_b)
                               : fixed_probe_impl<Vector>(sys, h, x_a, x_b);
}

std::optional<Probe> full_probe(const LinearSystem& sys, const std::optional<SteeringSolution>& sol) {
  if (!sol) return std::nullopt;
  return Probe{sol->cost, terminal_hamiltonian(sys, *sol)};
}

void check_state(const LinearSystem& sys, const Vector& x, const char* what) {
  if (x.size() != sys.n() || !x.allFinite()) {
    throw InvalidInput(std::string(what) + " must be a finite " + std::to_string(sys.n()) +
                       "-vector");
  }
}

void check_target(const LinearSystem& sys, const Vector& x_c) {
  if (x_c.size() != sys.n1() || !x_c.allFinite()) {
    throw InvalidInput("target must be a finite " + std::to_string(sys.n1()) + "-vector");
  }
}

void check_penalty(const LinearSystem& sys, const TerminalPenalty& penalty) {
  if (penalty.S.rows() != sys.n2()) {
    throw InvalidInput("terminal penalty must be n2 x n2 (" + std::to_string(sys.n2()) + ")");
  }
}

void check_horizon(double tf) {
  if (!(tf > 0.0) || !std::isfinite(tf)) throw InvalidInput("arrival time must be positive");
}

void check_bounds(TimeBounds b) {
  if (!(b.lo > 0.0) || !(b.hi > b.lo) || !std::isfinite(b.hi)) {
    throw InvalidInput("time bounds must satisfy 0 < lo < hi");
  }
}

SteeringSolution require_solution(std::optional<SteeringSolution> sol, double tf) {
  if (!sol) throw DegenerateHorizon("Gramian block is numerically singular at tf = " + std::to_string(tf));
  return std::move(*sol);
}

// Bracket sign changes of H(tf) on the grid, refine each, keep the cheapest.
// probe_grid(k) and probe_time(t) give (cost, H); build_grid / build_time
// assemble the solution that wins.
template <typename ProbeGrid, typename ProbeTime, typename BuildGrid, typename BuildTime>
SteeringSolution search_arrival_time(const std::vector<double>& grid, ProbeGrid&& probe_grid,
                                     ProbeTime&& probe_time, BuildGrid&& build_grid,
                                     BuildTime&& build_time) {
  std::vector<std::optional<Probe>> samples;
  samples.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) samples.push_back(probe_grid(k));

  std::optional<double> root_time;
  double root_cost = std::numeric_limits<double>::infinity();
  bool root_on_grid = false;
  std::size_t root_index = 0;

  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!samples[k]) continue;
    if (samples[k]->H == 0.0) {
      if (samples[k]->cost < root_cost) {
        root_time = grid[k];
        root_cost = samples[k]->cost;
        root_on_grid = true;
        root_index = k;
      }
      continue;
    }
    if (k + 1 == grid.size() || !samples[k + 1]) continue;
    const double fa = samples[k]->H;
    const double fb = samples[k + 1]->H;
    if (!(fa * fb < 0.0)) continue;

    try {
      auto h_of = [&](double t) {
        auto p = probe_time(t);
        if (!p) throw DegenerateHorizon("degenerate horizon during refinement");
        return p->H;
      };
      auto tol = [](double lo, double hi) { return hi - lo <= kArrivalTimeRelTol * lo; };
      std::uintmax_t iterations = 200;
      const auto bracket =
          boost::math::tools::toms748_solve(h_of, grid[k], grid[k + 1], fa, fb, tol, iterations);
      const double t = 0.5 * (bracket.first + bracket.second);
      const auto p = probe_time(t);
      if (p && p->cost < root_cost) {
        root_time = t;
        root_cost = p->cost;
        root_on_grid = false;
      }
    } catch (const DegenerateHorizon&) {
      // bracket unusable; the grid fallback still covers it
    }
  }

  std::optional<std::size_t> best_grid;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (samples[k] && (!best_grid || samples[k]->cost < samples[*best_grid]->cost)) best_grid = k;
  }
  if (root_time) {
    const double margin = kRootPreference * (1.0 + std::abs(root_cost));
    if (!best_grid || !(samples[*best_grid]->cost < root_cost - margin)) {
      if (auto sol = root_on_grid ? build_grid(root_index) : build_time(*root_time)) return std::move(*sol);
    }
  }
  if (!best_grid) throw NoConnection("every candidate arrival time is degenerate");
  auto sol = build_grid(*best_grid);
  if (!sol) throw NoConnection("every candidate arrival time is degenerate");
  sol->boundary_solution = true;
  return std::move(*sol);
}

std::vector<double> log_grid(TimeBounds b, int points) {
  std::vector<double> grid(points);
  const double ratio = std::log(b.hi / b.lo);
  for (int k = 0; k < points; ++k) {
    grid[k] = b.lo * std::exp(ratio * k / (points - 1));
  }
  grid.front() = b.lo;
  grid.back() = b.hi;
  return grid;
}

}  // namespace

TimeBounds default_time_bounds(double position_distance) {
  constexpr double kReferenceSpeed = 1.0;
  return TimeBounds{0.05, 4.0 * position_distance / kReferenceSpeed + 1.0};
}

double terminal_hamiltonian(const LinearSystem& sys, const SteeringSolution& sol) {
  const Vector& lambda = sol.lambda_tf;
  return 1.0 + lambda.dot(sys.A() * sol.x_end + sys.c()) - 0.25 * lambda.dot(sys.Q() * lambda);
}

double hamiltonian_residual(const LinearSystem& sys, const SteeringSolution& sol, double t) {
  const TrajectoryPoint p = Trajectory(sys, sol).at(t);
  return 1.0 + p.control.dot(sys.R() * p.control) +
         p.costate.dot(sys.A() * p.state + sys.B() * p.control + sys.c());
}

double heuristic_arrival_time(const Vector& from_position, const Vector& to_position,
                              double v_des) {
  if (!(v_des > 0.0)) throw InvalidInput("desired speed must be positive");
  constexpr double kFloor = 1e-3;
  return std::max(kFloor, (to_position - from_position).norm() / v_des);
}

SteeringSolution solve_pff_fixed_time(const LinearSystem& sys, const Vector& x_a,
                                      const Vector& x_c, double tf) {
  check_state(sys, x_a, "x_a");
  check_target(sys, x_c);
  check_horizon(tf);
  return require_solution(pff_at(sys, make_horizon(sys, nullptr, tf, kNeedLeading), x_a, x_c), tf);
}

SteeringSolution solve_pff_penalty(const LinearSystem& sys, const TerminalPenalty& penalty,
                                   const Vector& x_a, const Vector& x_c, double tf) {
  check_state(sys, x_a, "x_a");
  check_target(sys, x_c);
  check_penalty(sys, penalty);
  check_horizon(tf);
  return require_solution(
      penalty_at(sys, penalty, make_horizon(sys, &penalty, tf, kNeedPenalty), x_a, x_c), tf);
}

SteeringSolution solve_fixed_state_fixed_time(const LinearSystem& sys, const Vector& x_a,
                                              const Vector& x_b, double tf) {
  check_state(sys, x_a, "x_a");
  check_state(sys, x_b, "x_b");
  check_horizon(tf);
  return require_solution(fixed_at(sys, make_horizon(sys, nullptr, tf, kNeedFull), x_a, x_b), tf);
}

SteeringSolution solve_pff_free_time(const LinearSystem& sys, const Vector& x_a,
                                     const Vector& x_c, TimeBounds bounds) {
  return ArrivalTimeSearch(sys, std::nullopt, bounds).pff(x_a, x_c);
}

SteeringSolution solve_pff_free_time(const LinearSystem& sys, const Vector& x_a,
                                     const Vector& x_c) {
  check_state(sys, x_a, "x_a");
  check_target(sys, x_c);
  return solve_pff_free_time(sys, x_a, x_c,
                             default_time_bounds((x_a.head(sys.n1()) - x_c).norm()));
}

SteeringSolution solve_pff_penalty_free_time(const LinearSystem& sys,
                                             const TerminalPenalty& penalty, const Vector& x_a,
                                             const Vector& x_c, TimeBounds bounds) {
  return ArrivalTimeSearch(sys, penalty, bounds).pff(x_a, x_c);
}

SteeringSolution solve_fixed_state_free_time(const LinearSystem& sys, const Vector& x_a,
                                             const Vector& x_b, TimeBounds bounds) {
  return ArrivalTimeSearch(sys, std::nullopt, bounds).fixed_state(x_a, x_b);
}

SteeringSolution solve_fixed_state_free_time(const LinearSystem& sys, const Vector& x_a,
                                             const Vector& x_b) {
  check_state(sys, x_a, "x_a");
  check_state(sys, x_b, "x_b");
  const int n1 = sys.n1();
  return solve_fixed_state_free_time(sys, x_a, x_b,
                                     default_time_bounds((x_a.head(n1) - x_b.head(n1)).norm()));
}

struct ArrivalTimeSearch::Impl {
  LinearSystem sys;
  std::optional<TerminalPenalty> penalty;
  TimeBounds bounds;
  std::vector<double> grid;
  std::vector<Horizon> horizons;

  const TerminalPenalty* penalty_ptr() const { return penalty ? &*penalty : nullptr; }
  unsigned pff_needs() const { return penalty ? kNeedPenalty : kNeedLeading; }

  std::optional<SteeringSolution> pff_solution(const Horizon& h, const Vector& x_a,
                                               const Vector& x_c) const {
    return penalty ? penalty_at(sys, *penalty, h, x_a, x_c) : pff_at(sys, h, x_a, x_c);
  }

  std::optional<Probe> pff_probe_at(const Horizon& h, const Vector& x_a, const Vector& x_c) const {
    return penalty ? full_probe(sys, penalty_at(sys, *penalty, h, x_a, x_c))
                   : pff_probe(sys, h, x_a, x_c);
  }
};

ArrivalTimeSearch::ArrivalTimeSearch(LinearSystem sys, std::optional<TerminalPenalty> penalty,
                                     TimeBounds bounds, int grid_points)
    : impl_(std::make_unique<Impl>(Impl{std::move(sys), std::move(penalty), bounds, {}, {}})) {
  check_bounds(bounds);
  if (grid_points < 2) throw InvalidInput("arrival-time grid needs at least two points");
  if (impl_->penalty) check_penalty(impl_->sys, *impl_->penalty);
  impl_->grid = log_grid(bounds, grid_points);
  impl_->horizons.reserve(grid_points);
  const unsigned needs = impl_->pff_needs() | kNeedFull;
  for (double t : impl_->grid) {
    impl_->horizons.push_back(make_horizon(impl_->sys, impl_->penalty_ptr(), t, needs));
  }
}

ArrivalTimeSearch::~ArrivalTimeSearch() = default;
ArrivalTimeSearch::ArrivalTimeSearch(ArrivalTimeSearch&&) noexcept = default;
ArrivalTimeSearch& ArrivalTimeSearch::operator=(ArrivalTimeSearch&&) noexcept = default;

SteeringSolution ArrivalTimeSearch::pff(const Vector& x_a, const Vector& x_c) const {
  const Impl& s = *impl_;
  check_state(s.sys, x_a, "x_a");
  check_target(s.sys, x_c);
  auto horizon_at = [&](double t) { return make_horizon(s.sys, s.penalty_ptr(), t, s.pff_needs()); };
  return search_arrival_time(
      s.grid, [&](std::size_t k) { return s.pff_probe_at(s.horizons[k], x_a, x_c); },
      [&](double t) { return s.pff_probe_at(horizon_at(t), x_a, x_c); },
      [&](std::size_t k) { return s.pff_solution(s.horizons[k], x_a, x_c); },
      [&](double t) { return s.pff_solution(horizon_at(t), x_a, x_c); });
}

SteeringSolution ArrivalTimeSearch::fixed_state(const Vector& x_a, const Vector& x_b) const {
  const Impl& s = *impl_;
  check_state(s.sys, x_a, "x_a");
  check_state(s.sys, x_b, "x_b");
  auto horizon_at = [&](double t) { return make_horizon(s.sys, nullptr, t, kNeedFull); };
  return search_arrival_time(
      s.grid, [&](std::size_t k) { return fixed_probe(s.sys, s.horizons[k], x_a, x_b); },
      [&](double t) { return fixed_probe(s.sys, horizon_at(t), x_a, x_b); },
      [&](std::size_t k) { return fixed_at(s.sys, s.horizons[k], x_a, x_b); },
      [&](double t) { return fixed_at(s.sys, horizon_at(t), x_a, x_b); });
}

const LinearSystem& ArrivalTimeSearch::system() const { return impl_->sys; }
TimeBounds ArrivalTimeSearch::bounds() const { return impl_->bounds; }
const std::vector<double>& ArrivalTimeSearch::grid() const { return impl_->grid; }

}  // namespace kinorrt
