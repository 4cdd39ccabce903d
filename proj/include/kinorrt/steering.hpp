#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "kinorrt/lti.hpp"

namespace kinorrt {

enum class SteeringVariant { pff, pff_penalty, fixed_state };

/// Optimal open-loop connection from x_start, summarized by its terminal
/// costate. The control is u(t) = -1/2 R^-1 B' e^{A'(tf - t)} lambda_tf.
struct SteeringSolution {
  SteeringVariant variant = SteeringVariant::pff;
  double tf = 0.0;
  Vector lambda_tf;
  Vector x_start;
  /// Full final state; free components are the controller's choice.
  Vector x_end;
  /// tf + running control cost + terminal_cost.
  double cost = 0.0;
  /// 1/2 x2' S x2 charged at the final state: set by the penalty variant,
  /// and by a planner that re-solves a penalized edge with fixed endpoints.
  double terminal_cost = 0.0;
  /// Set when the free-time search found no stationary arrival time and fell
  /// back to the cheapest grid time.
  bool boundary_solution = false;
};

struct TimeBounds {
  double lo = 0.05;
  double hi = 1.0;
  bool operator==(const TimeBounds&) const = default;
};

inline constexpr int kArrivalGridPoints = 64;
inline constexpr double kArrivalTimeRelTol = 1e-9;

/// [0.05, 4 d / v_ref + 1] with v_ref = 1 m/s.
TimeBounds default_time_bounds(double position_distance);

SteeringSolution solve_pff_fixed_time(const LinearSystem& sys, const Vector& x_a,
                                      const Vector& x_c, double tf);
SteeringSolution solve_pff_free_time(const LinearSystem& sys, const Vector& x_a,
                                     const Vector& x_c, TimeBounds bounds);
SteeringSolution solve_pff_free_time(const LinearSystem& sys, const Vector& x_a,
                                     const Vector& x_c);

SteeringSolution solve_pff_penalty(const LinearSystem& sys, const TerminalPenalty& penalty,
                                   const Vector& x_a, const Vector& x_c, double tf);
SteeringSolution solve_pff_penalty_free_time(const LinearSystem& sys,
                                             const TerminalPenalty& penalty, const Vector& x_a,
                                             const Vector& x_c, TimeBounds bounds);

SteeringSolution solve_fixed_state_fixed_time(const LinearSystem& sys, const Vector& x_a,
                                              const Vector& x_b, double tf);
SteeringSolution solve_fixed_state_free_time(const LinearSystem& sys, const Vector& x_a,
                                             const Vector& x_b, TimeBounds bounds);
SteeringSolution solve_fixed_state_free_time(const LinearSystem& sys, const Vector& x_a,
                                             const Vector& x_b);

/// H at the final time, 1 + lambda'(A x + c) - 1/4 lambda' Q lambda.
double terminal_hamiltonian(const LinearSystem& sys, const SteeringSolution& sol);

/// H(t) along the solution, with the optimal control substituted.
double hamiltonian_residual(const LinearSystem& sys, const SteeringSolution& sol, double t);

/// Position distance over v_des, floored at 1 ms.
double heuristic_arrival_time(const Vector& from_position, const Vector& to_position,
                              double v_des);

/// Free-arrival-time solver with the horizon grid precomputed.
///
/// The Gramian, transition matrix and drift depend only on the horizon, so a
/// planner that keeps t_bounds fixed pays for the 64 grid exponentials once;
/// each query then costs the grid sweep plus the root refinement.
class ArrivalTimeSearch {
 public:
  ArrivalTimeSearch(LinearSystem sys, std::optional<TerminalPenalty> penalty, TimeBounds bounds,
                    int grid_points = kArrivalGridPoints);
  ~ArrivalTimeSearch();
  ArrivalTimeSearch(ArrivalTimeSearch&&) noexcept;
  ArrivalTimeSearch& operator=(ArrivalTimeSearch&&) noexcept;

  /// Partial-final-state-free connection to the leading block x_c; uses the
  /// terminal penalty when one was supplied.
  SteeringSolution pff(const Vector& x_a, const Vector& x_c) const;
  SteeringSolution fixed_state(const Vector& x_a, const Vector& x_b) const;

  const LinearSystem& system() const;
  TimeBounds bounds() const;
  const std::vector<double>& grid() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace kinorrt
