#pragma once

#include <functional>
#include <vector>

#include "kinorrt/lti.hpp"
#include "kinorrt/steering.hpp"

// Reference computations that avoid the production code paths they check.
// Shared by the test suites and the `validate` command.
namespace kinorrt::oracles {

/// exp(M t) from a truncated Taylor series with scaling and squaring.
Matrix taylor_exponential(const Matrix& M, double t);

/// Adaptive Gauss-Kronrod (7/15) integral of a matrix-valued function,
/// refined until every panel's error estimate is below rel_tol * |integral|.
Matrix integrate(const std::function<Matrix(double)>& f, double a, double b,
                 double rel_tol = 1e-13);

/// Weighted Gramian by quadrature of e^{A(tf-s)} B R^-1 B' e^{A'(tf-s)}.
Matrix quadrature_gramian(const LinearSystem& sys, double tf);

/// Relative Frobenius error |X - Y| / |Y|.
double relative_error(const Matrix& X, const Matrix& Y);

/// Closed forms for the 1-D double integrator from rest at the origin, R = 1.
namespace double_integrator_1d {
/// Minimum energy to reach position p with velocity v at time T.
double fixed_state_energy(double p, double v, double T);
/// Optimal PFF cost T + 3 p^2 / T^3 (free final velocity).
double pff_cost(double p, double T);
/// Free final velocity chosen by the PFF controller, 3p / (2T).
double pff_final_velocity(double p, double T);
/// Arrival time minimizing pff_cost, (9 p^2)^(1/4).
double pff_optimal_time(double p);
/// Open-loop PFF control u(t) = 3 p (T - t) / T^3.
double pff_control(double p, double T, double t);
}  // namespace double_integrator_1d

/// Cheapest fixed-final-state connection over a grid of completions of the
/// free block: every combination of `per_axis` evenly spaced values in
/// [lo, hi] for each free component.
struct CompletionGridResult {
  double cost;
  Vector free_block;
  double cell;  // grid spacing
};
CompletionGridResult completion_grid_minimum(const LinearSystem& sys, const Vector& x_a,
                                             const Vector& x_c, double tf, double lo, double hi,
                                             int per_axis);

/// Minimum over `points` log-spaced arrival times of a fixed-time solver.
double dense_time_minimum(const std::function<double(double)>& cost_at, TimeBounds bounds,
                          int points = 200);

/// Composite Simpson integral of 1 + u'Ru along the solution (odd `points`).
double simpson_running_cost(const LinearSystem& sys, const SteeringSolution& sol, int points = 401);

}  // namespace kinorrt::oracles
