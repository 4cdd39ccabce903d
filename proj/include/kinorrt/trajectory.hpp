#pragma once

#include <vector>

#include "kinorrt/lti.hpp"
#include "kinorrt/steering.hpp"

namespace kinorrt {

struct TrajectoryPoint {
  Vector state;
  Vector control;
  Vector costate;
};

/// Time-parameterized view of one steering solution.
///
/// State and costate are propagated together through the linear system
/// d/dt [x; lambda; 1] = [[A, -Q/2, c], [0, -A', 0], [0, 0, 0]] [x; lambda; 1],
/// so uniform resampling needs a single exponential per step size. The view
/// borrows both arguments; they must outlive it.
class Trajectory {
 public:
  Trajectory(const LinearSystem& sys, const SteeringSolution& sol);

  double duration() const { return sol_->tf; }
  const SteeringSolution& solution() const { return *sol_; }

  /// Throws InvalidInput for t outside [0, tf].
  TrajectoryPoint at(double t) const;

  /// States at `segments + 1` uniformly spaced times, both ends included.
  std::vector<Vector> sample_states(int segments) const;

  /// Columns are [x; lambda; 1] at the same times as sample_states.
  Matrix sample_augmented(int segments) const;
  /// Propagator of [x; lambda; 1] over a step of length dt.
  Matrix step(double dt) const { return sys_->hamiltonian_flow().at(dt); }

 private:
  Vector augmented_at(double t) const;

  const LinearSystem* sys_;
  const SteeringSolution* sol_;
  Vector initial_;
};

/// State and open-loop control of `sol` at time t.
TrajectoryPoint eval_trajectory(const LinearSystem& sys, const SteeringSolution& sol, double t);

}  // namespace kinorrt
