#include "kinorrt/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "kinorrt/errors.hpp"

namespace kinorrt {

Trajectory::Trajectory(const LinearSystem& sys, const SteeringSolution& sol)
    : sys_(&sys), sol_(&sol) {
  const int n = sys.n();
  if (sol.x_start.size() != n || sol.lambda_tf.size() != n || !(sol.tf > 0.0)) {
    throw InvalidInput("steering solution does not match the system");
  }
  // the costate block of the flow is e^{-A't}, so lambda(0) = e^{A'tf} lambda(tf)
  const Matrix back = sys.hamiltonian_flow().at(-sol.tf);
  initial_.resize(2 * n + 1);
  initial_.head(n) = sol.x_start;
  initial_.segment(n, n) = back.block(n, n, n, n) * sol.lambda_tf;
  initial_(2 * n) = 1.0;
}

Vector Trajectory::augmented_at(double t) const {
  // rounding in callers' t = k * tf / K may overshoot tf by an ulp or two
  const double slack = 1e-12 * (1.0 + sol_->tf);
  if (!(t >= -slack && t <= sol_->tf + slack)) throw InvalidInput("trajectory time outside [0, tf]");
  t = std::clamp(t, 0.0, sol_->tf);
  if (t == 0.0) return initial_;
  return sys_->hamiltonian_flow().at(t) * initial_;
}

TrajectoryPoint Trajectory::at(double t) const {
  const int n = sys_->n();
  const Vector z = augmented_at(t);
  TrajectoryPoint p;
  p.state = z.head(n);
  p.costate = z.segment(n, n);
  p.control = -0.5 * sys_->R_inv() * (sys_->B().transpose() * p.costate);
  return p;
}

Matrix Trajectory::sample_augmented(int segments) const {
  if (segments < 1) throw InvalidInput("need at least one segment");
  const Matrix step = sys_->hamiltonian_flow().at(sol_->tf / segments);
  Matrix Z(initial_.size(), segments + 1);
  Z.col(0) = initial_;
  for (int k = 1; k <= segments; ++k) Z.col(k).noalias() = step * Z.col(k - 1);
  return Z;
}

std::vector<Vector> Trajectory::sample_states(int segments) const {
  const Matrix Z = sample_augmented(segments);
  std::vector<Vector> out;
  out.reserve(Z.cols());
  for (Eigen::Index k = 0; k < Z.cols(); ++k) out.push_back(Z.col(k).head(sys_->n()));
  return out;
}

TrajectoryPoint eval_trajectory(const LinearSystem& sys, const SteeringSolution& sol, double t) {
  return Trajectory(sys, sol).at(t);
}

}  // namespace kinorrt
