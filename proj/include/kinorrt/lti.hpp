#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace kinorrt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// t -> exp(M t) for one fixed M. A nilpotent M (every chain-of-integrators
/// model) is evaluated exactly as the finite series sum M^k t^k / k!;
/// anything else goes through matrix_exponential.
class ExponentialFamily {
 public:
  explicit ExponentialFamily(Matrix M);

  Matrix at(double t) const;
  const Matrix& generator() const { return M_; }
  /// True when the finite series is in use.
  bool polynomial() const { return !terms_.empty(); }

 private:
  Matrix M_;
  std::vector<Matrix> terms_;  // M^k / k!
};

/// Continuous-time system x' = A x + B u + c with running cost 1 + u'Ru.
///
/// The state is split as x = [x1; x2], where the leading n1 components are
/// the block the planner samples and the trailing n2 = n - n1 components are
/// left for the steering controller to choose.
class LinearSystem {
 public:
  /// Throws InvalidInput when shapes disagree, R is not symmetric positive
  /// definite, n1 is outside [1, n], or (A, B) is not controllable.
  LinearSystem(Matrix A, Matrix B, Vector c, Matrix R, int n1);

  const Matrix& A() const { return A_; }
  const Matrix& B() const { return B_; }
  const Vector& c() const { return c_; }
  const Matrix& R() const { return R_; }
  const Matrix& R_inv() const { return R_inv_; }
  /// B R^-1 B'
  const Matrix& Q() const { return Q_; }

  int n() const { return static_cast<int>(A_.rows()); }
  int m() const { return static_cast<int>(B_.cols()); }
  int n1() const { return n1_; }
  int n2() const { return n() - n1_; }

  /// Same dynamics and weights, different sampled/free split.
  LinearSystem with_partition(int n1) const;

  /// exp of [[A, Q, c], [0, -A', 0], [0, 0, 0]] t, the horizon generator.
  const ExponentialFamily& horizon_flow() const { return *horizon_flow_; }
  /// exp of [[A, -Q/2, c], [0, -A', 0], [0, 0, 0]] t, the state-costate flow.
  const ExponentialFamily& hamiltonian_flow() const { return *hamiltonian_flow_; }

 private:
  Matrix A_;
  Matrix B_;
  Vector c_;
  Matrix R_;
  Matrix R_inv_;
  Matrix Q_;
  int n1_;
  std::shared_ptr<const ExponentialFamily> horizon_flow_;
  std::shared_ptr<const ExponentialFamily> hamiltonian_flow_;
};

/// Quadratic penalty 1/2 x2' S x2 on the free block of the final state.
struct TerminalPenalty {
  explicit TerminalPenalty(Matrix S);
  Matrix S;
};

struct QuadrotorParams {
  double g = 9.8;
  double mass = 0.5;
  double arm = 0.17;
  double inertia = 0.0023;

  void validate() const;
  bool operator==(const QuadrotorParams&) const = default;
};

struct QuadrotorModel {
  LinearSystem system;
  TerminalPenalty penalty;
};

/// exp(M t) by scaling and squaring with a Pade core.
Matrix matrix_exponential(const Matrix& M, double t);

/// Zero-control response e^{At} x0 + int_0^t e^{A(t-s)} c ds.
Vector drift_state(const LinearSystem& sys, const Vector& x0, double t);

struct Gramian {
  Matrix matrix;
  /// Reciprocal condition estimate of the matrix.
  double rcond = 0.0;
  bool ill_conditioned = false;
};

/// G(tf) = int_0^tf e^{A(tf-s)} B R^-1 B' e^{A'(tf-s)} ds.
Gramian weighted_gramian(const LinearSystem& sys, double tf);

/// Everything the closed-form controllers need at one horizon, from a single
/// exponential of [[A, Q, c], [0, -A', 0], [0, 0, 0]] t.
struct HorizonResponse {
  double t = 0.0;
  Matrix transition;  // e^{At}
  Matrix gramian;     // G(t)
  Vector drift;       // int_0^t e^{A(t-s)} c ds
};

HorizonResponse horizon_response(const LinearSystem& sys, double t);

/// Planar (dims = 2) or 1-D double integrator with unit control weight and
/// the position block sampled.
LinearSystem build_double_integrator(int dims);
LinearSystem build_double_integrator_2d();

/// Hover-linearized quadrotor, state [p v r w], input [thrust, roll torque,
/// pitch torque], with its attitude penalty on the free block [v r w].
QuadrotorModel build_quadrotor_10d(const QuadrotorParams& params);

}  // namespace kinorrt
