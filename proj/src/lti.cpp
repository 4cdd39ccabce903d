#include "kinorrt/lti.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "kinorrt/errors.hpp"

namespace kinorrt {
namespace {

constexpr double kControllabilityRatio = 1e-10;
constexpr double kIllConditionedRcond = 1e-12;

void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidInput(message);
}

bool all_finite(const Matrix& M) { return M.allFinite(); }

Matrix augmented_generator(const Matrix& A, const Matrix& coupling, const Vector& c) {
  const auto n = A.rows();
  Matrix M = Matrix::Zero(2 * n + 1, 2 * n + 1);
  M.block(0, 0, n, n) = A;
  M.block(0, n, n, n) = coupling;
  M.block(0, 2 * n, n, 1) = c;
  M.block(n, n, n, n) = -A.transpose();
  return M;
}

}  // namespace

LinearSystem::LinearSystem(Matrix A, Matrix B, Vector c, Matrix R, int n1)
    : A_(std::move(A)), B_(std::move(B)), c_(std::move(c)), R_(std::move(R)), n1_(n1) {
  const auto n = A_.rows();
  require(n > 0 && A_.cols() == n, "A must be square and non-empty");
  require(B_.rows() == n && B_.cols() > 0, "B must have as many rows as A");
  require(c_.size() == n, "c must have one entry per state");
  require(R_.rows() == B_.cols() && R_.cols() == B_.cols(), "R must be m x m");
  require(all_finite(A_) && all_finite(B_) && c_.allFinite() && all_finite(R_),
          "system matrices must be finite");
  require(n1_ >= 1 && n1_ <= n, "n1 must lie in [1, n]");
  require((R_ - R_.transpose()).norm() <= 1e-12 * std::max(1.0, R_.norm()), "R must be symmetric");

  Eigen::LLT<Matrix> llt(R_);
  require(llt.info() == Eigen::Success, "R must be positive definite");
  R_inv_ = llt.solve(Matrix::Identity(R_.rows(), R_.cols()));
  Q_ = B_ * R_inv_ * B_.transpose();
  horizon_flow_ = std::make_shared<const ExponentialFamily>(augmented_generator(A_, Q_, c_));
  hamiltonian_flow_ =
      std::make_shared<const ExponentialFamily>(augmented_generator(A_, -0.5 * Q_, c_));

  const Gramian probe = weighted_gramian(*this, 1.0);
  Eigen::JacobiSVD<Matrix> svd(probe.matrix);
  const auto& sigma = svd.singularValues();
  require(sigma(0) > 0.0 && sigma(sigma.size() - 1) >= kControllabilityRatio * sigma(0),
          "(A, B) is not controllable");
}

LinearSystem LinearSystem::with_partition(int n1) const { return LinearSystem(A_, B_, c_, R_, n1); }

TerminalPenalty::TerminalPenalty(Matrix S_in) : S(std::move(S_in)) {
  require(S.rows() == S.cols(), "S must be square");
  require(S.allFinite(), "S must be finite");
  if (S.size() == 0) return;
  const double scale = std::max(1.0, S.norm());
  require((S - S.transpose()).norm() <= 1e-12 * scale, "S must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
  require(eig.eigenvalues().minCoeff() >= -1e-12 * scale, "S must be positive semidefinite");
}

void QuadrotorParams::validate() const {
  require(g > 0 && mass > 0 && arm > 0 && inertia > 0,
          "quadrotor parameters must be strictly positive");
}

Matrix matrix_exponential(const Matrix& M, double t) {
  require(M.rows() == M.cols(), "matrix_exponential needs a square matrix");
  require(std::isfinite(t) && M.allFinite(), "matrix_exponential: non-finite input");
  if (t == 0.0) return Matrix::Identity(M.rows(), M.cols());
  Matrix scaled = M * t;
  return scaled.exp();
}

ExponentialFamily::ExponentialFamily(Matrix M) : M_(std::move(M)) {
  require(M_.rows() == M_.cols(), "exponential family needs a square generator");
  require(M_.allFinite(), "exponential family: non-finite generator");
  const auto n = M_.rows();
  std::vector<Matrix> terms{Matrix::Identity(n, n)};
  Matrix power = Matrix::Identity(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    power = power * M_;
    // exact zeros only: structural nilpotency, not rounding
    if ((power.array() == 0.0).all()) {
      terms_ = std::move(terms);
      return;
    }
    terms.push_back(terms.back() * M_ / static_cast<double>(k));
  }
}

Matrix ExponentialFamily::at(double t) const {
  require(std::isfinite(t), "exponential family: non-finite time");
  if (terms_.empty()) return matrix_exponential(M_, t);
  Matrix E = terms_.back();
  for (auto k = terms_.size() - 1; k-- > 0;) {
    E *= t;
    E += terms_[k];
  }
  return E;
}

Vector drift_state(const LinearSystem& sys, const Vector& x0, double t) {
  require(t >= 0.0 && std::isfinite(t), "drift_state: t must be finite and non-negative");
  require(x0.size() == sys.n(), "drift_state: x0 has the wrong size");
  const int n = sys.n();
  Matrix aug = Matrix::Zero(n + 1, n + 1);
  aug.topLeftCorner(n, n) = sys.A();
  aug.topRightCorner(n, 1) = sys.c();
  const Matrix E = matrix_exponential(aug, t);
  return E.topLeftCorner(n, n) * x0 + E.topRightCorner(n, 1);
}

HorizonResponse horizon_response(const LinearSystem& sys, double t) {
  require(t > 0.0 && std::isfinite(t), "horizon must be finite and positive");
  const int n = sys.n();
  const Matrix E = sys.horizon_flow().at(t);

  HorizonResponse out;
  out.t = t;
  out.transition = E.block(0, 0, n, n);
  const Matrix G = E.block(0, n, n, n) * out.transition.transpose();
  out.gramian = 0.5 * (G + G.transpose());
  out.drift = E.block(0, 2 * n, n, 1);
  return out;
}

Gramian weighted_gramian(const LinearSystem& sys, double tf) {
  require(tf > 0.0 && std::isfinite(tf), "weighted_gramian: tf must be positive");
  Gramian out;
  out.matrix = horizon_response(sys, tf).gramian;
  Eigen::LLT<Matrix> llt(out.matrix);
  out.rcond = llt.info() == Eigen::Success ? llt.rcond() : 0.0;
  out.ill_conditioned = out.rcond < kIllConditionedRcond;
  return out;
}

LinearSystem build_double_integrator(int dims) {
  require(dims >= 1, "double integrator needs at least one axis");
  const int n = 2 * dims;
  Matrix A = Matrix::Zero(n, n);
  A.topRightCorner(dims, dims).setIdentity();
  Matrix B = Matrix::Zero(n, dims);
  B.bottomRows(dims).setIdentity();
  return LinearSystem(A, B, Vector::Zero(n), Matrix::Identity(dims, dims), dims);
}

LinearSystem build_double_integrator_2d() { return build_double_integrator(2); }

QuadrotorModel build_quadrotor_10d(const QuadrotorParams& params) {
  params.validate();
  // state: p(0..2) v(3..5) r(6..7) w(8..9)
  Matrix A = Matrix::Zero(10, 10);
  A.block(0, 3, 3, 3).setIdentity();
  A(3, 7) = params.g;
  A(4, 6) = -params.g;
  A.block(6, 8, 2, 2).setIdentity();

  Matrix B = Matrix::Zero(10, 3);
  B(5, 0) = 1.0 / params.mass;
  B(8, 1) = params.arm / params.inertia;
  B(9, 2) = params.arm / params.inertia;

  const Vector r_diag = (Vector(3) << 15.0, 30.0, 30.0).finished();
  const Vector s_diag = (Vector(7) << 0.0, 0.0, 0.0, 20.0, 20.0, 0.0, 0.0).finished();

  return QuadrotorModel{LinearSystem(A, B, Vector::Zero(10), r_diag.asDiagonal(), 3),
                        TerminalPenalty(s_diag.asDiagonal())};
}

}  // namespace kinorrt
