#include "kinorrt/lti.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "kinorrt/errors.hpp"
#include "kinorrt/oracles.hpp"

namespace kinorrt {
namespace {

Matrix random_stable(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal;
  Matrix M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = normal(rng);
  // shift the spectrum into the left half plane
  const double shift = M.eigenvalues().real().maxCoeff() + 0.1;
  M -= shift * Matrix::Identity(n, n);
  return M;
}

TEST(MatrixExponential, ZeroTimeIsIdentity) {
  Matrix M(3, 3);
  M << 1, 2, 3, -4, 5, 6, 7, -8, 9;
  EXPECT_TRUE(matrix_exponential(M, 0.0).isApprox(Matrix::Identity(3, 3), 0.0));
}

TEST(MatrixExponential, DoubleIntegratorSeriesTerminates) {
  Matrix A(2, 2);
  A << 0, 1, 0, 0;
  for (double s : {-2.5, 0.3, 7.0}) {
    Matrix expected(2, 2);
    expected << 1, s, 0, 1;
    EXPECT_LE((matrix_exponential(A, s) - expected).norm(), 1e-14);
  }
}

TEST(MatrixExponential, Diagonal) {
  Matrix D = Eigen::Vector2d(-0.7, 1.3).asDiagonal();
  const Matrix E = matrix_exponential(D, 2.0);
  EXPECT_NEAR(E(0, 0), std::exp(-1.4), 1e-14);
  EXPECT_NEAR(E(1, 1), std::exp(2.6), 1e-12 * std::exp(2.6));
  EXPECT_EQ(E(0, 1), 0.0);
  EXPECT_EQ(E(1, 0), 0.0);
}

TEST(MatrixExponential, MatchesTaylorOracle) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix M = random_stable(rng, 5);
    const Matrix expected = oracles::taylor_exponential(M, 1.5);
    EXPECT_LE(oracles::relative_error(matrix_exponential(M, 1.5), expected), 1e-12);
  }
}

TEST(MatrixExponential, SemigroupProperty) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> time(-5.0, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix M = random_stable(rng, 4);
    const double t = time(rng), s = time(rng);
    const Matrix lhs = matrix_exponential(M, t + s);
    const Matrix Et = matrix_exponential(M, t), Es = matrix_exponential(M, s);
    // the product of a growing and a decaying factor rounds at |Et| |Es|
    const double scale = std::max(1.0, Et.norm() * Es.norm());
    EXPECT_LE((lhs - Et * Es).norm(), 1e-10 * scale) << "t=" << t << " s=" << s;
  }
}

TEST(MatrixExponential, RejectsNonFinite) {
  Matrix M = Matrix::Zero(2, 2);
  M(0, 1) = std::nan("");
  EXPECT_THROW(matrix_exponential(M, 1.0), InvalidInput);
  EXPECT_THROW(matrix_exponential(Matrix::Zero(2, 2), INFINITY), InvalidInput);
}

TEST(ExponentialFamily, NilpotentUsesFiniteSeries) {
  const LinearSystem di = build_double_integrator_2d();
  EXPECT_TRUE(di.horizon_flow().polynomial());
  EXPECT_TRUE(build_quadrotor_10d({}).system.hamiltonian_flow().polynomial());
  for (double t : {0.1, 1.0, 4.0}) {
    const Matrix expected = matrix_exponential(di.horizon_flow().generator(), t);
    EXPECT_LE((di.horizon_flow().at(t) - expected).norm(), 1e-12 * expected.norm());
  }
}

TEST(ExponentialFamily, GeneralMatrixFallsBack) {
  Matrix M(2, 2);
  M << 0, 1, -1, 0;
  const ExponentialFamily family(M);
  EXPECT_FALSE(family.polynomial());
  const Matrix R = family.at(M_PI / 2);
  EXPECT_NEAR(R(0, 1), 1.0, 1e-14);
  EXPECT_NEAR(R(0, 0), 0.0, 1e-14);
}

TEST(LinearSystem, RejectsBadConstruction) {
  Matrix A(2, 2);
  A << 0, 1, 0, 0;
  Matrix B(2, 1);
  B << 0, 1;
  const Vector c = Vector::Zero(2);
  const Matrix R = Matrix::Identity(1, 1);
  EXPECT_NO_THROW(LinearSystem(A, B, c, R, 1));
  EXPECT_THROW(LinearSystem(A, B, c, -R, 1), InvalidInput);
  EXPECT_THROW(LinearSystem(A, B, c, R, 0), InvalidInput);
  EXPECT_THROW(LinearSystem(A, B, c, R, 3), InvalidInput);
  EXPECT_THROW(LinearSystem(A, B, Vector::Zero(3), R, 1), InvalidInput);
  // position actuated only: velocity unreachable
  Matrix B_bad(2, 1);
  B_bad << 1, 0;
  EXPECT_THROW(LinearSystem(A, B_bad, c, R, 1), InvalidInput);
}

TEST(DriftState, ZeroHorizonReturnsStart) {
  const LinearSystem sys = build_double_integrator_2d();
  const Vector x0 = Eigen::Vector4d(1, -2, 3, 0.5);
  EXPECT_EQ(drift_state(sys, x0, 0.0), x0);
}

TEST(DriftState, BallisticDoubleIntegrator) {
  const LinearSystem sys = build_double_integrator_2d();
  const Vector x = drift_state(sys, Eigen::Vector4d(0, 0, 1, 1), 2.0);
  EXPECT_LE((x - Eigen::Vector4d(2, 2, 1, 1)).norm(), 1e-14);
}

TEST(DriftState, QuadrotorHoverIsEquilibrium) {
  const auto quad = build_quadrotor_10d({});
  EXPECT_EQ(drift_state(quad.system, Vector::Zero(10), 1.0), Vector::Zero(10));
}

TEST(DriftState, ConstantDriftIntegral) {
  // x' = c from rest: x(t) = c t
  Matrix A = Matrix::Zero(1, 1);
  Matrix B = Matrix::Identity(1, 1);
  Vector c(1);
  c << 0.25;
  const LinearSystem sys(A, B, c, Matrix::Identity(1, 1), 1);
  EXPECT_NEAR(drift_state(sys, Vector::Zero(1), 4.0)(0), 1.0, 1e-15);
}

TEST(DriftState, RejectsNegativeTime) {
  const LinearSystem sys = build_double_integrator_2d();
  EXPECT_THROW(drift_state(sys, Vector::Zero(4), -0.1), InvalidInput);
}

TEST(DriftState, SatisfiesOde) {
  const double h = 1e-5;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (const LinearSystem& sys : {build_double_integrator_2d(), build_quadrotor_10d({}).system}) {
    Vector x0(sys.n());
    for (int i = 0; i < sys.n(); ++i) x0(i) = u(rng);
    for (double t : {0.5, 1.0, 3.0}) {
      const Vector fd = (drift_state(sys, x0, t + h) - drift_state(sys, x0, t - h)) / (2 * h);
      const Vector rhs = sys.A() * drift_state(sys, x0, t) + sys.c();
      EXPECT_LE((fd - rhs).lpNorm<Eigen::Infinity>(), 1e-6) << "t=" << t;
    }
  }
}

TEST(WeightedGramian, OneDimensionalClosedForm) {
  const LinearSystem sys = build_double_integrator(1);
  Matrix expected(2, 2);
  expected << 9, 4.5, 4.5, 3;
  EXPECT_LE((weighted_gramian(sys, 3.0).matrix - expected).lpNorm<Eigen::Infinity>(), 1e-9);
}

TEST(WeightedGramian, VanishesAtZeroHorizon) {
  const LinearSystem sys = build_double_integrator_2d();
  EXPECT_LE(weighted_gramian(sys, 1e-8).matrix.norm(), 1e-7);
}

TEST(WeightedGramian, RejectsNonPositiveHorizon) {
  const LinearSystem sys = build_double_integrator_2d();
  EXPECT_THROW(weighted_gramian(sys, 0.0), InvalidInput);
  EXPECT_THROW(weighted_gramian(sys, -1.0), InvalidInput);
}

TEST(WeightedGramian, TinyHorizonIsFlaggedIllConditioned) {
  const auto quad = build_quadrotor_10d({});
  EXPECT_TRUE(weighted_gramian(quad.system, 1e-4).ill_conditioned);
  EXPECT_FALSE(weighted_gramian(quad.system, 1.0).ill_conditioned);
}

TEST(WeightedGramian, SymmetricPositiveDefiniteAndMatchesQuadrature) {
  for (const LinearSystem& sys : {build_double_integrator_2d(), build_quadrotor_10d({}).system}) {
    for (double tf : {0.1, 1.0, 3.0, 10.0}) {
      const Matrix G = weighted_gramian(sys, tf).matrix;
      EXPECT_LE((G - G.transpose()).norm(), 1e-12 * G.norm());
      EXPECT_EQ(Eigen::LLT<Matrix>(G).info(), Eigen::Success);
      EXPECT_LE(oracles::relative_error(G, oracles::quadrature_gramian(sys, tf)), 1e-8)
          << "n=" << sys.n() << " tf=" << tf;
    }
  }
}

TEST(WeightedGramian, NonNilpotentSystemMatchesQuadrature) {
  Matrix A(2, 2);
  A << 0, 1, -2, -0.3;
  Matrix B(2, 1);
  B << 0, 1;
  Matrix R(1, 1);
  R << 0.5;
  const LinearSystem sys(A, B, Vector::Zero(2), R, 1);
  EXPECT_FALSE(sys.horizon_flow().polynomial());
  for (double tf : {0.1, 2.0, 6.0}) {
    EXPECT_LE(oracles::relative_error(weighted_gramian(sys, tf).matrix,
                                      oracles::quadrature_gramian(sys, tf)),
              1e-8);
  }
}

TEST(HorizonResponse, BlocksAgreeWithStandaloneKernels) {
  const auto quad = build_quadrotor_10d({});
  const HorizonResponse h = horizon_response(quad.system, 2.0);
  EXPECT_LE((h.transition - matrix_exponential(quad.system.A(), 2.0)).norm(), 1e-12);
  EXPECT_LE((h.gramian - weighted_gramian(quad.system, 2.0).matrix).norm(), 1e-9 * h.gramian.norm());
  EXPECT_EQ(h.drift, Vector::Zero(10));
}

TEST(Builders, DoubleIntegrator2d) {
  const LinearSystem sys = build_double_integrator_2d();
  EXPECT_EQ(sys.n(), 4);
  EXPECT_EQ(sys.m(), 2);
  EXPECT_EQ(sys.n1(), 2);
  EXPECT_EQ(sys.A()(0, 2), 1.0);
  EXPECT_EQ(sys.A()(1, 3), 1.0);
  EXPECT_EQ(sys.A().sum(), 2.0);
  EXPECT_EQ(sys.B()(2, 0), 1.0);
  EXPECT_EQ(sys.B()(3, 1), 1.0);
  EXPECT_EQ(sys.R(), Matrix::Identity(2, 2));
  EXPECT_EQ(sys.c(), Vector::Zero(4));
}

TEST(Builders, Quadrotor10d) {
  QuadrotorParams p;
  p.mass = 0.8;
  p.arm = 0.2;
  p.inertia = 0.004;
  const auto quad = build_quadrotor_10d(p);
  const LinearSystem& sys = quad.system;
  EXPECT_EQ(sys.n(), 10);
  EXPECT_EQ(sys.m(), 3);
  EXPECT_EQ(sys.n1(), 3);
  // gravity couples attitude into horizontal acceleration
  EXPECT_EQ(sys.A()(3, 7), 9.8);
  EXPECT_EQ(sys.A()(4, 6), -9.8);
  EXPECT_EQ(sys.A()(3, 6), 0.0);
  EXPECT_EQ(sys.A()(4, 7), 0.0);
  EXPECT_EQ(sys.A().block(0, 3, 3, 3), Matrix::Identity(3, 3));
  EXPECT_EQ(sys.A().block(6, 8, 2, 2), Matrix::Identity(2, 2));
  EXPECT_DOUBLE_EQ(sys.B()(5, 0), 1.0 / 0.8);
  EXPECT_DOUBLE_EQ(sys.B()(8, 1), 0.2 / 0.004);
  EXPECT_DOUBLE_EQ(sys.B()(9, 2), 0.2 / 0.004);
  EXPECT_EQ(sys.R().diagonal(), Eigen::Vector3d(15, 30, 30));
  Vector s(7);
  s << 0, 0, 0, 20, 20, 0, 0;
  EXPECT_EQ(quad.penalty.S.diagonal(), s);
  EXPECT_EQ(sys.c(), Vector::Zero(10));
}

TEST(Builders, QuadrotorRejectsNonPositiveParams) {
  QuadrotorParams p;
  p.mass = 0.0;
  EXPECT_THROW(build_quadrotor_10d(p), InvalidInput);
  p = {};
  p.inertia = -1.0;
  EXPECT_THROW(build_quadrotor_10d(p), InvalidInput);
}

TEST(TerminalPenalty, RejectsIndefinite) {
  Matrix S(2, 2);
  S << 1, 0, 0, -1;
  EXPECT_THROW(TerminalPenalty{S}, InvalidInput);
  EXPECT_NO_THROW(TerminalPenalty{Matrix::Zero(2, 2)});
}

TEST(LinearSystem, WithPartitionKeepsDynamics) {
  const LinearSystem sys = build_double_integrator_2d().with_partition(4);
  EXPECT_EQ(sys.n1(), 4);
  EXPECT_EQ(sys.n2(), 0);
  EXPECT_EQ(sys.A(), build_double_integrator_2d().A());
}

}  // namespace
}  // namespace kinorrt
