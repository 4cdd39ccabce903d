#include "kinorrt/oracles.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "kinorrt/errors.hpp"
#include "kinorrt/trajectory.hpp"

namespace kinorrt::oracles {
namespace {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  Matrix value;
  double error;
};

Panel gauss_kronrod(const std::function<Matrix(double)>& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const Matrix center = f(mid);
  Matrix kronrod = kKronrodWeights[7] * center;
  Matrix gauss = kGaussWeights[3] * center;
  for (int i = 0; i < 7; ++i) {
    const Matrix sum = f(mid - half * kKronrodNodes[i]) + f(mid + half * kKronrodNodes[i]);
    kronrod += kKronrodWeights[i] * sum;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * sum;
  }
  return Panel{half * kronrod, half * (kronrod - gauss).norm()};
}

Matrix integrate_panel(const std::function<Matrix(double)>& f, double a, double b, double abs_tol,
                       int depth) {
  const Panel p = gauss_kronrod(f, a, b);
  if (p.error <= abs_tol || depth >= 40) return p.value;
  const double mid = 0.5 * (a + b);
  return integrate_panel(f, a, mid, 0.5 * abs_tol, depth + 1) +
         integrate_panel(f, mid, b, 0.5 * abs_tol, depth + 1);
}

}  // namespace

Matrix taylor_exponential(const Matrix& M, double t) {
  const Matrix X = M * t;
  const double norm = X.lpNorm<Eigen::Infinity>();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Matrix Y = X / std::ldexp(1.0, squarings);

  const auto n = M.rows();
  Matrix result = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k <= 30; ++k) {
    term = term * Y / static_cast<double>(k);
    result += term;
    if (term.lpNorm<Eigen::Infinity>() <= 1e-18 * result.lpNorm<Eigen::Infinity>()) break;
  }
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

Matrix integrate(const std::function<Matrix(double)>& f, double a, double b, double rel_tol) {
  const Panel coarse = gauss_kronrod(f, a, b);
  const double scale = std::max(coarse.value.norm(), std::numeric_limits<double>::min());
  return integrate_panel(f, a, b, rel_tol * scale, 0);
}

Matrix quadrature_gramian(const LinearSystem& sys, double tf) {
  const Matrix Q = sys.B() * sys.R().inverse() * sys.B().transpose();
  auto integrand = [&](double s) {
    const Matrix E = taylor_exponential(sys.A(), tf - s);
    return Matrix(E * Q * E.transpose());
  };
  return integrate(integrand, 0.0, tf);
}

double relative_error(const Matrix& X, const Matrix& Y) { return (X - Y).norm() / Y.norm(); }

namespace double_integrator_1d {

double fixed_state_energy(double p, double v, double T) {
  return (12.0 * p * p - 12.0 * p * v * T + 4.0 * v * v * T * T) / (T * T * T);
}

double pff_cost(double p, double T) { return T + 3.0 * p * p / (T * T * T); }

double pff_final_velocity(double p, double T) { return 3.0 * p / (2.0 * T); }

double pff_optimal_time(double p) { return std::pow(9.0 * p * p, 0.25); }

double pff_control(double p, double T, double t) { return 3.0 * p * (T - t) / (T * T * T); }

}  // namespace double_integrator_1d

CompletionGridResult completion_grid_minimum(const LinearSystem& sys, const Vector& x_a,
                                             const Vector& x_c, double tf, double lo, double hi,
                                             int per_axis) {
  const int n1 = sys.n1();
  const int n2 = sys.n2();
  if (per_axis < 2) throw InvalidInput("completion grid needs at least two values per axis");
  const double cell = (hi - lo) / (per_axis - 1);
  CompletionGridResult best{std::numeric_limits<double>::infinity(), Vector::Zero(n2), cell};

  std::vector<int> index(n2, 0);
  Vector x_b(sys.n());
  x_b.head(n1) = x_c;
  for (;;) {
    for (int i = 0; i < n2; ++i) x_b(n1 + i) = lo + cell * index[i];
    const double cost = solve_fixed_state_fixed_time(sys, x_a, x_b, tf).cost;
    if (cost < best.cost) {
      best.cost = cost;
      best.free_block = x_b.tail(n2);
    }
    int axis = 0;
    while (axis < n2 && ++index[axis] == per_axis) index[axis++] = 0;
    if (axis == n2) break;
  }
  return best;
}

double dense_time_minimum(const std::function<double(double)>& cost_at, TimeBounds bounds,
                          int points) {
  double best = std::numeric_limits<double>::infinity();
  const double ratio = std::log(bounds.hi / bounds.lo);
  for (int k = 0; k < points; ++k) {
    const double t = bounds.lo * std::exp(ratio * k / (points - 1));
    try {
      best = std::min(best, cost_at(t));
    } catch (const DegenerateHorizon&) {
    }
  }
  return best;
}

double simpson_running_cost(const LinearSystem& sys, const SteeringSolution& sol, int points) {
  if (points < 3 || points % 2 == 0) throw InvalidInput("Simpson rule needs an odd point count");
  const Trajectory traj(sys, sol);
  const double h = sol.tf / (points - 1);
  double sum = 0.0;
  for (int k = 0; k < points; ++k) {
    const double t = std::min(sol.tf, k * h);
    const Vector u = traj.at(t).control;
    const double f = 1.0 + u.dot(sys.R() * u);
    const double w = (k == 0 || k == points - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    sum += w * f;
  }
  return sum * h / 3.0;
}

}  // namespace kinorrt::oracles
