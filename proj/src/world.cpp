#include "kinorrt/world.hpp"

#include <cmath>
#include <string>

#include "kinorrt/errors.hpp"

namespace kinorrt {
namespace {

constexpr int kMaxCollisionLevel = 16;

void check_interval(const Interval& iv, const std::string& what) {
  if (!(iv.lo < iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi)) {
    throw InvalidScenario(what + ": interval must satisfy lo < hi");
  }
}

void check_box(const Box& box, int dims, const std::string& what) {
  if (box.lo.size() != dims || box.hi.size() != dims) {
    throw DimensionMismatch(what, "box must have " + std::to_string(dims) + " axes");
  }
  for (int i = 0; i < dims; ++i) {
    if (!(box.lo(i) < box.hi(i))) throw InvalidScenario(what + ": box must have positive volume");
  }
}

bool inside(const Box& box, const double* position) {
  for (Eigen::Index i = 0; i < box.lo.size(); ++i) {
    if (position[i] < box.lo(i) || position[i] > box.hi(i)) return false;
  }
  return true;
}

// position points at the leading position_dims() entries of a state
bool position_free(const Environment& env, const double* position) {
  const auto& bounds = env.position_bounds();
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (position[i] < bounds[i].lo || position[i] > bounds[i].hi) return false;
  }
  for (const Box& box : env.obstacles()) {
    if (inside(box, position)) return false;
  }
  return true;
}

}  // namespace

bool Box::contains(const Vector& position) const {
  if (position.size() != lo.size()) throw InvalidInput("point and box differ in dimension");
  return inside(*this, position.data());
}

Environment::Environment(std::vector<Interval> position_bounds,
                         std::vector<Interval> full_sample_bounds, std::vector<Box> obstacles,
                         Box goal)
    : position_bounds_(std::move(position_bounds)),
      full_sample_bounds_(std::move(full_sample_bounds)),
      obstacles_(std::move(obstacles)),
      goal_(std::move(goal)) {
  if (position_bounds_.empty()) throw InvalidScenario("position_bounds: need at least one axis");
  for (const auto& iv : position_bounds_) check_interval(iv, "position_bounds");
  for (const auto& iv : full_sample_bounds_) check_interval(iv, "full_sample_bounds");
  const int p = position_dims();
  for (std::size_t i = 0; i < obstacles_.size(); ++i) {
    check_box(obstacles_[i], p, "obstacles[" + std::to_string(i) + "]");
  }
  check_box(goal_, p, "goal");
  for (int i = 0; i < p; ++i) {
    if (goal_.lo(i) < position_bounds_[i].lo || goal_.hi(i) > position_bounds_[i].hi) {
      throw InvalidScenario("goal: box must lie inside position_bounds");
    }
  }
}

const Interval& Environment::sample_axis(int i) const {
  if (i < 0 || i >= sample_dims()) throw InvalidInput("sample axis out of range");
  return i < position_dims() ? position_bounds_[i] : full_sample_bounds_[i - position_dims()];
}

double uniform(Rng& rng, double lo, double hi) {
  const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

Vector sample_pff(const Environment& env, Rng& rng, int dims) {
  if (dims < env.position_dims() || dims > env.sample_dims()) {
    throw InvalidInput("cannot sample " + std::to_string(dims) + " components from this environment");
  }
  Vector z(dims);
  for (int attempt = 0; attempt < kMaxSampleAttempts; ++attempt) {
    for (int i = 0; i < dims; ++i) {
      const Interval& iv = env.sample_axis(i);
      z(i) = uniform(rng, iv.lo, iv.hi);
    }
    if (collision_point(env, z)) return z;
  }
  throw EnvironmentSaturated("no collision-free sample after " +
                             std::to_string(kMaxSampleAttempts) + " attempts");
}

Vector sample_full(const Environment& env, Rng& rng) { return sample_pff(env, rng, env.sample_dims()); }

bool collision_point(const Environment& env, const Vector& state) {
  const int p = env.position_dims();
  if (state.size() < p) throw InvalidInput("state is shorter than the position block");
  return position_free(env, state.data());
}

bool collision_free_trajectory(const Environment& env, const Trajectory& traj,
                               double resolution) {
  if (!(resolution > 0.0)) throw InvalidInput("collision resolution must be positive");
  const int p = env.position_dims();
  const SteeringSolution& sol = traj.solution();
  const double chord = (sol.x_end.head(p) - sol.x_start.head(p)).norm();
  int level = 1;
  while (level < kMaxCollisionLevel && static_cast<double>(1 << level) * resolution < chord) ++level;

  Matrix Z = traj.sample_augmented(1 << level);
  for (Eigen::Index k = 0; k < Z.cols(); ++k) {
    if (!position_free(env, Z.col(k).data())) return false;
  }
  // each refinement keeps the old samples and fills in the midpoints
  for (;; ++level) {
    bool dense_enough = true;
    for (Eigen::Index k = 1; k < Z.cols() && dense_enough; ++k) {
      dense_enough = (Z.col(k).head(p) - Z.col(k - 1).head(p)).norm() <= resolution;
    }
    if (dense_enough || level >= kMaxCollisionLevel) return true;

    const Matrix half = traj.step(sol.tf / static_cast<double>(1 << (level + 1)));
    Matrix finer(Z.rows(), 2 * Z.cols() - 1);
    for (Eigen::Index k = 0; k < Z.cols(); ++k) {
      finer.col(2 * k) = Z.col(k);
      if (k + 1 == Z.cols()) break;
      finer.col(2 * k + 1).noalias() = half * Z.col(k);
      if (!position_free(env, finer.col(2 * k + 1).data())) return false;
    }
    Z = std::move(finer);
  }
}

bool in_goal(const Environment& env, const Vector& state) {
  const int p = env.position_dims();
  if (state.size() < p) throw InvalidInput("state is shorter than the position block");
  return env.goal().contains(state.head(p));
}

}  // namespace kinorrt
