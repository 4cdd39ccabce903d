#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "kinorrt/lti.hpp"
#include "kinorrt/trajectory.hpp"

namespace kinorrt {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Interval&) const = default;
};

/// Closed axis-aligned box in position space.
struct Box {
  Vector lo;
  Vector hi;

  bool contains(const Vector& position) const;
  bool operator==(const Box& other) const { return lo == other.lo && hi == other.hi; }
};

/// Planning domain: position bounds, sampling ranges for the remaining state
/// components, box obstacles and a box goal. Obstacles and goal live in the
/// position space, which is the leading block of every state.
class Environment {
 public:
  /// Throws InvalidScenario when an interval is empty, a box has the wrong
  /// dimension or zero volume, or the goal leaves the position bounds.
  Environment(std::vector<Interval> position_bounds, std::vector<Interval> full_sample_bounds,
              std::vector<Box> obstacles, Box goal);

  int position_dims() const { return static_cast<int>(position_bounds_.size()); }
  /// Number of state components that can be sampled (position + extra ranges).
  int sample_dims() const {
    return static_cast<int>(position_bounds_.size() + full_sample_bounds_.size());
  }

  const std::vector<Interval>& position_bounds() const { return position_bounds_; }
  const std::vector<Interval>& full_sample_bounds() const { return full_sample_bounds_; }
  const std::vector<Box>& obstacles() const { return obstacles_; }
  const Box& goal() const { return goal_; }

  /// Sampling interval of state component i (positions first).
  const Interval& sample_axis(int i) const;

  bool operator==(const Environment&) const = default;

 private:
  std::vector<Interval> position_bounds_;
  std::vector<Interval> full_sample_bounds_;
  std::vector<Box> obstacles_;
  Box goal_;
};

using Rng = std::mt19937_64;

/// Uniform draw in [lo, hi) from the top 53 bits of one engine output, so
/// streams do not depend on the standard library's distributions.
double uniform(Rng& rng, double lo, double hi);

inline constexpr int kMaxSampleAttempts = 10000;
inline constexpr double kDefaultCollisionResolution = 0.05;

/// Uniform draw of the leading `dims` sampled components whose position is
/// collision-free. Throws EnvironmentSaturated after kMaxSampleAttempts.
Vector sample_pff(const Environment& env, Rng& rng, int dims);

/// sample_pff over every component the environment can sample.
Vector sample_full(const Environment& env, Rng& rng);

/// True iff the position block is inside the bounds and outside every
/// obstacle (obstacle faces count as collision).
bool collision_point(const Environment& env, const Vector& state);

/// Dense check of the trajectory's position path: uniform time samples
/// (power-of-two counts, refined until consecutive positions are at most
/// `resolution` apart) must all pass collision_point.
bool collision_free_trajectory(const Environment& env, const Trajectory& traj,
                               double resolution = kDefaultCollisionResolution);

bool in_goal(const Environment& env, const Vector& state);

}  // namespace kinorrt
