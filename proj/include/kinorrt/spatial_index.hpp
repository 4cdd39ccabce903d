#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "kinorrt/lti.hpp"

namespace kinorrt {

/// Incremental k-d tree over points of a fixed dimension, keyed by caller ids.
/// Points are never moved or removed, which is all a growing search tree needs.
class SpatialIndex {
 public:
  explicit SpatialIndex(int dims);

  void insert(std::size_t id, const Vector& point);

  /// Closest point to `query`; ties go to the lowest id.
  std::optional<std::size_t> nearest(const Vector& query) const;

  /// Every id whose point lies within `radius` (inclusive) of `query`,
  /// sorted by id.
  std::vector<std::size_t> within(const Vector& query, double radius) const;

  std::size_t size() const { return ids_.size(); }
  int dims() const { return dims_; }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  double squared_distance(std::size_t slot, const Vector& query) const;
  void nearest_from(std::size_t slot, int depth, const Vector& query, std::size_t& best,
                    double& best_d2) const;
  void within_from(std::size_t slot, int depth, const Vector& query, double r2,
                   std::vector<std::size_t>& out) const;

  int dims_;
  std::vector<double> coords_;
  std::vector<std::size_t> ids_;
  std::vector<std::size_t> left_;
  std::vector<std::size_t> right_;
};

}  // namespace kinorrt
