#include "kinorrt/spatial_index.hpp"

#include <algorithm>

#include "kinorrt/errors.hpp"

namespace kinorrt {

SpatialIndex::SpatialIndex(int dims) : dims_(dims) {
  if (dims < 1) throw InvalidInput("spatial index needs at least one dimension");
}

double SpatialIndex::squared_distance(std::size_t slot, const Vector& query) const {
  const double* p = &coords_[slot * dims_];
  double d2 = 0.0;
  for (int i = 0; i < dims_; ++i) {
    const double d = p[i] - query(i);
    d2 += d * d;
  }
  return d2;
}

void SpatialIndex::insert(std::size_t id, const Vector& point) {
  if (point.size() < dims_) throw InvalidInput("point has too few components for the index");
  const std::size_t slot = ids_.size();
  for (int i = 0; i < dims_; ++i) coords_.push_back(point(i));
  ids_.push_back(id);
  left_.push_back(kNone);
  right_.push_back(kNone);
  if (slot == 0) return;

  std::size_t cur = 0;
  int depth = 0;
  for (;;) {
    const int axis = depth % dims_;
    auto& child = point(axis) < coords_[cur * dims_ + axis] ? left_[cur] : right_[cur];
    if (child == kNone) {
      child = slot;
      return;
    }
    cur = child;
    ++depth;
  }
}

void SpatialIndex::nearest_from(std::size_t slot, int depth, const Vector& query,
                                std::size_t& best, double& best_d2) const {
  if (slot == kNone) return;
  const double d2 = squared_distance(slot, query);
  if (best == kNone || d2 < best_d2 || (d2 == best_d2 && ids_[slot] < ids_[best])) {
    best = slot;
    best_d2 = d2;
  }
  const int axis = depth % dims_;
  const double diff = query(axis) - coords_[slot * dims_ + axis];
  const std::size_t near_side = diff < 0.0 ? left_[slot] : right_[slot];
  const std::size_t far_side = diff < 0.0 ? right_[slot] : left_[slot];
  nearest_from(near_side, depth + 1, query, best, best_d2);
  if (diff * diff <= best_d2) nearest_from(far_side, depth + 1, query, best, best_d2);
}

std::optional<std::size_t> SpatialIndex::nearest(const Vector& query) const {
  if (ids_.empty()) return std::nullopt;
  if (query.size() < dims_) throw InvalidInput("query has too few components for the index");
  std::size_t best = kNone;
  double best_d2 = 0.0;
  nearest_from(0, 0, query, best, best_d2);
  return ids_[best];
}

void SpatialIndex::within_from(std::size_t slot, int depth, const Vector& query, double r2,
                               std::vector<std::size_t>& out) const {
  if (slot == kNone) return;
  if (squared_distance(slot, query) <= r2) out.push_back(ids_[slot]);
  const int axis = depth % dims_;
  const double diff = query(axis) - coords_[slot * dims_ + axis];
  // left subtree holds coordinates < split, right holds >= split
  if (diff < 0.0 || diff * diff <= r2) within_from(left_[slot], depth + 1, query, r2, out);
  if (diff >= 0.0 || diff * diff <= r2) within_from(right_[slot], depth + 1, query, r2, out);
}

std::vector<std::size_t> SpatialIndex::within(const Vector& query, double radius) const {
  if (query.size() < dims_) throw InvalidInput("query has too few components for the index");
  std::vector<std::size_t> out;
  if (ids_.empty() || radius < 0.0) return out;
  within_from(0, 0, query, radius * radius, out);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace kinorrt
