#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "kinorrt/spatial_index.hpp"
#include "kinorrt/steering.hpp"

namespace kinorrt {

using NodeId = std::size_t;

struct TreeNode {
  NodeId id = 0;
  Vector state;
  std::optional<NodeId> parent;
  /// Connection from the parent; its x_end is this node's state.
  std::optional<SteeringSolution> edge;
  double cost_to_come = 0.0;
  std::vector<NodeId> children;
  /// Bumped whenever the incoming edge changes.
  std::uint64_t revision = 0;
};

/// Search tree with cost-to-come bookkeeping and a spatial index over the
/// position block of every node state.
class Tree {
 public:
  Tree(Vector root_state, int position_dims);

  std::size_t size() const { return nodes_.size(); }
  const TreeNode& node(NodeId id) const { return nodes_.at(id); }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int position_dims() const { return index_.dims(); }

  NodeId add(Vector state, NodeId parent, SteeringSolution edge);

  /// Swap the parent edge of `id` and refresh the cost of its whole subtree.
  /// Throws std::logic_error if `new_parent` lies in that subtree.
  void reparent(NodeId id, NodeId new_parent, SteeringSolution edge);

  /// Replace the incoming edge without touching any cost-to-come.
  void replace_edge(NodeId id, SteeringSolution edge);

  /// Recompute every cost-to-come from the root down.
  void recompute_costs();

  /// Node whose position block is closest to the query; ties go to the lowest id.
  NodeId nearest(const Vector& position) const;
  /// Nodes whose position block is within `radius` of the query, by id.
  std::vector<NodeId> near(const Vector& position, double radius) const;

  bool is_ancestor(NodeId ancestor, NodeId id) const;

 private:
  void refresh_subtree(NodeId id);

  std::vector<TreeNode> nodes_;
  SpatialIndex index_;
};

}  // namespace kinorrt
