#include "kinorrt/tree.hpp"

#include <algorithm>
#include <stdexcept>

#include "kinorrt/errors.hpp"

namespace kinorrt {

Tree::Tree(Vector root_state, int position_dims) : index_(position_dims) {
  if (root_state.size() < position_dims) throw InvalidInput("root state shorter than position block");
  TreeNode root;
  root.id = 0;
  root.state = std::move(root_state);
  index_.insert(0, root.state);
  nodes_.push_back(std::move(root));
}

NodeId Tree::add(Vector state, NodeId parent, SteeringSolution edge) {
  if (parent >= nodes_.size()) throw std::out_of_range("unknown parent node");
  TreeNode node;
  node.id = nodes_.size();
  node.state = std::move(state);
  node.parent = parent;
  node.cost_to_come = nodes_[parent].cost_to_come + edge.cost;
  node.edge = std::move(edge);
  index_.insert(node.id, node.state);
  nodes_[parent].children.push_back(node.id);
  nodes_.push_back(std::move(node));
  return nodes_.back().id;
}

bool Tree::is_ancestor(NodeId ancestor, NodeId id) const {
  std::optional<NodeId> cur = nodes_.at(id).parent;
  while (cur) {
    if (*cur == ancestor) return true;
    cur = nodes_[*cur].parent;
  }
  return false;
}

void Tree::reparent(NodeId id, NodeId new_parent, SteeringSolution edge) {
  TreeNode& node = nodes_.at(id);
  if (!node.parent) throw std::logic_error("cannot reparent the root");
  if (new_parent == id || is_ancestor(id, new_parent)) {
    throw std::logic_error("reparenting would create a cycle");
  }
  auto& siblings = nodes_[*node.parent].children;
  siblings.erase(std::find(siblings.begin(), siblings.end(), id));
  nodes_.at(new_parent).children.push_back(id);
  node.parent = new_parent;
  node.edge = std::move(edge);
  ++node.revision;
  refresh_subtree(id);
}

void Tree::replace_edge(NodeId id, SteeringSolution edge) {
  TreeNode& node = nodes_.at(id);
  if (!node.parent) throw std::logic_error("the root has no edge");
  node.edge = std::move(edge);
  ++node.revision;
}

void Tree::refresh_subtree(NodeId id) {
  std::vector<NodeId> stack{id};
  while (!stack.empty()) {
    const NodeId cur = stack.back();
    stack.pop_back();
    TreeNode& node = nodes_[cur];
    node.cost_to_come = nodes_[*node.parent].cost_to_come + node.edge->cost;
    stack.insert(stack.end(), node.children.begin(), node.children.end());
  }
}

void Tree::recompute_costs() {
  for (NodeId child : nodes_[0].children) refresh_subtree(child);
}

NodeId Tree::nearest(const Vector& position) const { return *index_.nearest(position); }

std::vector<NodeId> Tree::near(const Vector& position, double radius) const {
  return index_.within(position, radius);
}

}  // namespace kinorrt
