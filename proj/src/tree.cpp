#include "trajpace/tree.hpp"

#include <algorithm>
#include <sstream>

namespace trajpace {

std::string WValue::to_string() const {
  std::ostringstream os;
  if (std::holds_alternative<std::int64_t>(v)) {
    os << std::get<std::int64_t>(v);
  } else if (std::holds_alternative<double>(v)) {
    os << std::get<double>(v);
  } else {
    os << std::get<std::string>(v);
  }
  return os.str();
}

TrajectoryTree::Builder::Builder(double root_price, WValue root_w) {
  TreeNode root;
  root.id = 0;
  root.parent = kNoParent;
  root.depth = 0;
  root.price = root_price;
  root.w = std::move(root_w);
  nodes_.push_back(std::move(root));
  step_prob_.push_back(1.0);
}

NodeId TrajectoryTree::Builder::add_child(NodeId parent, double price, WValue w) {
  if (parent < 0 || static_cast<std::size_t>(parent) >= nodes_.size())
    raise(Errc::unknown_node, "builder parent " + std::to_string(parent));
  NodeId id = static_cast<NodeId>(nodes_.size());
  TreeNode n;
  n.id = id;
  n.parent = parent;
  n.depth = nodes_[static_cast<std::size_t>(parent)].depth + 1;
  n.price = price;
  n.w = std::move(w);
  nodes_[static_cast<std::size_t>(parent)].children.push_back(id);
  nodes_.push_back(std::move(n));
  step_prob_.push_back(0.0);
  return id;
}

void TrajectoryTree::Builder::set_step_probability(NodeId node, double q) {
  step_prob_.at(static_cast<std::size_t>(node)) = q;
  has_probs_ = true;
}

TrajectoryTree TrajectoryTree::Builder::build() {
  TrajectoryTree t;
  for (auto& n : nodes_) n.terminal = n.children.empty();
  t.max_depth_ = 0;
  for (const auto& n : nodes_) t.max_depth_ = std::max(t.max_depth_, n.depth);
  t.nodes_ = std::move(nodes_);
  if (has_probs_) t.step_prob_ = std::move(step_prob_);
  return t;
}

std::optional<double> TrajectoryTree::step_probability(NodeId id) const {
  node(id);  // bounds check
  if (step_prob_.empty()) return std::nullopt;
  return step_prob_[static_cast<std::size_t>(id)];
}

std::vector<NodeId> TrajectoryTree::terminal_nodes() const {
  std::vector<NodeId> out;
  for (const auto& n : nodes_)
    if (n.terminal) out.push_back(n.id);
  return out;
}

std::vector<NodeId> TrajectoryTree::path_to(NodeId id) const {
  node(id);  // bounds check
  std::vector<NodeId> out;
  for (NodeId cur = id; cur != kNoParent; cur = nodes_[static_cast<std::size_t>(cur)].parent)
    out.push_back(cur);
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<std::vector<NodeId>> TrajectoryTree::all_paths() const {
  std::vector<std::vector<NodeId>> out;
  for (const auto& n : nodes_)
    if (n.terminal) out.push_back(path_to(n.id));
  return out;
}

PricePath TrajectoryTree::price_path(std::span<const NodeId> ids) const {
  PricePath out;
  out.reserve(ids.size());
  for (NodeId id : ids) {
    const TreeNode& n = node(id);
    out.push_back({n.price, n.w});
  }
  return out;
}

TrajectoryTree build_tree(const std::vector<PricePath>& paths) {
  if (paths.empty()) raise(Errc::empty_input, "no trajectories");
  for (const auto& p : paths)
    if (p.empty()) raise(Errc::empty_input, "empty trajectory");

  const PricePoint& origin = paths.front().front();
  for (const auto& p : paths)
    if (!(p.front() == origin))
      raise(Errc::inconsistent_root, "trajectories disagree at time 0");

  TrajectoryTree::Builder builder(origin.price, origin.w);
  // Shadow child lists: builder ids are dense, so index by id.
  std::vector<std::vector<NodeId>> children(1);
  std::vector<PricePoint> points{origin};
  std::vector<char> ends_here(1, 0);

  for (const auto& p : paths) {
    NodeId cur = 0;
    for (std::size_t i = 1; i < p.size(); ++i) {
      NodeId next = kNoParent;
      for (NodeId c : children[static_cast<std::size_t>(cur)]) {
        if (points[static_cast<std::size_t>(c)] == p[i]) {
          next = c;
          break;
        }
      }
      if (next == kNoParent) {
        next = builder.add_child(cur, p[i].price, p[i].w);
        children.emplace_back();
        points.push_back(p[i]);
        ends_here.push_back(0);
        children[static_cast<std::size_t>(cur)].push_back(next);
      }
      cur = next;
    }
    ends_here[static_cast<std::size_t>(cur)] = 1;
  }

  // A trajectory may not stop where another continues: every end node must be
  // childless and every leaf must be an end node.
  for (std::size_t id = 0; id < children.size(); ++id) {
    if (ends_here[id] && !children[id].empty())
      raise(Errc::prefix_conflict,
            "trajectory ends at interior node " + std::to_string(id));
  }
  return builder.build();
}

std::vector<double> children_deltas(const TrajectoryTree& tree, NodeId at) {
  const TreeNode& n = tree.node(at);
  if (n.terminal) raise(Errc::terminal_node, "node " + std::to_string(at));
  std::vector<double> out;
  out.reserve(n.children.size());
  for (NodeId c : n.children) out.push_back(tree.node(c).price - n.price);
  return out;
}

ConditionalView::ConditionalView(const TrajectoryTree& tree, NodeId anchor)
    : tree_(&tree), anchor_(anchor) {
  tree.node(anchor);  // bounds check
}

int ConditionalView::anchor_depth() const { return tree_->node(anchor_).depth; }

std::vector<PricePath> ConditionalView::paths() const {
  std::vector<PricePath> out;
  std::vector<NodeId> stack{anchor_};
  // Collect suffix paths by walking terminals below the anchor.
  std::vector<NodeId> terminals;
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    const TreeNode& n = tree_->node(id);
    if (n.terminal) terminals.push_back(id);
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
  }
  for (NodeId t : terminals) {
    PricePath p;
    std::vector<NodeId> ids;
    for (NodeId cur = t;; cur = tree_->node(cur).parent) {
      ids.push_back(cur);
      if (cur == anchor_) break;
    }
    std::reverse(ids.begin(), ids.end());
    out.push_back(tree_->price_path(ids));
  }
  return out;
}

TrajectoryTree ConditionalView::materialize() const {
  const TreeNode& a = tree_->node(anchor_);
  TrajectoryTree::Builder builder(a.price, a.w);
  std::vector<std::pair<NodeId, NodeId>> stack{{anchor_, 0}};  // (original, copy)
  while (!stack.empty()) {
    auto [orig, copy] = stack.back();
    stack.pop_back();
    const TreeNode& n = tree_->node(orig);
    for (NodeId child : n.children) {
      const TreeNode& cn = tree_->node(child);
      NodeId cc = builder.add_child(copy, cn.price, cn.w);
      stack.push_back({child, cc});
    }
  }
  return builder.build();
}

}  // namespace trajpace
