#include "trajpace/stopping.hpp"

#include <algorithm>
#include <unordered_set>

namespace trajpace {

StoppingTime StoppingTime::never() {
  return StoppingTime([](const TrajectoryTree&, NodeId) { return false; });
}

StoppingTime StoppingTime::at_root() {
  return StoppingTime([](const TrajectoryTree&, NodeId) { return true; });
}

StoppingTime StoppingTime::fixed_depth(int depth) {
  if (depth < 0) raise(Errc::depth_out_of_range, "negative depth");
  return StoppingTime([depth](const TrajectoryTree& t, NodeId n) {
    return t.node(n).depth >= depth;
  });
}

StoppingTime StoppingTime::at_nodes(std::vector<NodeId> nodes) {
  auto set = std::make_shared<std::unordered_set<NodeId>>(nodes.begin(), nodes.end());
  return StoppingTime([set](const TrajectoryTree&, NodeId n) { return set->count(n) > 0; });
}

StoppingTime StoppingTime::when(Predicate pred) { return StoppingTime(std::move(pred)); }

StoppingTime StoppingTime::first_price_at_least(double level) {
  return StoppingTime([level](const TrajectoryTree& t, NodeId n) {
    return t.node(n).price >= level;
  });
}

StoppingTime StoppingTime::first_price_at_most(double level) {
  return StoppingTime([level](const TrajectoryTree& t, NodeId n) {
    return t.node(n).price <= level;
  });
}

namespace {

// True when some ancestor-or-self of `node` satisfies `pred`.
bool seen_by(const TrajectoryTree& tree, const StoppingTime& st, NodeId node) {
  for (NodeId cur = node; cur != kNoParent; cur = tree.node(cur).parent)
    if (st.stops_at(tree, cur)) return true;
  return false;
}

}  // namespace

StoppingTime StoppingTime::latest(const StoppingTime& a, const StoppingTime& b) {
  // "Both have stopped by here" is monotone along a trajectory, so its first
  // hit is exactly max(a, b).
  StoppingTime sa = a, sb = b;
  return StoppingTime([sa, sb](const TrajectoryTree& t, NodeId n) {
    return seen_by(t, sa, n) && seen_by(t, sb, n);
  });
}

StoppingTime StoppingTime::earliest(const StoppingTime& a, const StoppingTime& b) {
  StoppingTime sa = a, sb = b;
  return StoppingTime([sa, sb](const TrajectoryTree& t, NodeId n) {
    return sa.stops_at(t, n) || sb.stops_at(t, n);
  });
}

bool StoppingTime::stops_at(const TrajectoryTree& tree, NodeId node) const {
  return pred_(tree, node);
}

int StoppingTime::value(const TrajectoryTree& tree, std::span<const NodeId> path) const {
  if (path.empty()) raise(Errc::empty_input, "empty path");
  for (std::size_t i = 0; i < path.size(); ++i)
    if (pred_(tree, path[i])) return static_cast<int>(i);
  return static_cast<int>(path.size()) - 1;
}

std::vector<NodeId> StoppingTime::frontier(const TrajectoryTree& tree) const {
  std::vector<char> mask = stopped_by_mask(tree, *this);
  std::vector<NodeId> out;
  for (const TreeNode& n : tree.nodes()) {
    bool parent_stopped =
        n.parent != kNoParent && mask[static_cast<std::size_t>(n.parent)];
    if (mask[static_cast<std::size_t>(n.id)] && !parent_stopped) out.push_back(n.id);
  }
  return out;
}

std::vector<char> stopped_by_mask(const TrajectoryTree& tree, const StoppingTime& nu) {
  std::vector<char> mask(tree.size(), 0);
  for (const TreeNode& n : tree.nodes()) {
    bool parent_stopped =
        n.parent != kNoParent && mask[static_cast<std::size_t>(n.parent)];
    mask[static_cast<std::size_t>(n.id)] =
        parent_stopped || nu.stops_at(tree, n.id) ? 1 : 0;
  }
  return mask;
}

TrajectoryTree stopped_tree(const TrajectoryTree& tree, const StoppingTime& nu) {
  std::vector<PricePath> truncated;
  for (const auto& ids : tree.all_paths()) {
    int stop = nu.value(tree, ids);
    std::span<const NodeId> prefix(ids.data(), static_cast<std::size_t>(stop) + 1);
    truncated.push_back(tree.price_path(prefix));
  }
  return build_tree(truncated);
}

}  // namespace trajpace
