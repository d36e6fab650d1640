#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "trajpace/tree.hpp"

namespace trajpace {

// Random time defined by a predicate on tree nodes.  Because trajectories
// agreeing up to depth k traverse the same nodes of the prefix tree, any node
// predicate automatically yields a non-anticipative time: the decision at
// depth k depends only on the history up to k.
class StoppingTime {
 public:
  using Predicate = std::function<bool(const TrajectoryTree&, NodeId)>;

  StoppingTime() : StoppingTime(never()) {}

  static StoppingTime never();                 // value = terminal depth
  static StoppingTime at_root();               // value = 0 everywhere
  static StoppingTime fixed_depth(int depth);
  static StoppingTime at_nodes(std::vector<NodeId> nodes);
  static StoppingTime when(Predicate pred);
  static StoppingTime first_price_at_least(double level);
  static StoppingTime first_price_at_most(double level);

  // Latest of two times; on every trajectory value = max of the two values.
  static StoppingTime latest(const StoppingTime& a, const StoppingTime& b);
  // Earliest of two times.
  static StoppingTime earliest(const StoppingTime& a, const StoppingTime& b);

  bool stops_at(const TrajectoryTree& tree, NodeId node) const;

  // First depth along `path` (root-to-leaf node ids) whose node satisfies the
  // predicate; the terminal depth when none does.
  int value(const TrajectoryTree& tree, std::span<const NodeId> path) const;

  // Minimal stopped nodes: nodes satisfying the predicate with no satisfied
  // proper ancestor.  Serializable normal form of the time on this tree.
  std::vector<NodeId> frontier(const TrajectoryTree& tree) const;

 private:
  explicit StoppingTime(Predicate pred) : pred_(std::move(pred)) {}
  Predicate pred_;
};

// stopped[id] is true when some ancestor-or-self of id satisfies nu.
std::vector<char> stopped_by_mask(const TrajectoryTree& tree,
                                  const StoppingTime& nu);

// Tree of the stopped trajectories S^nu, S^nu_i = S_{nu(S) and i}: every
// trajectory is truncated at its stopping depth and the truncated set is
// re-canonicalized.  Stopped paths of a prefix tree stay prefix-free, so the
// rebuild cannot conflict.
TrajectoryTree stopped_tree(const TrajectoryTree& tree, const StoppingTime& nu);

}  // namespace trajpace
