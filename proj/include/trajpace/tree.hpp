#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "trajpace/errors.hpp"

namespace trajpace {

using NodeId = std::int32_t;
inline constexpr NodeId kNoParent = -1;

// Observable attached to each trajectory point alongside the price.  Identity
// is exact: integer grid indices compare as integers, sampled-history tags
// compare byte-for-byte, plain reals compare by value.  No tolerance is ever
// applied when deciding whether two trajectory points coincide.
struct WValue {
  std::variant<std::int64_t, double, std::string> v;

  WValue() : v(std::int64_t{0}) {}
  WValue(std::int64_t i) : v(i) {}
  WValue(int i) : v(std::int64_t{i}) {}
  WValue(double d) : v(d) {}
  WValue(std::string s) : v(std::move(s)) {}
  WValue(const char* s) : v(std::string(s)) {}

  bool operator==(const WValue&) const = default;

  bool is_int() const { return std::holds_alternative<std::int64_t>(v); }
  std::int64_t as_int() const { return std::get<std::int64_t>(v); }
  std::string to_string() const;
};

// One observed point of a trajectory: (price, observable).
struct PricePoint {
  double price = 0.0;
  WValue w;

  bool operator==(const PricePoint&) const = default;
};

using PricePath = std::vector<PricePoint>;

struct TreeNode {
  NodeId id = 0;
  NodeId parent = kNoParent;
  int depth = 0;
  double price = 0.0;
  WValue w;
  bool terminal = false;
  std::vector<NodeId> children;
};

// Finite trajectory set in canonical prefix-tree form.  Each root-to-leaf walk
// is one trajectory; two trajectories share a node exactly as long as their
// (price, w) histories agree.  Node ids are dense and parents precede
// children, so a reverse id sweep visits children before parents.
class TrajectoryTree {
 public:
  class Builder {
   public:
    // Starts the tree at (root_price, root_w), depth 0.
    Builder(double root_price, WValue root_w);

    // Appends a child; returns its id.  The parent must exist.
    NodeId add_child(NodeId parent, double price, WValue w);

    // Optional per-node step probability annotation (set on the child; it is
    // metadata only and never consulted by pricing or classification).
    void set_step_probability(NodeId node, double q);

    // Finalizes: terminal <=> childless.
    TrajectoryTree build();

   private:
    std::vector<TreeNode> nodes_;
    std::vector<double> step_prob_;
    bool has_probs_ = false;
  };

  const TreeNode& node(NodeId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
      raise(Errc::unknown_node, "node id " + std::to_string(id));
    return nodes_[static_cast<std::size_t>(id)];
  }

  std::size_t size() const { return nodes_.size(); }
  NodeId root() const { return 0; }
  double root_price() const { return nodes_[0].price; }
  const WValue& root_w() const { return nodes_[0].w; }
  int max_depth() const { return max_depth_; }

  const std::vector<TreeNode>& nodes() const { return nodes_; }

  // Step probability of reaching `id` from its parent, when the generator
  // attached one.
  std::optional<double> step_probability(NodeId id) const;
  bool has_step_probabilities() const { return !step_prob_.empty(); }

  std::vector<NodeId> terminal_nodes() const;

  // Node ids from the root down to `id`, inclusive.
  std::vector<NodeId> path_to(NodeId id) const;

  // All root-to-terminal node-id paths, ordered by terminal id.
  std::vector<std::vector<NodeId>> all_paths() const;

  PricePath price_path(std::span<const NodeId> ids) const;

  friend class Builder;

 private:
  std::vector<TreeNode> nodes_;
  std::vector<double> step_prob_;  // empty unless annotated
  int max_depth_ = 0;
};

// Builds the canonical prefix tree of a finite set of trajectories.  All
// trajectories must share their initial (price, w) point; duplicates collapse.
// Errors: empty_input (no paths, or an empty path), inconsistent_root,
// prefix_conflict (one trajectory is a strict prefix of another).
TrajectoryTree build_tree(const std::vector<PricePath>& paths);

// Price increments to each child of `at`, in stable child order.
// Errors: terminal_node.
std::vector<double> children_deltas(const TrajectoryTree& tree, NodeId at);

// View of the trajectories passing through `at`: suffixes from `at` on, with
// depth re-indexed from zero at the anchor.
class ConditionalView {
 public:
  ConditionalView(const TrajectoryTree& tree, NodeId anchor);

  NodeId anchor() const { return anchor_; }
  int anchor_depth() const;
  const TrajectoryTree& tree() const { return *tree_; }

  // Suffix trajectories, each starting with the anchor's own point.
  std::vector<PricePath> paths() const;

  // Standalone tree rooted at the anchor.
  TrajectoryTree materialize() const;

 private:
  const TrajectoryTree* tree_;
  NodeId anchor_;
};

inline ConditionalView conditional_set(const TrajectoryTree& tree, NodeId at) {
  return ConditionalView(tree, at);
}

}  // namespace trajpace
