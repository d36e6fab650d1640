#pragma once

#include <optional>
#include <string>
#include <vector>

#include "trajpace/market.hpp"
#include "trajpace/tree.hpp"

namespace trajpace {

// Local shape of the one-step increments at a node:
//   up_down          sup delta > 0 > inf delta
//   flat             every delta = 0
//   arbitrage        sup/inf straddle 0 weakly but one side pins at 0
//                    (one-sided moves; exploitable by a sign choice)
//   not_zero_neutral all deltas strictly one-signed
// The first three partition the 0-neutral nodes.
enum class NodeClass { up_down, flat, arbitrage, not_zero_neutral };

const char* node_class_name(NodeClass c);

// Classification of a single non-terminal node.  Error: terminal_node.
NodeClass classify_node(const TrajectoryTree& tree, NodeId at);

struct TreeClassification {
  // classes[id] is set for non-terminal nodes only.
  std::vector<std::optional<NodeClass>> classes;
  int up_down = 0;
  int flat = 0;
  int arbitrage = 0;
  int not_zero_neutral = 0;

  bool locally_zero_neutral = false;   // no not_zero_neutral node
  bool locally_arbitrage_free = false; // every node up_down or flat

  // Largest number of arbitrage or flat nodes met along a single trajectory.
  int m_hat = 0;
};

TreeClassification classify_tree(const TrajectoryTree& tree);

// Trajectory found by contrarian descent, with its accumulated gain.
struct ContrarianResult {
  std::vector<NodeId> path;       // root to terminal
  int start_depth = 0;
  double achieved_gain = 0.0;     // sum of step gains from start_depth to N_H
  std::vector<double> step_gains; // per step, aligned from start_depth
};

// Walks down from `start` always picking the child with the smallest
// H * delta (ties: lowest child index), accumulating step gains up to the
// portfolio horizon.  On a subtree whose nodes are all 0-neutral every step
// gain is <= 0, so the walk realizes gain < epsilon for any epsilon > 0 and
// witnesses the 0-contrarian alternative (all step gains <= 0) at epsilon = 0.
// Returns nullopt when the descent fails to meet the bound, which requires a
// not-0-neutral node below start.
std::optional<ContrarianResult> find_contrarian(const TrajectoryTree& tree,
                                                const Portfolio& p, NodeId start,
                                                double epsilon);

// Nodes where the held position cannot lose and can win: with j the node's
// depth, inf over children of H_j * delta >= 0 and sup > 0.
std::vector<NodeId> detect_local_arbitrage(const TrajectoryTree& tree, const Portfolio& p);

struct ArbitrageSearchResult {
  enum class Outcome { found, none, unknown };
  Outcome outcome = Outcome::none;
  std::optional<Portfolio> strategy;
  std::string note;
};

// Searches for an arbitrage: a portfolio with v0 = 0 whose gains are >= 0 on
// every trajectory and > 0 on at least one, under the market's constraint and
// horizon.  Unconstrained and interval constraints are decided exactly from
// node classification (a single exploitable node with an admissible sign is
// necessary and sufficient when horizons are stopping times).  Grid
// constraints run an exhaustive enumeration of keyed grid portfolios;
// `budget` caps the number of portfolios examined and `unknown` reports a
// truncated search.
ArbitrageSearchResult find_arbitrage_strategy(const Market& market,
                                              std::uint64_t budget = 1'000'000);

struct DebtLimitConfig {
  int m_hat = 0;       // allowed arbitrage+flat nodes per trajectory
  double credit = 0.0; // A >= 0: v0 + gains must stay >= -A
  double delta = 0.0;  // every nonzero step gain has |H * dS| >= delta
};

// Checks the debt-limited hypotheses for (market, p) below `start`, then runs
// the contrarian construction that the hypotheses make possible: at an
// arbitrage or flat node follow a zero-delta child, at an up-down node follow
// a child whose step gain is <= -delta when the position is nonzero.  Every
// step gain of the result is <= 0.  Errors: hypothesis_violated with a note
// naming the failing hypothesis.
ContrarianResult verify_debt_limited(const Market& market, const DebtLimitConfig& cfg,
                                     const Portfolio& p, NodeId start);

}  // namespace trajpace
