#pragma once

#include <cstdint>
#include <random>

#include "trajpace/market.hpp"
#include "trajpace/pricing.hpp"
#include "trajpace/stopping.hpp"
#include "trajpace/tree.hpp"

namespace trajpace {

using Rng = std::mt19937_64;

// Mix of node shapes a random tree draws from.
enum class TreeFlavor {
  all_up_down,     // every node up_down: locally arbitrage-free
  zero_neutral,    // up_down / flat / arbitrage nodes
  unrestricted,    // any class including not_zero_neutral
};

struct RandomTreeOptions {
  int max_depth = 4;
  int max_children = 3;
  TreeFlavor flavor = TreeFlavor::zero_neutral;
  double s0 = 1.0;
  // Price increments are drawn from {k/16 : 1 <= |k| <= 8}, which keeps every
  // node price and step gain exactly representable in binary floating point;
  // zero-gain and discreteness comparisons in the property suites are then
  // exact rather than toleranced.
};

TrajectoryTree random_tree(Rng& rng, const RandomTreeOptions& opts);

// Holdings drawn from {k * tick : |k| <= levels} at every node, v0 = 0,
// terminal horizon.
Portfolio random_grid_portfolio(Rng& rng, const TrajectoryTree& tree,
                                double tick = 0.5, int levels = 4);

// Each node is stopped independently with probability stop_prob; materialized
// to a node-set time so it serializes.
StoppingTime random_stopping_time(Rng& rng, const TrajectoryTree& tree,
                                  double stop_prob = 0.25);

// Draws among call / put / asian / lookback / constant with strikes and
// shifts scaled to s0.
Payoff random_payoff(Rng& rng, double s0 = 1.0);

}  // namespace trajpace
