#include "trajpace/random_instances.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace trajpace {

namespace {

constexpr double kTick = 1.0 / 16.0;  // dyadic: sums and gains stay exact

int pick(Rng& rng, int lo, int hi) {
  std::uniform_int_distribution<int> d(lo, hi);
  return d(rng);
}

double chance(Rng& rng) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  return d(rng);
}

}  // namespace

TrajectoryTree random_tree(Rng& rng, const RandomTreeOptions& opts) {
  TrajectoryTree::Builder builder(opts.s0, WValue(std::int64_t{0}));
  std::int64_t w_counter = 0;  // distinct sibling tags independent of price

  struct Frame {
    NodeId node;
    double price;
    int depth;
  };
  std::vector<Frame> stack{{0, opts.s0, 0}};
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    if (f.depth >= opts.max_depth) continue;
    if (f.depth >= 1 && chance(rng) < 0.2) continue;  // early leaf

    // Negative moves never take the price below one tick.
    int down_room = std::min(8, static_cast<int>(std::lround(f.price / kTick)) - 1);
    int n = pick(rng, 2, std::max(2, opts.max_children));

    enum class Shape { up_down, flat, arb_up, arb_down, one_signed };
    Shape shape;
    double roll = chance(rng);
    if (opts.flavor == TreeFlavor::all_up_down) {
      shape = Shape::up_down;
    } else {
      bool allow_nzn = opts.flavor == TreeFlavor::unrestricted;
      if (allow_nzn && roll < 0.25)
        shape = Shape::one_signed;
      else if (roll < 0.55)
        shape = Shape::up_down;
      else if (roll < 0.70)
        shape = Shape::flat;
      else
        shape = chance(rng) < 0.5 ? Shape::arb_up : Shape::arb_down;
    }
    if (down_room < 1) {
      // At the price floor only upward moves remain; a node promised to be
      // two-sided becomes a leaf instead of silently changing class.
      if (opts.flavor == TreeFlavor::all_up_down) continue;
      if (shape == Shape::up_down || shape == Shape::arb_down) shape = Shape::arb_up;
    }

    auto up_tick = [&] { return pick(rng, 1, 8); };
    auto down_tick = [&] { return -pick(rng, 1, down_room); };
    auto any_tick = [&] {
      int k = pick(rng, -down_room, 8);
      return k;
    };

    std::vector<int> ticks;
    switch (shape) {
      case Shape::up_down:
        ticks.push_back(up_tick());
        ticks.push_back(down_tick());
        for (int i = 2; i < n; ++i) ticks.push_back(any_tick());
        break;
      case Shape::flat:
        ticks.assign(static_cast<std::size_t>(n), 0);
        break;
      case Shape::arb_up:
        ticks.push_back(0);
        ticks.push_back(up_tick());
        for (int i = 2; i < n; ++i) ticks.push_back(chance(rng) < 0.4 ? 0 : up_tick());
        break;
      case Shape::arb_down:
        ticks.push_back(0);
        ticks.push_back(down_tick());
        for (int i = 2; i < n; ++i) ticks.push_back(chance(rng) < 0.4 ? 0 : down_tick());
        break;
      case Shape::one_signed: {
        bool up = down_room < 1 || chance(rng) < 0.5;
        for (int i = 0; i < n; ++i) ticks.push_back(up ? up_tick() : down_tick());
        break;
      }
    }
    std::shuffle(ticks.begin(), ticks.end(), rng);

    for (int t : ticks) {
      double price = f.price + t * kTick;
      NodeId child = builder.add_child(f.node, price, WValue(++w_counter));
      stack.push_back({child, price, f.depth + 1});
    }
  }
  return builder.build();
}

Portfolio random_grid_portfolio(Rng& rng, const TrajectoryTree& tree, double tick,
                                int levels) {
  Portfolio p(tree, 0.0, Horizon::terminal());
  for (NodeId id = 0; id < static_cast<NodeId>(tree.size()); ++id)
    p.set_holding(id, tick * pick(rng, -levels, levels));
  return p;
}

StoppingTime random_stopping_time(Rng& rng, const TrajectoryTree& tree,
                                  double stop_prob) {
  std::vector<NodeId> stopped;
  for (NodeId id = 0; id < static_cast<NodeId>(tree.size()); ++id)
    if (chance(rng) < stop_prob) stopped.push_back(id);
  return StoppingTime::at_nodes(stopped);
}

Payoff random_payoff(Rng& rng, double s0) {
  double strike = s0 * (pick(rng, 12, 20) * kTick);
  switch (pick(rng, 0, 4)) {
    case 0:
      return Payoff::call(strike);
    case 1:
      return Payoff::put(strike);
    case 2:
      return Payoff::asian();
    case 3:
      return Payoff::lookback_max(1.0, -strike);
    default:
      return Payoff::constant(s0 * (pick(rng, 0, 8) * kTick));
  }
}

}  // namespace trajpace
