#include "trajpace/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "trajpace/pricing.hpp"

namespace trajpace {

const char* node_class_name(NodeClass c) {
  switch (c) {
    case NodeClass::up_down: return "up_down";
    case NodeClass::flat: return "flat";
    case NodeClass::arbitrage: return "arbitrage";
    case NodeClass::not_zero_neutral: return "not_zero_neutral";
  }
  return "?";
}

NodeClass classify_node(const TrajectoryTree& tree, NodeId at) {
  std::vector<double> deltas = children_deltas(tree, at);
  double lo = *std::min_element(deltas.begin(), deltas.end());
  double hi = *std::max_element(deltas.begin(), deltas.end());
  if (hi > 0.0 && lo < 0.0) return NodeClass::up_down;
  if (hi == 0.0 && lo == 0.0) return NodeClass::flat;
  if (hi >= 0.0 && lo <= 0.0) return NodeClass::arbitrage;
  return NodeClass::not_zero_neutral;
}

TreeClassification classify_tree(const TrajectoryTree& tree) {
  TreeClassification out;
  out.classes.resize(tree.size());
  for (const TreeNode& n : tree.nodes()) {
    if (n.terminal) continue;
    NodeClass c = classify_node(tree, n.id);
    out.classes[static_cast<std::size_t>(n.id)] = c;
    switch (c) {
      case NodeClass::up_down: ++out.up_down; break;
      case NodeClass::flat: ++out.flat; break;
      case NodeClass::arbitrage: ++out.arbitrage; break;
      case NodeClass::not_zero_neutral: ++out.not_zero_neutral; break;
    }
  }
  out.locally_zero_neutral = out.not_zero_neutral == 0;
  out.locally_arbitrage_free = out.not_zero_neutral == 0 && out.arbitrage == 0;

  // Worst per-trajectory count of arbitrage + flat nodes, children first.
  std::vector<int> count(tree.size(), 0);
  const auto& nodes = tree.nodes();
  for (std::size_t i = nodes.size(); i-- > 0;) {
    const TreeNode& n = nodes[i];
    if (n.terminal) continue;
    int below = 0;
    for (NodeId c : n.children) below = std::max(below, count[static_cast<std::size_t>(c)]);
    NodeClass c = *out.classes[i];
    count[i] = below + ((c == NodeClass::arbitrage || c == NodeClass::flat) ? 1 : 0);
  }
  out.m_hat = count[0];
  return out;
}

std::optional<ContrarianResult> find_contrarian(const TrajectoryTree& tree,
                                                const Portfolio& p, NodeId start,
                                                double epsilon) {
  tree.node(start);  // bounds check
  ContrarianResult r;
  r.start_depth = tree.node(start).depth;

  // Greedy descent: take the child with the worst step gain for the held
  // position.  At a 0-neutral node that gain is <= 0 whatever the sign of the
  // position, so on a 0-neutral subtree the accumulated gain never rises.
  std::vector<NodeId> suffix{start};
  NodeId cur = start;
  while (!tree.node(cur).terminal) {
    const TreeNode& n = tree.node(cur);
    double h = p.holding(cur);
    NodeId pick = n.children.front();
    double best = h * (tree.node(pick).price - n.price);
    for (std::size_t i = 1; i < n.children.size(); ++i) {
      double g = h * (tree.node(n.children[i]).price - n.price);
      if (g < best) {  // strict: ties keep the lowest child index
        best = g;
        pick = n.children[i];
      }
    }
    suffix.push_back(pick);
    cur = pick;
  }

  std::vector<NodeId> full = tree.path_to(start);
  full.insert(full.end(), suffix.begin() + 1, suffix.end());
  r.path = full;

  int horizon = p.horizon_value(tree, full);
  double total = 0.0;
  bool all_nonpositive = true;
  for (int i = r.start_depth; i < horizon; ++i) {
    double h = p.holding_at(tree, full, i);
    double ds = tree.node(full[static_cast<std::size_t>(i) + 1]).price -
                tree.node(full[static_cast<std::size_t>(i)]).price;
    double g = h * ds;
    r.step_gains.push_back(g);
    total += g;
    if (g > 0.0) all_nonpositive = false;
  }
  r.achieved_gain = total;

  bool ok = epsilon > 0.0 ? total < epsilon : all_nonpositive;
  if (!ok) return std::nullopt;
  return r;
}

std::vector<NodeId> detect_local_arbitrage(const TrajectoryTree& tree, const Portfolio& p) {
  if (p.holdings_size() != tree.size())
    raise(Errc::length_mismatch, "portfolio not keyed to this tree");
  std::vector<NodeId> out;
  for (const TreeNode& n : tree.nodes()) {
    if (n.terminal) continue;
    double h = p.holding(n.id);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (NodeId c : n.children) {
      double g = h * (tree.node(c).price - n.price);
      lo = std::min(lo, g);
      hi = std::max(hi, g);
    }
    if (lo >= 0.0 && hi > 0.0) out.push_back(n.id);
  }
  return out;
}

namespace {

// Smallest-magnitude admissible nonzero holding of the given sign, if any.
std::optional<double> admissible_signed(const PortfolioConstraint& c, bool positive) {
  switch (c.kind) {
    case PortfolioConstraint::Kind::unconstrained:
      return positive ? 1.0 : -1.0;
    case PortfolioConstraint::Kind::interval:
      if (positive && c.hi > 0.0) return c.hi;
      if (!positive && c.lo < 0.0) return c.lo;
      return std::nullopt;
    case PortfolioConstraint::Kind::grid:
      if (c.tick <= c.bound) return positive ? c.tick : -c.tick;
      return std::nullopt;
  }
  return std::nullopt;
}

// Single-node strategy exploiting one-sided increments at `at`.
Portfolio exploit_node(const Market& market, NodeId at, double h) {
  Portfolio s(*market.tree, 0.0, market.horizon, market.liquidation);
  s.set_holding(at, h);
  return s;
}

// A node is exploitable when a single admissible position wins on some child
// and loses on none.
std::optional<Portfolio> exploitable(const Market& market) {
  const TrajectoryTree& tree = *market.tree;
  std::vector<char> stopped = stopped_by_mask(tree, market.horizon.stopping_time());
  for (const TreeNode& n : tree.nodes()) {
    if (n.terminal || stopped[static_cast<std::size_t>(n.id)]) continue;
    std::vector<double> deltas = children_deltas(tree, n.id);
    double lo = *std::min_element(deltas.begin(), deltas.end());
    double hi = *std::max_element(deltas.begin(), deltas.end());
    if (lo >= 0.0 && hi > 0.0) {
      if (auto h = admissible_signed(market.constraint, true))
        return exploit_node(market, n.id, *h);
    }
    if (hi <= 0.0 && lo < 0.0) {
      if (auto h = admissible_signed(market.constraint, false))
        return exploit_node(market, n.id, *h);
    }
  }
  return std::nullopt;
}

// Gains on every trajectory; arbitrage = all >= 0 with one > 0.
bool is_arbitrage(const Market& market, const Portfolio& p,
                  const std::vector<std::vector<NodeId>>& paths) {
  bool some_positive = false;
  for (const auto& path : paths) {
    int n = p.horizon_value(*market.tree, path);
    double g = gains_process(*market.tree, p, path, 0, n);
    if (g < 0.0) return false;
    if (g > 0.0) some_positive = true;
  }
  return some_positive;
}

}  // namespace

ArbitrageSearchResult find_arbitrage_strategy(const Market& market, std::uint64_t budget) {
  if (market.tree == nullptr) raise(Errc::invalid_config, "market has no tree");
  const TrajectoryTree& tree = *market.tree;
  ArbitrageSearchResult out;

  if (market.constraint.kind != PortfolioConstraint::Kind::grid) {
    // With horizons that are stopping times, an arbitrage exists exactly when
    // some rebalancing node has one-sided increments exploitable by an
    // admissible sign; multi-node strategies add nothing, since at every
    // other node any admissible position can lose.
    if (auto s = exploitable(market)) {
      out.outcome = ArbitrageSearchResult::Outcome::found;
      out.strategy = std::move(*s);
      out.note = "one-sided node";
    } else {
      out.outcome = ArbitrageSearchResult::Outcome::none;
      out.note = "no exploitable node";
    }
    return out;
  }

  // Grid constraint: exhaustive enumeration of keyed grid portfolios over the
  // rebalancing nodes, within budget.
  const PortfolioConstraint& c = market.constraint;
  int levels = static_cast<int>(std::floor(c.bound / c.tick + 1e-12));
  std::vector<char> stopped = stopped_by_mask(tree, market.horizon.stopping_time());
  std::vector<NodeId> sites;
  for (const TreeNode& n : tree.nodes())
    if (!n.terminal && !stopped[static_cast<std::size_t>(n.id)]) sites.push_back(n.id);

  if (levels == 0 || sites.empty()) {
    out.outcome = ArbitrageSearchResult::Outcome::none;
    out.note = levels == 0 ? "only the zero holding is admissible" : "no rebalancing nodes";
    return out;
  }

  std::vector<std::vector<NodeId>> paths = tree.all_paths();
  int arity = 2 * levels + 1;
  std::vector<int> idx(sites.size(), 0);  // 0 encodes holding 0, then +-1, ...
  auto level_of = [&](int e) {
    int k = (e + 1) / 2;
    return (e % 2 == 1) ? k : -k;  // 0, +1, -1, +2, -2, ...
  };

  Portfolio probe(tree, 0.0, market.horizon, market.liquidation);
  std::uint64_t tried = 0;
  while (true) {
    ++tried;
    if (tried > budget) {
      out.outcome = ArbitrageSearchResult::Outcome::unknown;
      out.note = "search budget exhausted after " + std::to_string(budget) + " portfolios";
      return out;
    }
    for (std::size_t i = 0; i < sites.size(); ++i)
      probe.set_holding(sites[i], level_of(idx[i]) * c.tick);
    if (is_arbitrage(market, probe, paths)) {
      out.outcome = ArbitrageSearchResult::Outcome::found;
      out.strategy = probe;
      out.note = "grid enumeration";
      return out;
    }
    // Next assignment in mixed radix.
    std::size_t pos = 0;
    while (pos < idx.size()) {
      if (++idx[pos] < arity) break;
      idx[pos] = 0;
      ++pos;
    }
    if (pos == idx.size()) break;
  }
  out.outcome = ArbitrageSearchResult::Outcome::none;
  out.note = "exhaustive over " + std::to_string(tried) + " grid portfolios";
  return out;
}

ContrarianResult verify_debt_limited(const Market& market, const DebtLimitConfig& cfg,
                                     const Portfolio& p, NodeId start) {
  if (market.tree == nullptr) raise(Errc::invalid_config, "market has no tree");
  const TrajectoryTree& tree = *market.tree;
  tree.node(start);

  TreeClassification cls = classify_tree(tree);
  if (!cls.locally_zero_neutral)
    raise(Errc::hypothesis_violated, "a node below the root is not 0-neutral");
  if (cls.m_hat > cfg.m_hat)
    raise(Errc::hypothesis_violated,
          "arbitrage+flat nodes per trajectory: " + std::to_string(cls.m_hat) +
              " > allowed " + std::to_string(cfg.m_hat));

  // Credit line: v0 + gains >= -A on every prefix up to the horizon.
  for (const auto& path : tree.all_paths()) {
    int n = p.horizon_value(tree, path);
    double v = p.v0();
    for (int i = 0; i < n; ++i) {
      double h = p.holding_at(tree, path, i);
      double ds = tree.node(path[static_cast<std::size_t>(i) + 1]).price -
                  tree.node(path[static_cast<std::size_t>(i)]).price;
      v += h * ds;
      if (v < -cfg.credit)
        raise(Errc::hypothesis_violated,
              "credit line broken at node " +
                  std::to_string(path[static_cast<std::size_t>(i) + 1]) +
                  " (value " + std::to_string(v) + ")");
      if (h * ds != 0.0 && std::abs(h * ds) < cfg.delta)
        raise(Errc::hypothesis_violated,
              "step gain below discreteness delta at node " +
                  std::to_string(path[static_cast<std::size_t>(i) + 1]));
    }
  }

  // Construction: at an arbitrage or flat node follow a zero-delta child (one
  // exists by 0-neutrality), at an up-down node with a live position follow a
  // child losing at least delta.  Step gains never exceed 0.
  ContrarianResult r;
  r.start_depth = tree.node(start).depth;
  std::vector<NodeId> suffix{start};
  NodeId cur = start;
  while (!tree.node(cur).terminal) {
    const TreeNode& n = tree.node(cur);
    double h = p.holding(cur);
    NodeClass c = *cls.classes[static_cast<std::size_t>(cur)];
    NodeId pick = kNoParent;
    if (h == 0.0) {
      pick = n.children.front();
    } else if (c == NodeClass::arbitrage || c == NodeClass::flat) {
      for (NodeId ch : n.children)
        if (tree.node(ch).price - n.price == 0.0) {
          pick = ch;
          break;
        }
    } else {  // up_down
      for (NodeId ch : n.children) {
        double g = h * (tree.node(ch).price - n.price);
        if (g < 0.0) {
          pick = ch;
          break;
        }
      }
    }
    if (pick == kNoParent)
      raise(Errc::hypothesis_violated,
            "no admissible contrarian child at node " + std::to_string(cur));
    suffix.push_back(pick);
    cur = pick;
  }

  std::vector<NodeId> full = tree.path_to(start);
  full.insert(full.end(), suffix.begin() + 1, suffix.end());
  r.path = full;
  int horizon = p.horizon_value(tree, full);
  for (int i = r.start_depth; i < horizon; ++i) {
    double h = p.holding_at(tree, full, i);
    double ds = tree.node(full[static_cast<std::size_t>(i) + 1]).price -
                tree.node(full[static_cast<std::size_t>(i)]).price;
    r.step_gains.push_back(h * ds);
    r.achieved_gain += h * ds;
  }
  return r;
}

}  // namespace trajpace
