#include "trajpace/market.hpp"

#include <algorithm>
#include <cmath>

namespace trajpace {

Horizon Horizon::terminal() {
  Horizon h;
  h.kind_ = Kind::terminal;
  h.nu_ = StoppingTime::never();
  return h;
}

Horizon Horizon::fixed(int depth) {
  if (depth < 0) raise(Errc::depth_out_of_range, "negative horizon depth");
  Horizon h;
  h.kind_ = Kind::fixed;
  h.depth_ = depth;
  h.nu_ = StoppingTime::fixed_depth(depth);
  return h;
}

Horizon Horizon::stops(StoppingTime nu) {
  Horizon h;
  h.kind_ = Kind::stops;
  h.nu_ = std::move(nu);
  return h;
}

int Horizon::value(const TrajectoryTree& tree, std::span<const NodeId> path) const {
  // StoppingTime::value already caps at the terminal depth.
  return nu_.value(tree, path);
}

double Portfolio::holding_at(const TrajectoryTree& tree, std::span<const NodeId> path,
                             int i) const {
  if (i < 0 || static_cast<std::size_t>(i) >= path.size())
    raise(Errc::depth_out_of_range, "holding index " + std::to_string(i));
  int n = horizon_value(tree, path);
  if (i < n) return holding(path[static_cast<std::size_t>(i)]);
  if (liquidated_) return 0.0;
  // Rebalancing stopped: the position stays at its last rebalanced value.
  if (n == 0) return 0.0;
  return holding(path[static_cast<std::size_t>(n) - 1]);
}

PortfolioConstraint PortfolioConstraint::interval(double lo, double hi) {
  if (!(lo <= 0.0 && 0.0 <= hi))
    raise(Errc::invalid_config, "interval constraint must contain 0");
  PortfolioConstraint c;
  c.kind = Kind::interval;
  c.lo = lo;
  c.hi = hi;
  return c;
}

PortfolioConstraint PortfolioConstraint::grid(double tick, double bound) {
  if (!(tick > 0.0) || !(bound >= 0.0))
    raise(Errc::invalid_config, "grid constraint needs tick > 0 and bound >= 0");
  PortfolioConstraint c;
  c.kind = Kind::grid;
  c.tick = tick;
  c.bound = bound;
  return c;
}

bool PortfolioConstraint::admits_positive() const {
  switch (kind) {
    case Kind::unconstrained: return true;
    case Kind::interval: return hi > 0.0;
    case Kind::grid: return tick <= bound;
  }
  return false;
}

bool PortfolioConstraint::admits_negative() const {
  switch (kind) {
    case Kind::unconstrained: return true;
    case Kind::interval: return lo < 0.0;
    case Kind::grid: return tick <= bound;
  }
  return false;
}

double gains_process(const TrajectoryTree& tree, const Portfolio& p,
                     std::span<const NodeId> path, int from, int to) {
  if (path.empty()) raise(Errc::empty_input, "empty path");
  int steps = static_cast<int>(path.size()) - 1;
  if (from < 0 || from > to || to > steps)
    raise(Errc::depth_out_of_range,
          "gains window [" + std::to_string(from) + ", " + std::to_string(to) + ")");
  double sum = 0.0;
  for (int i = from; i < to; ++i) {
    double h = p.holding_at(tree, path, i);
    double ds = tree.node(path[static_cast<std::size_t>(i) + 1]).price -
                tree.node(path[static_cast<std::size_t>(i)]).price;
    sum += h * ds;
  }
  return sum;
}

double portfolio_value(const TrajectoryTree& tree, const Portfolio& p,
                       std::span<const NodeId> path, int i) {
  return p.v0() + gains_process(tree, p, path, 0, i);
}

std::vector<double> bank_account_path(const TrajectoryTree& tree, const Portfolio& p,
                                      std::span<const NodeId> path) {
  if (path.empty()) raise(Errc::empty_input, "empty path");
  std::vector<double> bank;
  bank.reserve(path.size());
  double h0 = p.holding_at(tree, path, 0);
  bank.push_back(p.v0() - h0 * tree.node(path[0]).price);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    double hi = p.holding_at(tree, path, static_cast<int>(i));
    double hn = p.holding_at(tree, path, static_cast<int>(i) + 1);
    double s_next = tree.node(path[i + 1]).price;
    bank.push_back(bank.back() + (hi - hn) * s_next);
  }
  return bank;
}

Portfolio portfolio_sum(const TrajectoryTree& tree, const Portfolio& a, const Portfolio& b) {
  if (a.holdings_size() != tree.size() || b.holdings_size() != tree.size())
    raise(Errc::length_mismatch, "portfolio not keyed to this tree");
  // Every representable horizon is a stopping time, so the summed portfolio
  // always rebalances until the later horizon; the pointwise-liquidated case
  // is the one where the simple keyed sum is already exact.
  bool both_liquidated = a.liquidated() && b.liquidated();

  Horizon horizon = Horizon::stops(StoppingTime::latest(a.horizon().stopping_time(),
                                                        b.horizon().stopping_time()));
  Portfolio out(tree, a.v0() + b.v0(), horizon, both_liquidated);

  // Key the summed holdings node by node.  At depth i on any trajectory
  // through the node: both positions add while neither horizon has passed,
  // the survivor continues alone once one has, and past both the horizon
  // overlay of `out` takes over (so the stored value is irrelevant there).
  std::vector<char> a_stopped = stopped_by_mask(tree, a.horizon().stopping_time());
  std::vector<char> b_stopped = stopped_by_mask(tree, b.horizon().stopping_time());
  for (const TreeNode& n : tree.nodes()) {
    std::size_t id = static_cast<std::size_t>(n.id);
    double ha = a.holding(n.id);
    double hb = b.holding(n.id);
    // Horizon semantics measure "stopped strictly before this step": position
    // H_i applies on the step out of depth i, and N = i means frozen/zero
    // from i on.  A node's own stop affects its outgoing step.
    bool a_done = a_stopped[id];
    bool b_done = b_stopped[id];
    double sum;
    if (!a_done && !b_done) {
      sum = ha + hb;
    } else if (a_done && !b_done) {
      sum = hb;
    } else if (!a_done && b_done) {
      sum = ha;
    } else {
      sum = 0.0;  // past both horizons; overlay governs
    }
    out.set_holding(n.id, sum);
  }
  return out;
}

namespace {

// tau values along a root-to-node prefix: for each time in `tau`, the first
// depth <= node depth at which it has fired, or -1 when it has not yet.
std::vector<int> tau_hits_on_prefix(const TrajectoryTree& tree,
                                    const std::vector<StoppingTime>& tau,
                                    std::span<const NodeId> prefix) {
  std::vector<int> hits(tau.size(), -1);
  for (std::size_t j = 0; j < tau.size(); ++j) {
    for (std::size_t i = 0; i < prefix.size(); ++i) {
      if (tau[j].stops_at(tree, prefix[i])) {
        hits[j] = static_cast<int>(i);
        break;
      }
    }
  }
  return hits;
}

}  // namespace

Portfolio fast_trend_transform(const TrajectoryTree& tree, const Portfolio& p,
                               const std::vector<StoppingTime>& tau) {
  if (tau.empty()) raise(Errc::empty_input, "no retiming times");
  if (p.holdings_size() != tree.size())
    raise(Errc::length_mismatch, "portfolio not keyed to this tree");

  // Validate the spacing trajectory by trajectory: tau_0 = 0, non-decreasing,
  // strict increases jump by at least 2.
  for (const auto& ids : tree.all_paths()) {
    int prev = tau[0].value(tree, ids);
    if (prev != 0) raise(Errc::invalid_tau_spacing, "tau_0 must be 0 on every trajectory");
    for (std::size_t j = 1; j < tau.size(); ++j) {
      int v = tau[j].value(tree, ids);
      if (v < prev) raise(Errc::invalid_tau_spacing, "tau must be non-decreasing");
      if (v > prev && v < prev + 2)
        raise(Errc::invalid_tau_spacing,
              "strict increases must jump by >= 2 (got " + std::to_string(prev) +
                  " -> " + std::to_string(v) + ")");
      prev = v;
    }
  }

  Portfolio out(tree, p.v0(), p.horizon(), p.liquidated());
  // H^C at depth k reads the base position at the last tau at or before k.
  // That index is prefix-measurable, so keying by node is well defined.
  for (const TreeNode& n : tree.nodes()) {
    std::vector<NodeId> prefix = tree.path_to(n.id);
    std::vector<int> hits = tau_hits_on_prefix(tree, tau, prefix);
    int best = 0;  // tau_0 = 0 always qualifies
    for (std::size_t j = 0; j < tau.size(); ++j)
      if (hits[j] >= 0 && hits[j] <= n.depth) best = std::max(best, hits[j]);
    out.set_holding(n.id, p.holding(prefix[static_cast<std::size_t>(best)]));
  }
  return out;
}

}  // namespace trajpace
