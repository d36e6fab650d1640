#include "trajpace/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace trajpace {

// ---------------------------------------------------------------------------
// Payoffs
// ---------------------------------------------------------------------------

namespace {

// Prices at the payoff's sampling times; all indices when none are given.
std::vector<double> sampled_prices(const TrajectoryTree& tree,
                                   std::span<const NodeId> path,
                                   const std::vector<StoppingTime>& nus) {
  std::vector<double> out;
  if (nus.empty()) {
    out.reserve(path.size());
    for (NodeId id : path) out.push_back(tree.node(id).price);
  } else {
    out.reserve(nus.size());
    for (const auto& nu : nus) {
      int i = nu.value(tree, path);
      out.push_back(tree.node(path[static_cast<std::size_t>(i)]).price);
    }
  }
  return out;
}

}  // namespace

Payoff Payoff::call(double strike) {
  Payoff z;
  z.kind_ = Kind::call;
  z.strike_ = strike;
  z.label_ = "call";
  return z;
}

Payoff Payoff::put(double strike) {
  Payoff z;
  z.kind_ = Kind::put;
  z.strike_ = strike;
  z.label_ = "put";
  return z;
}

Payoff Payoff::lookback_max(double a, double b, std::vector<StoppingTime> nus) {
  Payoff z;
  z.kind_ = Kind::lookback_max;
  z.a_ = a;
  z.b_ = b;
  z.nus_ = std::move(nus);
  z.label_ = "lookback_max";
  return z;
}

Payoff Payoff::asian(std::vector<StoppingTime> nus) {
  Payoff z;
  z.kind_ = Kind::asian;
  z.nus_ = std::move(nus);
  z.label_ = "asian";
  return z;
}

Payoff Payoff::stock_at(StoppingTime tau) {
  Payoff z;
  z.kind_ = Kind::stock_at;
  z.nus_.push_back(std::move(tau));
  z.label_ = "stock_at";
  return z;
}

Payoff Payoff::constant(double c) {
  Payoff z;
  z.kind_ = Kind::constant;
  z.c_ = c;
  z.label_ = "constant";
  return z;
}

Payoff Payoff::custom(Evaluator f, std::string label) {
  Payoff z;
  z.kind_ = Kind::custom;
  z.custom_ = std::move(f);
  z.label_ = std::move(label);
  return z;
}

double Payoff::eval(const TrajectoryTree& tree, std::span<const NodeId> path) const {
  if (path.empty()) raise(Errc::empty_input, "empty path");
  switch (kind_) {
    case Kind::call: {
      double s = tree.node(path.back()).price;
      return std::max(s - strike_, 0.0);
    }
    case Kind::put: {
      double s = tree.node(path.back()).price;
      return std::max(strike_ - s, 0.0);
    }
    case Kind::lookback_max: {
      std::vector<double> xs = sampled_prices(tree, path, nus_);
      return a_ * *std::max_element(xs.begin(), xs.end()) + b_;
    }
    case Kind::asian: {
      std::vector<double> xs = sampled_prices(tree, path, nus_);
      double sum = 0.0;
      for (double x : xs) sum += x;
      return sum / static_cast<double>(xs.size());
    }
    case Kind::stock_at: {
      int i = nus_.front().value(tree, path);
      return tree.node(path[static_cast<std::size_t>(i)]).price;
    }
    case Kind::constant:
      return c_;
    case Kind::custom:
      return custom_(tree, path);
  }
  return 0.0;
}

Payoff operator-(const Payoff& z) {
  Payoff self = z;
  return Payoff::custom(
      [self](const TrajectoryTree& t, std::span<const NodeId> p) {
        return -self.eval(t, p);
      },
      "-" + z.label());
}

Payoff operator+(const Payoff& a, const Payoff& b) {
  Payoff pa = a, pb = b;
  return Payoff::custom(
      [pa, pb](const TrajectoryTree& t, std::span<const NodeId> p) {
        return pa.eval(t, p) + pb.eval(t, p);
      },
      a.label() + "+" + b.label());
}

Payoff Payoff::scaled(double a, double b) const {
  Payoff self = *this;
  return Payoff::custom(
      [self, a, b](const TrajectoryTree& t, std::span<const NodeId> p) {
        return a * self.eval(t, p) + b;
      },
      "scaled " + label());
}

// ---------------------------------------------------------------------------
// One-step robust problem
// ---------------------------------------------------------------------------

namespace {

struct Point {
  double x;  // delta
  double y;  // continuation value
};

// Upper concave hull of points sorted by x (duplicates collapsed to max y),
// left to right; slopes strictly decrease.
std::vector<Point> upper_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  std::vector<Point> uniq;
  for (const Point& p : pts) {
    if (!uniq.empty() && uniq.back().x == p.x)
      uniq.back().y = std::max(uniq.back().y, p.y);
    else
      uniq.push_back(p);
  }
  std::vector<Point> hull;
  for (const Point& p : uniq) {
    while (hull.size() >= 2) {
      const Point& a = hull[hull.size() - 2];
      const Point& b = hull[hull.size() - 1];
      // Drop b when it lies on or below chord a-p.
      if ((b.y - a.y) * (p.x - b.x) <= (p.y - b.y) * (b.x - a.x))
        hull.pop_back();
      else
        break;
    }
    hull.push_back(p);
  }
  return hull;
}

// Envelope value at abscissa 0 together with the closed set of minimizing
// positions [m_lo, m_hi] (infinite endpoints allowed).
struct EnvelopeAt0 {
  double value;
  double m_lo;
  double m_hi;
};

EnvelopeAt0 envelope_at_zero(const std::vector<Point>& finite_pts) {
  EnvelopeAt0 out{kNegInf, kNegInf, kPosInf};
  if (finite_pts.empty()) {
    // No finite continuation constrains the position at all.
    out.value = kNegInf;
    return out;
  }
  double xmin = finite_pts.front().x, xmax = finite_pts.front().x;
  for (const Point& p : finite_pts) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
  }
  if (0.0 < xmin) {
    // All increments positive: value escapes as h -> +inf.
    out.value = kNegInf;
    out.m_lo = out.m_hi = kPosInf;
    return out;
  }
  if (0.0 > xmax) {
    out.value = kNegInf;
    out.m_lo = out.m_hi = kNegInf;
    return out;
  }

  std::vector<Point> hull = upper_hull(finite_pts);
  // Locate 0 among the hull vertices.
  std::size_t right = 0;
  while (right < hull.size() && hull[right].x < 0.0) ++right;
  if (right < hull.size() && hull[right].x == 0.0) {
    // Vertex exactly at 0: value is its height; supporting slopes range from
    // the right segment's slope up to the left segment's.
    out.value = hull[right].y;
    out.m_lo = right + 1 < hull.size()
                   ? (hull[right + 1].y - hull[right].y) / (hull[right + 1].x - hull[right].x)
                   : kNegInf;
    out.m_hi = right > 0
                   ? (hull[right].y - hull[right - 1].y) / (hull[right].x - hull[right - 1].x)
                   : kPosInf;
    return out;
  }
  // Strictly interior to the segment [right-1, right].
  const Point& a = hull[right - 1];
  const Point& b = hull[right];
  double m = (b.y - a.y) / (b.x - a.x);
  out.value = a.y + m * (0.0 - a.x);
  out.m_lo = out.m_hi = m;
  return out;
}

// Direct evaluation of the worst child outcome at position h, skipping
// children whose continuation imposes no constraint.
double worst_outcome(std::span<const double> deltas, std::span<const double> values,
                     double h) {
  double worst = kNegInf;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (values[i] == kNegInf) continue;
    worst = std::max(worst, values[i] - h * deltas[i]);
  }
  return worst;
}

// Among optimal positions, smallest magnitude first, then smaller value.
bool better_h(double value_a, double h_a, double value_b, double h_b) {
  if (value_a != value_b) return value_a < value_b;
  double ma = std::abs(h_a), mb = std::abs(h_b);
  if (ma != mb) return ma < mb;
  return h_a < h_b;
}

std::vector<int> attaining_children(std::span<const double> deltas,
                                    std::span<const double> values, double h,
                                    double value) {
  std::vector<int> out;
  double scale = std::max(1.0, std::abs(value));
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (values[i] == kNegInf) continue;
    if (std::abs(values[i] - h * deltas[i] - value) <= 1e-12 * scale)
      out.push_back(static_cast<int>(i));
  }
  return out;
}

}  // namespace

LocalMinmaxResult solve_local_minmax(std::span<const double> deltas,
                                     std::span<const double> values,
                                     const PortfolioConstraint& constraint) {
  if (deltas.empty()) raise(Errc::empty_input, "no children");
  if (deltas.size() != values.size())
    raise(Errc::length_mismatch, std::to_string(deltas.size()) + " deltas vs " +
                                     std::to_string(values.size()) + " values");

  std::vector<Point> pts;
  pts.reserve(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i)
    if (values[i] != kNegInf) pts.push_back({deltas[i], values[i]});

  EnvelopeAt0 env = envelope_at_zero(pts);
  LocalMinmaxResult out;

  switch (constraint.kind) {
    case PortfolioConstraint::Kind::unconstrained: {
      out.value = env.value;
      if (env.value == kNegInf) return out;  // no optimizer
      double h;
      if (env.m_lo <= 0.0 && 0.0 <= env.m_hi)
        h = 0.0;
      else if (env.m_lo > 0.0)
        h = env.m_lo;
      else
        h = env.m_hi;
      out.optimal_h = h;
      out.active_children = attaining_children(deltas, values, h, out.value);
      return out;
    }

    case PortfolioConstraint::Kind::interval: {
      double lo = constraint.lo, hi = constraint.hi;
      double a = std::max(env.m_lo, lo);
      double b = std::min(env.m_hi, hi);
      double h;
      if (a <= b) {
        h = std::clamp(0.0, a, b);
      } else {
        // Minimizer set misses the window entirely; convexity picks the
        // nearer endpoint.
        h = env.m_lo > hi ? hi : lo;
      }
      out.value = worst_outcome(deltas, values, h);
      out.optimal_h = h;
      out.active_children = attaining_children(deltas, values, h, out.value);
      return out;
    }

    case PortfolioConstraint::Kind::grid: {
      double tick = constraint.tick;
      long long levels = static_cast<long long>(std::floor(constraint.bound / tick + 1e-12));
      double lo = -static_cast<double>(levels) * tick;
      double hi = static_cast<double>(levels) * tick;
      double a = std::max(env.m_lo, lo);
      double b = std::min(env.m_hi, hi);
      std::vector<long long> cand;
      auto push = [&](double x) {
        if (!std::isfinite(x)) return;
        long long k = static_cast<long long>(std::llround(std::floor(x / tick)));
        for (long long d = -1; d <= 2; ++d) {
          long long kk = std::clamp(k + d, -levels, levels);
          cand.push_back(kk);
        }
      };
      if (a <= b) {
        // A tick inside the minimizer window is optimal; take the one nearest
        // zero.
        long long k_lo = static_cast<long long>(std::ceil(a / tick - 1e-12));
        long long k_hi = static_cast<long long>(std::floor(b / tick + 1e-12));
        k_lo = std::max(k_lo, -levels);
        k_hi = std::min(k_hi, levels);
        if (k_lo <= k_hi) cand.push_back(std::clamp<long long>(0, k_lo, k_hi));
      }
      push(a);
      push(b);
      push(std::isfinite(env.m_lo) ? env.m_lo : (env.m_lo > 0 ? hi : lo));
      push(std::isfinite(env.m_hi) ? env.m_hi : (env.m_hi > 0 ? hi : lo));
      cand.push_back(0);
      std::sort(cand.begin(), cand.end());
      cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

      bool first = true;
      double best_v = 0.0, best_h = 0.0;
      for (long long k : cand) {
        double h = static_cast<double>(k) * tick;
        double v = worst_outcome(deltas, values, h);
        if (first || better_h(v, h, best_v, best_h)) {
          best_v = v;
          best_h = h;
          first = false;
        }
      }
      out.value = best_v;
      out.optimal_h = best_h;
      out.active_children = attaining_children(deltas, values, best_h, out.value);
      return out;
    }
  }
  raise(Errc::invalid_config, "unknown constraint kind");
}

// ---------------------------------------------------------------------------
// Backward induction
// ---------------------------------------------------------------------------

namespace {

// Upper bound sweep over the subtree at `anchor`; fills per-node optimal
// positions into `hedge` and returns the anchor value.
double upper_sweep(const Market& market, const Payoff& payoff, NodeId anchor,
                   Portfolio* hedge) {
  const TrajectoryTree& tree = *market.tree;
  std::vector<char> stopped = stopped_by_mask(tree, market.horizon.stopping_time());
  std::vector<char> below(tree.size(), 0);
  below[static_cast<std::size_t>(anchor)] = 1;
  for (const TreeNode& n : tree.nodes()) {
    if (n.id == anchor) continue;
    if (n.parent != kNoParent && below[static_cast<std::size_t>(n.parent)])
      below[static_cast<std::size_t>(n.id)] = 1;
  }

  std::vector<double> value(tree.size(), 0.0);
  std::vector<double> submax(tree.size(), kNegInf);
  const auto& nodes = tree.nodes();
  for (std::size_t i = nodes.size(); i-- > 0;) {
    const TreeNode& n = nodes[i];
    if (!below[i]) continue;
    if (n.terminal) {
      std::vector<NodeId> path = tree.path_to(n.id);
      submax[i] = payoff.eval(tree, path);
      value[i] = submax[i];
      continue;
    }
    double m = kNegInf;
    for (NodeId c : n.children) m = std::max(m, submax[static_cast<std::size_t>(c)]);
    submax[i] = m;
    if (stopped[i]) {
      // Horizon passed: no rebalancing left, the worst continuation rules.
      value[i] = m;
      continue;
    }
    std::vector<double> deltas;
    std::vector<double> vals;
    deltas.reserve(n.children.size());
    vals.reserve(n.children.size());
    for (NodeId c : n.children) {
      deltas.push_back(tree.node(c).price - n.price);
      vals.push_back(value[static_cast<std::size_t>(c)]);
    }
    LocalMinmaxResult local = solve_local_minmax(deltas, vals, market.constraint);
    value[i] = local.value;
    if (hedge != nullptr && local.optimal_h.has_value())
      hedge->set_holding(n.id, *local.optimal_h);
  }
  return value[static_cast<std::size_t>(anchor)];
}

}  // namespace

PriceBounds price_bounds(const Market& market, const Payoff& payoff, NodeId anchor) {
  if (market.tree == nullptr) raise(Errc::invalid_config, "market has no tree");
  const TrajectoryTree& tree = *market.tree;
  tree.node(anchor);

  PriceBounds out;
  out.anchor = anchor;
  out.anchor_depth = tree.node(anchor).depth;

  Portfolio up(tree, 0.0, market.horizon, market.liquidation);
  out.upper = upper_sweep(market, payoff, anchor, &up);
  up.set_v0(out.upper);
  out.upper_hedge = std::move(up);

  Portfolio down(tree, 0.0, market.horizon, market.liquidation);
  double neg = upper_sweep(market, -payoff, anchor, &down);
  out.lower = -neg;
  // The lower hedge holds the negated optimizers of the reflected problem.
  for (const TreeNode& n : tree.nodes()) down.set_holding(n.id, -down.holding(n.id));
  down.set_v0(out.lower);
  out.lower_hedge = std::move(down);
  return out;
}

PriceBounds brute_force_bounds(const Market& market, const Payoff& payoff,
                               const BruteForceSpec& spec) {
  if (market.tree == nullptr) raise(Errc::invalid_config, "market has no tree");
  const TrajectoryTree& tree = *market.tree;
  std::vector<char> stopped = stopped_by_mask(tree, market.horizon.stopping_time());
  std::vector<NodeId> sites;
  for (const TreeNode& n : tree.nodes())
    if (!n.terminal && !stopped[static_cast<std::size_t>(n.id)]) sites.push_back(n.id);

  std::vector<std::vector<NodeId>> paths = tree.all_paths();
  std::vector<double> z;
  std::vector<int> horizon_at;
  z.reserve(paths.size());
  for (const auto& p : paths) {
    z.push_back(payoff.eval(tree, p));
    horizon_at.push_back(market.horizon.value(tree, p));
  }

  long long levels = static_cast<long long>(std::floor(spec.bound / spec.tick + 1e-12));
  long long arity = 2 * levels + 1;
  double combos = 1.0;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    combos *= static_cast<double>(arity);
    if (combos > static_cast<double>(spec.budget))
      raise(Errc::budget_exceeded,
            "grid enumeration needs more than " + std::to_string(spec.budget) +
                " portfolio evaluations");
  }

  // Per-path per-site step increments: gains(path) = sum over sites on the
  // path (before its horizon) of h(site) * delta(site->next).
  std::vector<std::vector<std::pair<std::size_t, double>>> terms(paths.size());
  std::map<NodeId, std::size_t> site_index;
  for (std::size_t i = 0; i < sites.size(); ++i) site_index[sites[i]] = i;
  for (std::size_t pi = 0; pi < paths.size(); ++pi) {
    const auto& path = paths[pi];
    for (int i = 0; i < horizon_at[pi]; ++i) {
      auto it = site_index.find(path[static_cast<std::size_t>(i)]);
      if (it == site_index.end()) continue;
      double ds = tree.node(path[static_cast<std::size_t>(i) + 1]).price -
                  tree.node(path[static_cast<std::size_t>(i)]).price;
      terms[pi].push_back({it->second, ds});
    }
  }

  std::vector<double> h(sites.size(), -static_cast<double>(levels) * spec.tick);
  std::vector<long long> idx(sites.size(), 0);
  double best_upper = kPosInf;
  double best_lower = kNegInf;
  while (true) {
    double sup = kNegInf;
    double inf = kPosInf;
    for (std::size_t pi = 0; pi < paths.size(); ++pi) {
      double gains = 0.0;
      for (const auto& [si, ds] : terms[pi]) gains += h[si] * ds;
      sup = std::max(sup, z[pi] - gains);
      inf = std::min(inf, z[pi] + gains);
    }
    best_upper = std::min(best_upper, sup);
    best_lower = std::max(best_lower, inf);

    std::size_t pos = 0;
    while (pos < idx.size()) {
      if (++idx[pos] < arity) {
        h[pos] = (static_cast<double>(idx[pos]) - static_cast<double>(levels)) * spec.tick;
        break;
      }
      idx[pos] = 0;
      h[pos] = -static_cast<double>(levels) * spec.tick;
      ++pos;
    }
    if (pos == idx.size()) break;
  }

  PriceBounds out;
  out.anchor = tree.root();
  out.anchor_depth = 0;
  out.upper = best_upper;
  out.lower = best_lower;
  out.upper_hedge = Portfolio(tree, best_upper, market.horizon, market.liquidation);
  out.lower_hedge = Portfolio(tree, best_lower, market.horizon, market.liquidation);
  return out;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

namespace {

// Depth-first search for a terminal chain of constant price below `at`.
bool constant_continuation(const TrajectoryTree& tree, NodeId at) {
  const TreeNode& n = tree.node(at);
  if (n.terminal) return true;
  for (NodeId c : n.children)
    if (tree.node(c).price == n.price && constant_continuation(tree, c)) return true;
  return false;
}

}  // namespace

MertonReport merton_check(const Market& market, double strike) {
  if (market.tree == nullptr) raise(Errc::invalid_config, "market has no tree");
  const TrajectoryTree& tree = *market.tree;
  MertonReport r;
  r.s0 = tree.root_price();
  r.strike = strike;
  r.intrinsic = std::max(r.s0 - strike, 0.0);
  PriceBounds b = price_bounds(market, Payoff::call(strike), tree.root());
  r.lower = b.lower;
  r.upper = b.upper;
  r.lower_dominates_intrinsic = r.intrinsic <= r.lower;
  r.upper_within_stock = r.upper <= r.s0;
  r.has_constant_trajectory = constant_continuation(tree, tree.root());
  r.lower_equals_intrinsic =
      r.has_constant_trajectory && std::abs(r.lower - r.intrinsic) <= 1e-12 * std::max(1.0, r.s0);
  return r;
}

MinmaxCertificate classify_payoff_minmax(const TrajectoryTree& tree, const Payoff& payoff,
                                         MinmaxCertificate candidate) {
  if (candidate.coeffs.size() != candidate.nus.size())
    raise(Errc::length_mismatch, "coefficient/time count mismatch");
  MinmaxCertificate out = std::move(candidate);
  out.verified = true;
  out.worst_slack = kPosInf;
  for (const auto& path : tree.all_paths()) {
    double bound = out.intercept;
    for (std::size_t i = 0; i < out.coeffs.size(); ++i) {
      int t = out.nus[i].value(tree, path);
      bound += out.coeffs[i] * tree.node(path[static_cast<std::size_t>(t)]).price;
    }
    double z = payoff.eval(tree, path);
    double slack = out.upper ? bound - z : z - bound;
    out.worst_slack = std::min(out.worst_slack, slack);
    if (slack < 0.0) out.verified = false;
  }
  return out;
}

AttainabilityReport check_attainability(const Market& market, const Payoff& payoff,
                                        double tolerance_scale) {
  if (market.tree == nullptr) raise(Errc::invalid_config, "market has no tree");
  const TrajectoryTree& tree = *market.tree;
  PriceBounds b = price_bounds(market, payoff, tree.root());
  if (!std::isfinite(b.upper) || !std::isfinite(b.lower))
    raise(Errc::unbounded_payoff, "price bounds are not finite");

  AttainabilityReport r;
  r.lower = b.lower;
  r.upper = b.upper;

  double scale = std::max({1.0, std::abs(b.upper), std::abs(b.lower)});
  double eps_up = 0.0;
  double eps_down = 0.0;
  for (const auto& path : tree.all_paths()) {
    double z = payoff.eval(tree, path);
    int n = market.horizon.value(tree, path);
    double up_gain = gains_process(tree, b.upper_hedge, path, 0, n);
    double down_gain = gains_process(tree, b.lower_hedge, path, 0, n);
    scale = std::max(scale, std::abs(z));
    eps_up = std::max(eps_up, b.upper + up_gain - z);
    eps_down = std::max(eps_down, z - (b.lower + down_gain));
  }
  r.eps_up = eps_up;
  r.eps_down = eps_down;
  r.tolerance = tolerance_scale * scale;
  r.attainable = eps_up <= r.tolerance;
  if (r.attainable) r.point_price = b.upper;

  switch (market.constraint.kind) {
    case PortfolioConstraint::Kind::unconstrained:
      r.interval_bound_applicable = true;
      break;
    case PortfolioConstraint::Kind::interval:
      r.interval_bound_applicable = market.constraint.lo == -market.constraint.hi;
      break;
    case PortfolioConstraint::Kind::grid:
      r.interval_bound_applicable = true;  // tick grids are symmetric
      break;
  }
  r.interval_bound_holds =
      r.upper - r.lower <= std::min(eps_up, eps_down) + r.tolerance;
  return r;
}

}  // namespace trajpace
