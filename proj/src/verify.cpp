#include "trajpace/verify.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "trajpace/analysis.hpp"
#include "trajpace/errors.hpp"
#include "trajpace/generators.hpp"
#include "trajpace/market.hpp"
#include "trajpace/pricing.hpp"
#include "trajpace/random_instances.hpp"
#include "trajpace/tree.hpp"

namespace trajpace {

namespace {

Rng case_rng(std::uint64_t seed, int i) {
  std::seed_seq sseq{seed, static_cast<std::uint64_t>(i)};
  return Rng(sseq);
}

double tol(double a, double b, double eps = 1e-9) {
  return eps * std::max({1.0, std::abs(a), std::abs(b)});
}

bool leq(double a, double b, double eps = 1e-9) {
  if (a == kNegInf || b == kPosInf) return true;
  if (a == kPosInf || b == kNegInf) return false;
  return a <= b + tol(a, b, eps);
}

bool close(double a, double b, double eps = 1e-9) {
  if (a == b) return true;  // covers matching infinities
  if (!std::isfinite(a) || !std::isfinite(b)) return false;
  return std::abs(a - b) <= tol(a, b, eps);
}

struct Check {
  SuiteResult* r;
  int case_index;
  void operator()(bool cond, const std::string& what) const {
    if (cond) return;
    ++r->failures;
    if (r->failure_notes.size() < 5)
      r->failure_notes.push_back("case " + std::to_string(case_index) + ": " + what);
  }
};

// Star of even-length dyadic paths from a shared root; every leaf sits at
// depth 2 or 4, so depth-{2,4} node sets are valid fast-trend times.
TrajectoryTree random_even_tree(Rng& rng, double s0) {
  std::uniform_int_distribution<int> n_paths(2, 5);
  std::uniform_int_distribution<int> len_pick(0, 1);
  std::uniform_int_distribution<int> tick(1, 8);
  std::uniform_int_distribution<int> sign(0, 1);
  std::vector<PricePath> paths;
  std::int64_t wtag = 0;
  int n = n_paths(rng);
  for (int i = 0; i < n; ++i) {
    int len = len_pick(rng) == 0 ? 2 : 4;
    PricePath path{{s0, WValue(std::int64_t{0})}};
    double price = s0;
    for (int j = 0; j < len; ++j) {
      double step = tick(rng) / 16.0;
      if (sign(rng) == 1 && price - step >= 1.0 / 16.0) step = -step;
      price += step;
      path.push_back({price, WValue(++wtag)});
    }
    paths.push_back(std::move(path));
  }
  return build_tree(paths);
}

double expected_under_q(const TrajectoryTree& tree, const Payoff& z) {
  double total = 0.0;
  for (NodeId leaf : tree.terminal_nodes()) {
    auto path = tree.path_to(leaf);
    double q = 1.0;
    for (std::size_t i = 1; i < path.size(); ++i)
      q *= tree.step_probability(path[i]).value();
    total += q * z.eval(tree, path);
  }
  return total;
}

void suite_duality(Rng& rng, const Check& check, int depth) {
  RandomTreeOptions opts;
  opts.max_depth = depth;
  opts.flavor = TreeFlavor::zero_neutral;
  TrajectoryTree tree = random_tree(rng, opts);
  Market market(tree);
  Payoff z1 = random_payoff(rng);
  Payoff z2 = random_payoff(rng);

  PriceBounds b1 = price_bounds(market, z1);
  check(leq(b1.lower, b1.upper), "lower bound exceeds upper bound");

  double c = 0.75;
  PriceBounds shifted = price_bounds(market, z1.scaled(1.0, c));
  check(close(shifted.upper, b1.upper + c), "upper bound fails translation");
  check(close(shifted.lower, b1.lower + c), "lower bound fails translation");
  check(leq(b1.upper, shifted.upper), "upper bound fails monotonicity");

  PriceBounds b2 = price_bounds(market, z2);
  PriceBounds sum = price_bounds(market, z1 + z2);
  check(leq(sum.upper, b1.upper + b2.upper), "upper bound fails sublinearity");
  check(leq(b1.lower + b2.lower, sum.lower), "lower bound fails superlinearity");

  PriceBounds neg = price_bounds(market, -z1);
  check(close(neg.upper, -b1.lower) && close(neg.lower, -b1.upper),
        "bounds fail sign duality");
}

void suite_interval(Rng& rng, const Check& check, int depth) {
  RandomTreeOptions opts;
  opts.max_depth = depth;
  opts.flavor = TreeFlavor::unrestricted;
  TrajectoryTree tree = random_tree(rng, opts);
  Payoff z = random_payoff(rng);

  PriceBounds unc = price_bounds(Market(tree), z);
  PriceBounds wide =
      price_bounds(Market(tree, PortfolioConstraint::interval(-2.0, 2.0)), z);
  PriceBounds narrow =
      price_bounds(Market(tree, PortfolioConstraint::interval(-1.0, 1.0)), z);
  PriceBounds grid =
      price_bounds(Market(tree, PortfolioConstraint::grid(0.5, 1.0)), z);

  check(leq(unc.upper, wide.upper) && leq(wide.upper, narrow.upper),
        "upper bounds fail constraint-set monotonicity");
  check(leq(narrow.upper, grid.upper), "grid upper below interval upper");
  check(leq(wide.lower, unc.lower) && leq(narrow.lower, wide.lower),
        "lower bounds fail constraint-set monotonicity");
  check(leq(grid.lower, narrow.lower), "grid lower above interval lower");
  // Non-inversion needs every node 0-neutral; with arbitrage nodes in the
  // tree the constrained bounds may legitimately cross.
  if (classify_tree(tree).locally_zero_neutral)
    check(leq(narrow.lower, narrow.upper), "constrained interval inverted");
}

void suite_contrarian(Rng& rng, const Check& check, int depth) {
  RandomTreeOptions opts;
  opts.max_depth = depth;
  opts.flavor = TreeFlavor::zero_neutral;
  TrajectoryTree tree = random_tree(rng, opts);
  Portfolio p = random_grid_portfolio(rng, tree);

  for (double eps : {1.0, 1e-6}) {
    auto r = find_contrarian(tree, p, 0, eps);
    check(r.has_value(), "descent failed on a 0-neutral tree");
    if (r) check(r->achieved_gain < eps, "achieved gain misses the epsilon bound");
  }
  auto r0 = find_contrarian(tree, p, 0, 0.0);
  check(r0.has_value(), "0-contrarian descent failed on a 0-neutral tree");
  if (r0)
    for (double g : r0->step_gains)
      check(g <= 0.0, "0-contrarian path has a positive step gain");
}

void suite_optional_sampling(Rng& rng, const Check& check, int depth) {
  RandomTreeOptions opts;
  opts.max_depth = depth;
  opts.flavor = TreeFlavor::zero_neutral;
  TrajectoryTree tree = random_tree(rng, opts);
  StoppingTime nu = random_stopping_time(rng, tree);

  // Stopping the market and truncating the trajectories price the same claim.
  Market stopped_market(tree, PortfolioConstraint::unconstrained(),
                        Horizon::stops(nu));
  PriceBounds direct = price_bounds(stopped_market, Payoff::stock_at(nu));

  TrajectoryTree cut = stopped_tree(tree, nu);
  PriceBounds reduced = price_bounds(Market(cut), Payoff::call(0.0));

  check(close(direct.upper, reduced.upper), "upper bound changes under truncation");
  check(close(direct.lower, reduced.lower), "lower bound changes under truncation");
  check(close(direct.upper, tree.root_price(), 1e-12) &&
            close(direct.lower, tree.root_price(), 1e-12),
        "sampled stock price differs from the spot");
}

void suite_merton(Rng& rng, const Check& check, int depth) {
  RandomTreeOptions opts;
  opts.max_depth = depth;
  opts.flavor = TreeFlavor::all_up_down;
  TrajectoryTree base = random_tree(rng, opts);

  std::uniform_int_distribution<int> strike_pick(12, 20);
  double strike = strike_pick(rng) / 16.0;

  MertonReport r = merton_check(Market(base), strike);
  check(r.lower_dominates_intrinsic, "lower bound falls below intrinsic value");
  check(r.upper_within_stock, "upper bound exceeds the stock price");

  // Adjoin a constant trajectory: the lower bound then pins to intrinsic.
  auto paths = base.all_paths();
  PricePath flat;
  for (int i = 0; i <= 2; ++i)
    flat.push_back({base.root_price(), WValue(std::int64_t{-1 - i})});
  flat[0].w = base.root_w();
  std::vector<PricePath> all;
  for (const auto& p : paths) all.push_back(base.price_path(p));
  all.push_back(flat);
  TrajectoryTree with_flat = build_tree(all);

  MertonReport r2 = merton_check(Market(with_flat), strike);
  check(r2.has_constant_trajectory, "constant trajectory not detected");
  check(r2.lower_equals_intrinsic, "lower bound misses intrinsic with a flat path");
}

void suite_martingale_sandwich(Rng& rng, const Check& check, int depth) {
  std::uniform_int_distribution<int> kind_pick(0, 1);
  std::uniform_int_distribution<int> u_pick(11, 14);
  std::uniform_int_distribution<int> d_pick(6, 9);
  MartingaleSamplerConfig cfg;
  cfg.model.kind = kind_pick(rng) == 0 ? MartingaleModel::Kind::binomial
                                       : MartingaleModel::Kind::trinomial;
  cfg.model.u = u_pick(rng) / 10.0;
  cfg.model.d = d_pick(rng) / 10.0;
  cfg.t_steps = std::max(2, depth);
  cfg.exhaustive = true;

  TrajectoryTree tree = sample_martingale_set(cfg);
  Payoff z = random_payoff(rng, cfg.model.s0);
  PriceBounds b = price_bounds(Market(tree), z);
  double eq = expected_under_q(tree, z);
  check(leq(b.lower, eq) && leq(eq, b.upper),
        "martingale expectation escapes the price interval");
}

void suite_debt_limit(Rng& rng, const Check& check, int depth) {
  RandomTreeOptions opts;
  opts.max_depth = depth;
  opts.flavor = TreeFlavor::zero_neutral;
  TrajectoryTree tree = random_tree(rng, opts);
  Portfolio p = random_grid_portfolio(rng, tree);

  double worst = 0.0;
  for (NodeId leaf : tree.terminal_nodes()) {
    auto path = tree.path_to(leaf);
    for (int i = 0; i <= static_cast<int>(path.size()) - 1; ++i)
      worst = std::min(worst, portfolio_value(tree, p, path, i));
  }

  DebtLimitConfig cfg;
  cfg.m_hat = classify_tree(tree).m_hat;
  cfg.credit = -worst;
  cfg.delta = 1.0 / 32.0;  // grid holdings x dyadic ticks: exact lower bound

  Market market(tree);
  try {
    ContrarianResult r = verify_debt_limited(market, cfg, p, 0);
    check(r.achieved_gain <= 0.0, "constructed trajectory gains overall");
    for (double g : r.step_gains)
      check(g <= 0.0, "constructed trajectory has a positive step gain");
  } catch (const Error& e) {
    check(false, std::string("hypotheses rejected: ") + e.what());
  }
}

void suite_fast_trends(Rng& rng, const Check& check, int depth) {
  (void)depth;
  TrajectoryTree tree = random_even_tree(rng, 1.0);
  Portfolio p = random_grid_portfolio(rng, tree);

  auto at_depth = [&](int d) {
    std::vector<NodeId> ids;
    for (NodeId id = 0; id < static_cast<NodeId>(tree.size()); ++id)
      if (tree.node(id).depth == d) ids.push_back(id);
    return StoppingTime::at_nodes(ids);
  };
  std::vector<StoppingTime> tau{StoppingTime::at_root(), at_depth(2), at_depth(4)};

  Portfolio fast = fast_trend_transform(tree, p, tau);
  for (NodeId leaf : tree.terminal_nodes()) {
    auto path = tree.path_to(leaf);
    std::vector<int> tv;
    for (const auto& t : tau) tv.push_back(t.value(tree, path));
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      int best = 0;
      for (std::size_t k = 0; k < tv.size(); ++k)
        if (tv[k] <= static_cast<int>(i)) best = tv[k];
      check(fast.holding(path[i]) == p.holding(path[static_cast<std::size_t>(best)]),
            "retimed holding disagrees with the source at the last trend time");
      if (i >= 1 && i + 1 < path.size() - 0 &&
          fast.holding(path[i]) != fast.holding(path[i - 1]) &&
          i + 1 <= path.size() - 1)
        check(fast.holding(path[i]) == fast.holding(path[i + 1]),
              "position change not held for two consecutive steps");
    }
  }

  std::vector<StoppingTime> bad{StoppingTime::at_root(), at_depth(1)};
  bool threw = false;
  try {
    fast_trend_transform(tree, p, bad);
  } catch (const Error& e) {
    threw = e.code() == Errc::invalid_tau_spacing;
  }
  check(threw, "unit spacing between trend times was accepted");
}

void suite_oracle_agreement(Rng& rng, const Check& check, int depth) {
  RandomTreeOptions opts;
  opts.max_depth = std::min(depth, 3);
  opts.max_children = 2;
  opts.flavor = TreeFlavor::unrestricted;
  TrajectoryTree tree = random_tree(rng, opts);
  Payoff z = random_payoff(rng);

  BruteForceSpec spec;
  spec.tick = 0.5;
  spec.bound = 1.0;
  spec.budget = 20'000'000;
  Market market(tree, PortfolioConstraint::grid(spec.tick, spec.bound));

  PriceBounds dp = price_bounds(market, z);
  PriceBounds brute = brute_force_bounds(market, z, spec);
  check(close(dp.upper, brute.upper), "induction and enumeration disagree on upper");
  check(close(dp.lower, brute.lower), "induction and enumeration disagree on lower");
}

}  // namespace

std::vector<std::string> verify_suite_names() {
  return {"duality",        "interval",   "contrarian",
          "optional-sampling", "merton",  "martingale-sandwich",
          "debt-limit",     "fast-trends", "oracle-agreement"};
}

SuiteResult run_verify_suite(const std::string& name, std::uint64_t seed, int cases,
                             int depth) {
  using SuiteFn = void (*)(Rng&, const Check&, int);
  static const std::map<std::string, SuiteFn> suites = {
      {"duality", suite_duality},
      {"interval", suite_interval},
      {"contrarian", suite_contrarian},
      {"optional-sampling", suite_optional_sampling},
      {"merton", suite_merton},
      {"martingale-sandwich", suite_martingale_sandwich},
      {"debt-limit", suite_debt_limit},
      {"fast-trends", suite_fast_trends},
      {"oracle-agreement", suite_oracle_agreement}};
  auto it = suites.find(name);
  if (it == suites.end()) raise(Errc::invalid_input, "unknown suite '" + name + "'");
  if (cases < 1) raise(Errc::invalid_input, "cases must be >= 1");

  SuiteResult result;
  result.name = name;
  result.cases = cases;
  for (int i = 0; i < cases; ++i) {
    Rng rng = case_rng(seed, i);
    Check check{&result, i};
    try {
      it->second(rng, check, depth);
    } catch (const std::exception& e) {
      ++result.failures;
      if (result.failure_notes.size() < 5)
        result.failure_notes.push_back("case " + std::to_string(i) +
                                       " raised: " + e.what());
    }
  }
  return result;
}

}  // namespace trajpace
