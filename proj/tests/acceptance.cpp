// Acceptance checks for the pricing and arbitrage-analysis engine.  Each
// criterion prints one [PASS]/[FAIL] line; the process exits nonzero if any
// criterion fails.  All tolerances are pinned here as named constants.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "trajpace/analysis.hpp"
#include "trajpace/generators.hpp"
#include "trajpace/market.hpp"
#include "trajpace/pricing.hpp"
#include "trajpace/random_instances.hpp"
#include "trajpace/stopping.hpp"
#include "trajpace/tree.hpp"

using namespace trajpace;

namespace {

constexpr double kTolPoint = 1e-12;   // exact-value criteria
constexpr double kTolBrute = 1e-3;    // brute-force grid resolution
constexpr double kTolClosed = 1e-10;  // closed-form lattice comparisons
constexpr double kTolOrder = 1e-12;   // ordering claims (lower <= upper etc.)
constexpr double kTolSandwich = 1e-9; // martingale expectations vs bounds

int g_failures = 0;

struct Criterion {
  int number;
  const char* description;
  std::function<bool(std::string&)> body;
};

void run(const Criterion& c) {
  std::string note;
  bool ok = false;
  auto t0 = std::chrono::steady_clock::now();
  try {
    ok = c.body(note);
  } catch (const std::exception& e) {
    note = std::string("exception: ") + e.what();
  }
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - t0)
                .count();
  std::printf("[%s] C%d: %s (%lld ms)%s%s\n", ok ? "PASS" : "FAIL", c.number,
              c.description, static_cast<long long>(ms), note.empty() ? "" : " -- ",
              note.c_str());
  if (!ok) ++g_failures;
}

TrajectoryTree one_step_trinomial() {
  TrajectoryTree::Builder b(1.0, WValue(0));
  b.add_child(0, 0.9, WValue(1));
  b.add_child(0, 1.0, WValue(2));
  b.add_child(0, 1.1, WValue(3));
  return b.build();
}

TrajectoryTree exhaustive_binomial(double s0, double u, double d, int t) {
  MartingaleSamplerConfig cfg;
  cfg.model.kind = MartingaleModel::Kind::binomial;
  cfg.model.s0 = s0;
  cfg.model.u = u;
  cfg.model.d = d;
  cfg.t_steps = t;
  cfg.exhaustive = true;
  return sample_martingale_set(cfg);
}

// ---- C1 -------------------------------------------------------------------
bool crit1(std::string& note) {
  TrajectoryTree tree = one_step_trinomial();
  Market market(tree);
  Payoff z = Payoff::call(1.0);
  PriceBounds b = price_bounds(market, z);
  bool exact = std::abs(b.lower - 0.0) <= kTolPoint && std::abs(b.upper - 0.05) <= kTolPoint;

  BruteForceSpec spec;
  spec.tick = 1e-3;
  spec.bound = 2.0;
  PriceBounds brute = brute_force_bounds(market, z, spec);
  bool agree =
      std::abs(brute.lower - 0.0) <= kTolBrute && std::abs(brute.upper - 0.05) <= kTolBrute;
  if (!exact) note = "induction bounds off";
  if (!agree) note += " brute-force oracle off";
  return exact && agree;
}

// ---- C2 -------------------------------------------------------------------
bool crit2(std::string& note) {
  int bad = 0;
  for (int i = 0; i < 100; ++i) {
    Rng rng(1000 + static_cast<std::uint64_t>(i));
    RandomTreeOptions opts;
    opts.max_depth = 5;
    opts.max_children = 4;
    opts.flavor = TreeFlavor::zero_neutral;
    TrajectoryTree tree = random_tree(rng, opts);
    double c = static_cast<double>(static_cast<int>(rng() % 65) - 32) / 16.0;
    PriceBounds b = price_bounds(Market(tree), Payoff::constant(c));
    if (std::abs(b.lower - c) > kTolPoint || std::abs(b.upper - c) > kTolPoint) ++bad;
  }
  if (bad) note = std::to_string(bad) + " trees missed [c, c]";
  return bad == 0;
}

// ---- C3 -------------------------------------------------------------------
bool crit3(std::string& note) {
  int bad_duality = 0, bad_monotone = 0;
  for (int i = 0; i < 1000; ++i) {
    Rng rng(2000 + static_cast<std::uint64_t>(i));
    RandomTreeOptions opts;
    opts.max_depth = 4;
    opts.flavor = TreeFlavor::unrestricted;
    TrajectoryTree tree = random_tree(rng, opts);
    Payoff z = random_payoff(rng);
    Market market(tree);

    PriceBounds b = price_bounds(market, z);
    PriceBounds neg = price_bounds(market, -z);
    if (!(b.lower == -neg.upper && b.upper == -neg.lower)) ++bad_duality;

    PriceBounds shifted = price_bounds(market, z + Payoff::constant(0.5));
    bool mono = shifted.upper >= b.upper - kTolOrder && shifted.lower >= b.lower - kTolOrder;
    if ((std::isinf(b.upper) && !(shifted.upper >= b.upper)) ||
        (std::isinf(b.lower) && !(shifted.lower >= b.lower)))
      mono = shifted.upper >= b.upper && shifted.lower >= b.lower;
    if (!mono) ++bad_monotone;
  }
  if (bad_duality || bad_monotone)
    note = std::to_string(bad_duality) + " duality / " + std::to_string(bad_monotone) +
           " monotonicity violations";
  return bad_duality == 0 && bad_monotone == 0;
}

// ---- C4 -------------------------------------------------------------------
bool crit4(std::string& note) {
  int bad = 0;
  for (int i = 0; i < 250; ++i) {
    Rng rng(3000 + static_cast<std::uint64_t>(i));
    RandomTreeOptions opts;
    opts.max_depth = 5;
    opts.max_children = 4;
    opts.flavor = TreeFlavor::zero_neutral;
    TrajectoryTree tree = random_tree(rng, opts);
    Market market(tree);
    std::vector<Payoff> claims{Payoff::call(1.0), Payoff::put(1.0), Payoff::asian(),
                               Payoff::lookback_max()};
    for (const Payoff& z : claims) {
      PriceBounds b = price_bounds(market, z);
      if (!(b.lower <= b.upper + kTolOrder)) ++bad;
    }
  }
  if (bad) note = std::to_string(bad) + " inverted intervals";
  return bad == 0;
}

// ---- C5 -------------------------------------------------------------------
bool crit5(std::string& note) {
  int bad = 0;
  for (int i = 0; i < 200; ++i) {
    Rng rng(4000 + static_cast<std::uint64_t>(i));
    RandomTreeOptions opts;
    opts.max_depth = 4;
    opts.flavor = i % 2 == 0 ? TreeFlavor::zero_neutral : TreeFlavor::unrestricted;
    TrajectoryTree tree = random_tree(rng, opts);
    for (const TreeNode& n : tree.nodes()) {
      if (n.terminal) continue;
      std::vector<double> deltas = children_deltas(tree, n.id);
      std::vector<double> values;
      for (std::size_t j = 0; j < deltas.size(); ++j)
        values.push_back(static_cast<double>(static_cast<int>(rng() % 33) - 16) / 16.0);
      bool finite = std::isfinite(solve_local_minmax(deltas, values).value);
      bool neutral = classify_node(tree, n.id) != NodeClass::not_zero_neutral;
      if (finite != neutral) ++bad;
    }
  }
  if (bad) note = std::to_string(bad) + " nodes disagree";
  return bad == 0;
}

// ---- C6 -------------------------------------------------------------------
bool crit6(std::string& note) {
  int bad = 0, none_cases = 0, unknown_cases = 0;
  for (int i = 0; i < 200; ++i) {
    Rng rng(5000 + static_cast<std::uint64_t>(i));
    RandomTreeOptions opts;
    opts.max_depth = 3;
    opts.max_children = 2;
    opts.flavor = i % 2 == 0 ? TreeFlavor::zero_neutral : TreeFlavor::unrestricted;
    TrajectoryTree tree = random_tree(rng, opts);
    Market market(tree, PortfolioConstraint::grid(0.5, 1.0));
    ArbitrageSearchResult r = find_arbitrage_strategy(market, 10'000'000);
    if (r.outcome == ArbitrageSearchResult::Outcome::unknown) {
      ++unknown_cases;
      continue;
    }
    if (r.outcome != ArbitrageSearchResult::Outcome::none) continue;
    ++none_cases;
    PriceBounds b = price_bounds(market, Payoff::constant(0.0));
    if (std::abs(b.lower) > kTolPoint || std::abs(b.upper) > kTolPoint) ++bad;
  }
  if (unknown_cases) note = std::to_string(unknown_cases) + " searches hit the budget";
  if (bad) note += " " + std::to_string(bad) + " none-cases with nonzero DP";
  return bad == 0 && unknown_cases == 0 && none_cases > 0;
}

// ---- C7 -------------------------------------------------------------------
bool crit7(std::string& note) {
  int bad = 0;
  for (int i = 0; i < 200; ++i) {
    Rng rng(6000 + static_cast<std::uint64_t>(i));
    RandomTreeOptions opts;
    opts.max_depth = 4;
    opts.flavor = TreeFlavor::zero_neutral;
    TrajectoryTree tree = random_tree(rng, opts);
    Portfolio p = random_grid_portfolio(rng, tree);
    for (double eps : {1.0, 1e-3}) {
      auto r = find_contrarian(tree, p, 0, eps);
      if (!r) {
        ++bad;
        continue;
      }
      if (!(r->achieved_gain < eps)) ++bad;
      double budget = eps / 2.0;
      for (double g : r->step_gains) {
        if (g > budget) ++bad;
        budget /= 2.0;
      }
    }
  }
  if (bad) note = std::to_string(bad) + " descent violations";
  return bad == 0;
}

// ---- C8 -------------------------------------------------------------------
bool crit8(std::string& note) {
  int bad = 0;
  for (int i = 0; i < 100; ++i) {
    Rng rng(7000 + static_cast<std::uint64_t>(i));
    RandomTreeOptions opts;
    opts.max_depth = 4;
    opts.flavor = TreeFlavor::all_up_down;
    TrajectoryTree tree = random_tree(rng, opts);
    if (!classify_tree(tree).locally_arbitrage_free) ++bad;
    TrajectoryTree cut = stopped_tree(tree, random_stopping_time(rng, tree));
    if (!classify_tree(cut).locally_arbitrage_free) ++bad;

    opts.flavor = TreeFlavor::zero_neutral;
    TrajectoryTree neutral = random_tree(rng, opts);
    if (!classify_tree(neutral).locally_zero_neutral) ++bad;
    TrajectoryTree ncut = stopped_tree(neutral, random_stopping_time(rng, neutral));
    if (!classify_tree(ncut).locally_zero_neutral) ++bad;
  }
  if (bad) note = std::to_string(bad) + " stopped trees lost their class";
  return bad == 0;
}

// ---- C9 -------------------------------------------------------------------
bool crit9(std::string& note) {
  int bad = 0;
  for (int i = 0; i < 50; ++i) {
    Rng rng(8000 + static_cast<std::uint64_t>(i));
    RandomTreeOptions opts;
    opts.max_depth = 4;
    opts.flavor = TreeFlavor::zero_neutral;
    TrajectoryTree tree = random_tree(rng, opts);
    StoppingTime tau = random_stopping_time(rng, tree);
    PriceBounds b = price_bounds(Market(tree), Payoff::stock_at(tau));
    double s0 = tree.root_price();
    if (std::abs(b.lower - s0) > kTolPoint || std::abs(b.upper - s0) > kTolPoint) ++bad;
  }
  if (bad) note = std::to_string(bad) + " sampled-stock intervals off the spot";
  return bad == 0;
}

// ---- C10 ------------------------------------------------------------------
bool crit10(std::string& note) {
  std::vector<GridConfig> configs;
  {
    GridConfig cfg;
    cfg.s0 = 1.0;
    cfg.delta = 0.1;
    cfg.beta = 0.1;
    cfg.c = 2 * cfg.beta * cfg.beta;
    cfg.p = 1;
    cfg.N1 = 2;
    cfg.N2 = 2;
    cfg.Lambda = {2};
    configs.push_back(cfg);
  }
  {
    GridConfig cfg;
    cfg.s0 = 4.0;
    cfg.delta = 0.05;
    cfg.beta = 0.05;
    cfg.c = 2 * cfg.beta * cfg.beta;
    cfg.p = 2;
    cfg.N1 = 3;
    cfg.N2 = 4;
    cfg.Lambda = {3, 4};
    configs.push_back(cfg);
  }
  int bad = 0;
  for (const GridConfig& cfg : configs) {
    TrajectoryTree tree = enumerate_grid_set(cfg);
    Market market(tree);
    for (double rel : {0.85, 1.0, 1.2}) {
      MertonReport r = merton_check(market, rel * cfg.s0);
      if (!r.lower_dominates_intrinsic || !r.upper_within_stock) ++bad;
      if (!r.has_constant_trajectory || !r.lower_equals_intrinsic) ++bad;
      if (std::abs(r.lower - r.intrinsic) > kTolPoint) ++bad;
    }
  }
  if (bad) note = std::to_string(bad) + " static-envelope violations";
  return bad == 0;
}

// ---- C11 ------------------------------------------------------------------
bool crit11(std::string& note) {
  TrajectoryTree two = exhaustive_binomial(100.0, 1.2, 0.8, 2);
  PriceBounds b2 = price_bounds(Market(two), Payoff::call(100.0));
  bool eleven =
      std::abs(b2.upper - 11.0) <= kTolClosed && std::abs(b2.lower - 11.0) <= kTolClosed;
  if (!eleven) note = "two-period value missed 11";

  // Closed form under the unique risk-neutral weights q = (1 - d)/(u - d).
  int bad = 0;
  for (int t = 1; t <= 8; ++t) {
    TrajectoryTree tree = exhaustive_binomial(100.0, 1.2, 0.8, t);
    PriceBounds b = price_bounds(Market(tree), Payoff::call(100.0));
    double q = (1.0 - 0.8) / (1.2 - 0.8);
    double expect = 0.0;
    for (int j = 0; j <= t; ++j) {
      double price = 100.0;
      for (int s = 0; s < j; ++s) price *= 1.2;
      for (int s = 0; s < t - j; ++s) price *= 0.8;
      double weight = std::pow(q, j) * std::pow(1.0 - q, t - j);
      double comb = 1.0;
      for (int s = 0; s < j; ++s) comb = comb * static_cast<double>(t - s) / (s + 1);
      expect += comb * weight * std::max(price - 100.0, 0.0);
    }
    if (std::abs(b.upper - expect) > kTolClosed || std::abs(b.lower - expect) > kTolClosed)
      ++bad;
  }
  if (bad) note += " " + std::to_string(bad) + " horizons off the closed form";
  return eleven && bad == 0;
}

// ---- C12 ------------------------------------------------------------------
bool crit12(std::string& note) {
  MartingaleSamplerConfig cfg;
  cfg.model.kind = MartingaleModel::Kind::trinomial;
  cfg.model.s0 = 100.0;
  cfg.model.u = 1.2;
  cfg.model.d = 0.8;
  cfg.t_steps = 3;
  cfg.exhaustive = true;
  TrajectoryTree tree = sample_martingale_set(cfg);
  Market market(tree);

  int bad = 0;
  Rng rng(424242);
  for (double strike : {90.0, 100.0, 110.0}) {
    Payoff z = Payoff::call(strike);
    PriceBounds b = price_bounds(market, z);
    for (int rw = 0; rw < 50; ++rw) {
      // Independent equivalent martingale weights per node: with u + d = 2
      // the symmetric relation qd = qu keeps E[dS] = 0 for any qu in (0, 1/2).
      std::map<NodeId, double> qu;
      for (const TreeNode& n : tree.nodes())
        if (!n.terminal)
          qu[n.id] = 0.05 + 0.40 * std::uniform_real_distribution<double>(0, 1)(rng);
      std::function<double(NodeId, std::vector<NodeId>&)> expect =
          [&](NodeId id, std::vector<NodeId>& path) -> double {
        const TreeNode& n = tree.node(id);
        path.push_back(id);
        double out;
        if (n.terminal) {
          out = z.eval(tree, path);
        } else {
          double q = qu[id];
          std::vector<double> probs{q, 1.0 - 2.0 * q, q};  // children are u, 1, d
          out = 0.0;
          for (std::size_t c = 0; c < n.children.size(); ++c)
            out += probs[c] * expect(n.children[c], path);
        }
        path.pop_back();
        return out;
      };
      std::vector<NodeId> path;
      double eq = expect(0, path);
      if (!(b.lower - kTolSandwich <= eq && eq <= b.upper + kTolSandwich)) ++bad;
    }
  }
  if (bad) note = std::to_string(bad) + " expectations escape the interval";
  return bad == 0;
}

// ---- C13 ------------------------------------------------------------------
bool crit13(std::string& note) {
  // Root is a one-sided node with a flat branch; both depth-1 nodes straddle.
  TrajectoryTree::Builder builder(1.0, WValue(0));
  NodeId flat_leg = builder.add_child(0, 1.0, WValue(1));
  NodeId up_leg = builder.add_child(0, 1.1, WValue(2));
  builder.add_child(up_leg, 1.2, WValue(3));
  builder.add_child(up_leg, 0.9, WValue(4));
  builder.add_child(flat_leg, 1.05, WValue(5));
  builder.add_child(flat_leg, 0.95, WValue(6));
  TrajectoryTree tree = builder.build();

  TreeClassification cls = classify_tree(tree);
  if (!cls.locally_zero_neutral || cls.arbitrage == 0) {
    note = "construction lost its node classes";
    return false;
  }

  // Paired trading: positions may change only at the trend times {0, 2}, so
  // the depth-1 holding is pinned to the root holding.  Exhaust the grid.
  std::vector<StoppingTime> tau{StoppingTime::at_root(), StoppingTime::fixed_depth(2)};
  bool paired_arbitrage = false;
  for (double h : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    Portfolio src(tree, 0.0);
    src.set_holding(0, h);
    src.set_holding(flat_leg, 7.0);  // pinned away by the transform
    src.set_holding(up_leg, -7.0);
    Portfolio fast = fast_trend_transform(tree, src, tau);
    if (fast.holding(flat_leg) != h || fast.holding(up_leg) != h) {
      note = "transform failed to pin the pair";
      return false;
    }
    bool nonneg = true, positive = false;
    for (NodeId leaf : tree.terminal_nodes()) {
      auto path = tree.path_to(leaf);
      double g = gains_process(tree, fast, path, 0, static_cast<int>(path.size()) - 1);
      if (g < 0.0) nonneg = false;
      if (g > 0.0) positive = true;
    }
    if (nonneg && positive) paired_arbitrage = true;
  }

  ArbitrageSearchResult unpaired =
      find_arbitrage_strategy(Market(tree, PortfolioConstraint::grid(0.5, 1.0)), 10'000'000);
  bool unpaired_found = unpaired.outcome == ArbitrageSearchResult::Outcome::found;
  if (paired_arbitrage) note = "paired search found an exploit";
  if (!unpaired_found) note += " unpaired search missed the exploit";
  return !paired_arbitrage && unpaired_found;
}

// ---- C14 ------------------------------------------------------------------
bool crit14(std::string& note) {
  int bad = 0;
  for (int i = 0; i < 100; ++i) {
    Rng rng(9000 + static_cast<std::uint64_t>(i));
    RandomTreeOptions opts;
    opts.max_depth = 4;
    opts.flavor = TreeFlavor::zero_neutral;
    TrajectoryTree tree = random_tree(rng, opts);
    TreeClassification cls = classify_tree(tree);
    for (int attempt = 0; attempt < 200 && cls.m_hat > 2; ++attempt) {
      tree = random_tree(rng, opts);
      cls = classify_tree(tree);
    }
    Portfolio p = random_grid_portfolio(rng, tree);

    double worst = 0.0;
    for (NodeId leaf : tree.terminal_nodes()) {
      auto path = tree.path_to(leaf);
      for (int k = 0; k < static_cast<int>(path.size()); ++k)
        worst = std::min(worst, portfolio_value(tree, p, path, k));
    }
    DebtLimitConfig cfg;
    cfg.m_hat = cls.m_hat;
    cfg.credit = -worst;
    cfg.delta = 1.0 / 32.0;  // half-tick holdings x sixteenth price ticks
    try {
      ContrarianResult r = verify_debt_limited(Market(tree), cfg, p, 0);
      for (double g : r.step_gains)
        if (g > 0.0) ++bad;
    } catch (const Error&) {
      ++bad;
    }
  }
  if (bad) note = std::to_string(bad) + " constructions failed";
  return bad == 0;
}

// ---- C15 ------------------------------------------------------------------
bool crit15(std::string& note) {
  GridConfig cfg;
  cfg.s0 = 1.0;
  cfg.delta = 0.0082;
  cfg.beta = 0.0082;
  cfg.p = 3;
  cfg.c = 0.0;  // defaults to (p * delta)^2: nine observable ticks per step
  cfg.N1 = 100;
  cfg.N2 = 100;
  cfg.Lambda = {100};

  TrajectoryTree tree = sample_grid_set(cfg, 200, 2026);
  auto paths = tree.all_paths();
  if (paths.size() != 200) {
    note = "expected 200 distinct trajectories, got " + std::to_string(paths.size());
    return false;
  }
  int bad = 0;
  for (const auto& ids : paths)
    if (!validate_grid_path(tree.price_path(ids), cfg).empty()) ++bad;
  if (bad) note = std::to_string(bad) + " trajectories violate the constraints";
  return bad == 0;
}

}  // namespace

int main() {
  auto t0 = std::chrono::steady_clock::now();
  auto elapsed_under = [&](double seconds) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() <
           seconds;
  };

  std::vector<Criterion> criteria{
      {1, "one-step trinomial call prices to [0, 0.05] and the brute-force oracle agrees",
       [&](std::string& n) {
         auto s = std::chrono::steady_clock::now();
         bool ok = crit1(n);
         double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - s).count();
         if (sec >= 1.0) {
           n += " exceeded 1 s";
           return false;
         }
         return ok;
       }},
      {2, "constant payoffs price to the point [c, c] on 100 zero-neutral trees", crit2},
      {3, "lower(Z) = -upper(-Z) and payoff monotonicity across 1000 cases", crit3},
      {4, "price intervals never invert on zero-neutral trees", crit4},
      {5, "local solver finiteness coincides with node zero-neutrality", crit5},
      {6, "no grid arbitrage implies the zero payoff prices to [0, 0]", crit6},
      {7, "contrarian descent beats every epsilon with halving step budgets", crit7},
      {8, "stopping preserves arbitrage-freedom and zero-neutrality", crit8},
      {9, "sampled-stock payoffs price to a point at the spot", crit9},
      {10, "call bounds respect intrinsic value and the stock envelope on grids", crit10},
      {11, "exhaustive binomial pricing matches the closed form through depth 8",
       [&](std::string& n) {
         auto s = std::chrono::steady_clock::now();
         bool ok = crit11(n);
         double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - s).count();
         if (sec >= 5.0) {
           n += " exceeded 5 s";
           return false;
         }
         return ok;
       }},
      {12, "random martingale reweightings stay inside the price interval", crit12},
      {13, "pairing positions removes the arbitrage the free search finds", crit13},
      {14, "debt-limited construction yields nonpositive step gains throughout", crit14},
      {15, "200 sampled large-lattice trajectories all re-validate",
       [&](std::string& n) {
         auto s = std::chrono::steady_clock::now();
         bool ok = crit15(n);
         double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - s).count();
         if (sec >= 5.0) {
           n += " exceeded 5 s";
           return false;
         }
         return ok;
       }},
  };

  for (const Criterion& c : criteria) run(c);
  (void)elapsed_under;
  std::printf("%d/15 criteria passed\n", 15 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
