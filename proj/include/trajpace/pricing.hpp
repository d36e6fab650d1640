#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trajpace/analysis.hpp"
#include "trajpace/market.hpp"
#include "trajpace/stopping.hpp"
#include "trajpace/tree.hpp"

namespace trajpace {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

// European-style claim evaluated on a whole trajectory.  Built-ins cover the
// common contracts; `custom` takes any evaluator.  Sampling times default to
// every index of the trajectory when `nus` is empty (capped at the terminal
// depth for shorter paths).
class Payoff {
 public:
  enum class Kind { call, put, lookback_max, asian, stock_at, constant, custom };

  using Evaluator =
      std::function<double(const TrajectoryTree&, std::span<const NodeId>)>;

  static Payoff call(double strike);
  static Payoff put(double strike);
  // a * max_i S_{nu_i} + b over the sampling times.
  static Payoff lookback_max(double a = 1.0, double b = 0.0,
                             std::vector<StoppingTime> nus = {});
  // Average of S over the sampling times.
  static Payoff asian(std::vector<StoppingTime> nus = {});
  static Payoff stock_at(StoppingTime tau);
  static Payoff constant(double c);
  static Payoff custom(Evaluator f, std::string label = "custom");

  double eval(const TrajectoryTree& tree, std::span<const NodeId> path) const;

  Kind kind() const { return kind_; }
  const std::string& label() const { return label_; }
  double strike() const { return strike_; }

  // -Z, a * Z + b, Z1 + Z2.
  friend Payoff operator-(const Payoff& z);
  friend Payoff operator+(const Payoff& a, const Payoff& b);
  Payoff scaled(double a, double b) const;

 private:
  Payoff() = default;
  Kind kind_ = Kind::constant;
  std::string label_;
  double strike_ = 0.0;
  double a_ = 1.0, b_ = 0.0, c_ = 0.0;
  std::vector<StoppingTime> nus_;
  Evaluator custom_;
};

struct LocalMinmaxResult {
  double value = 0.0;                // -inf iff unconstrained and not 0-neutral
  std::optional<double> optimal_h;   // empty iff value = -inf
  std::vector<int> active_children;  // indices attaining the max at optimal_h
};

// One-step robust hedging problem: minimize over admissible h the worst
// child outcome max_j (values[j] - h * deltas[j]).  Unconstrained, the
// minimum equals the upper concave envelope of the points (delta_j, value_j)
// evaluated at abscissa 0, and is -inf exactly when 0 lies strictly outside
// [min delta, max delta].  Interval and grid constraints are solved exactly
// by convexity (endpoint / neighboring-tick evaluation).  Among optimal h the
// smallest magnitude is returned, ties resolved to the smaller h.
// Errors: empty_input, length_mismatch.
LocalMinmaxResult solve_local_minmax(std::span<const double> deltas,
                                     std::span<const double> values,
                                     const PortfolioConstraint& constraint =
                                         PortfolioConstraint::unconstrained());

struct PriceBounds {
  double lower = 0.0;  // may be +/-inf
  double upper = 0.0;  // may be +/-inf
  NodeId anchor = 0;
  int anchor_depth = 0;
  Portfolio upper_hedge;  // meaningful when upper is finite
  Portfolio lower_hedge;  // meaningful when lower is finite
};

// Minmax price interval of `payoff` conditioned at `anchor`, by exact
// backward induction over the subtree: leaves carry the trajectory payoff,
// horizon nodes take the worst continuation, interior nodes solve the local
// problem under the market constraint.  The lower bound is -upper(-Z).
// Hedges record the per-node optimizers with v0 set to the bound.
PriceBounds price_bounds(const Market& market, const Payoff& payoff, NodeId anchor = 0);

struct BruteForceSpec {
  double tick = 0.01;
  double bound = 2.0;
  std::uint64_t budget = 50'000'000;  // portfolio evaluations
};

// Independent price-interval oracle: enumerates every keyed portfolio with
// holdings on the tick grid, evaluates sup over trajectories of Z - gains
// directly, and minimizes over the enumeration.  Agrees with price_bounds up
// to one grid resolution times the tree's step Lipschitz mass.  Error:
// budget_exceeded.
PriceBounds brute_force_bounds(const Market& market, const Payoff& payoff,
                               const BruteForceSpec& spec);

struct MertonReport {
  double s0 = 0.0;
  double strike = 0.0;
  double intrinsic = 0.0;  // max(s0 - K, 0)
  double lower = 0.0;
  double upper = 0.0;
  bool lower_dominates_intrinsic = false;  // intrinsic <= lower
  bool upper_within_stock = false;         // upper <= s0
  bool has_constant_trajectory = false;
  bool lower_equals_intrinsic = false;     // exact when a constant trajectory exists
};

// Model-free call bounds: intrinsic <= lower and upper <= s0 on 0-neutral
// markets with unconstrained (buy-and-hold admissible) holdings, with
// equality of the lower bound when the market contains a constant trajectory.
MertonReport merton_check(const Market& market, double strike);

struct MinmaxCertificate {
  bool upper = true;  // direction: Z <= sum a_i S_{nu_i} + b vs >=
  std::vector<double> coeffs;
  std::vector<StoppingTime> nus;
  double intercept = 0.0;
  bool verified = false;
  double worst_slack = 0.0;  // min over paths of (bound - Z), signed
};

// Checks a proposed one-sided affine-in-sampled-prices bound on the payoff by
// exhaustive path evaluation.
MinmaxCertificate classify_payoff_minmax(const TrajectoryTree& tree, const Payoff& payoff,
                                         MinmaxCertificate candidate);

struct AttainabilityReport {
  double lower = 0.0;
  double upper = 0.0;
  double eps_up = 0.0;    // worst overshoot of the upper hedge
  double eps_down = 0.0;  // worst overshoot of the lower hedge
  bool attainable = false;
  std::optional<double> point_price;
  double tolerance = 0.0;
  bool interval_bound_applicable = false;  // negated upper hedge admissible
  bool interval_bound_holds = false;       // upper - lower <= min(eps_up, eps_down)
};

// Measures how tightly the backward-induction hedges replicate the payoff.
// eps_up = sup over trajectories of (upper + hedge gains - Z) and dually for
// eps_down; the claim is attainable when eps_up vanishes within tolerance
// (1e-12 scaled by the payoff magnitude), and then the interval collapses to
// a point.  Error: unbounded_payoff when either bound is infinite.
AttainabilityReport check_attainability(const Market& market, const Payoff& payoff,
                                        double tolerance_scale = 1e-12);

}  // namespace trajpace
