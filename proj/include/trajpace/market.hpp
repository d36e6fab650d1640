#pragma once

#include <optional>
#include <span>
#include <vector>

#include "trajpace/stopping.hpp"
#include "trajpace/tree.hpp"

namespace trajpace {

// Rebalancing horizon of a portfolio.  All representable horizons are
// stopping times on the prefix tree; `kind` is kept for serialization.
class Horizon {
 public:
  enum class Kind { terminal, fixed, stops };

  Horizon() : kind_(Kind::terminal), nu_(StoppingTime::never()) {}

  static Horizon terminal();
  static Horizon fixed(int depth);
  static Horizon stops(StoppingTime nu);

  Kind kind() const { return kind_; }
  int fixed_depth() const { return depth_; }
  const StoppingTime& stopping_time() const { return nu_; }

  // N_H on a trajectory, capped at its terminal depth.
  int value(const TrajectoryTree& tree, std::span<const NodeId> path) const;

 private:
  Kind kind_;
  int depth_ = 0;
  StoppingTime nu_;
};

// Self-financing single-asset portfolio.  Holdings are keyed by tree node:
// holding(n) is the stock position carried over the step out of n on every
// trajectory through n, which makes the strategy non-anticipative by
// construction.  Initial capital v0 rides on the portfolio.  Past the horizon
// the position either stays frozen at its last rebalanced value or is
// liquidated to zero, per `liquidated`.
class Portfolio {
 public:
  Portfolio() = default;
  Portfolio(const TrajectoryTree& tree, double v0, Horizon horizon = Horizon::terminal(),
            bool liquidated = false)
      : v0_(v0),
        holdings_(tree.size(), 0.0),
        horizon_(std::move(horizon)),
        liquidated_(liquidated) {}

  static Portfolio zero(const TrajectoryTree& tree) { return Portfolio(tree, 0.0); }

  double v0() const { return v0_; }
  void set_v0(double v0) { v0_ = v0; }

  double holding(NodeId id) const { return holdings_.at(static_cast<std::size_t>(id)); }
  void set_holding(NodeId id, double h) { holdings_.at(static_cast<std::size_t>(id)) = h; }
  std::size_t holdings_size() const { return holdings_.size(); }

  const Horizon& horizon() const { return horizon_; }
  void set_horizon(Horizon h) { horizon_ = std::move(h); }
  bool liquidated() const { return liquidated_; }
  void set_liquidated(bool b) { liquidated_ = b; }

  int horizon_value(const TrajectoryTree& tree, std::span<const NodeId> path) const {
    return horizon_.value(tree, path);
  }

  // H_i(S) with the horizon overlay applied: the raw keyed value before the
  // horizon, then frozen or zero.
  double holding_at(const TrajectoryTree& tree, std::span<const NodeId> path, int i) const;

 private:
  double v0_ = 0.0;
  std::vector<double> holdings_;
  Horizon horizon_;
  bool liquidated_ = false;
};

// Admissible holdings at every rebalancing node.
struct PortfolioConstraint {
  enum class Kind { unconstrained, interval, grid };

  Kind kind = Kind::unconstrained;
  double lo = 0.0, hi = 0.0;      // interval bounds, lo <= 0 <= hi
  double tick = 0.0, bound = 0.0; // grid {k*tick : |k*tick| <= bound}

  static PortfolioConstraint unconstrained() { return {}; }
  static PortfolioConstraint interval(double lo, double hi);
  static PortfolioConstraint grid(double tick, double bound);

  bool admits_positive() const;
  bool admits_negative() const;
};

// Pricing context: a trajectory set together with the admissible holdings,
// the horizon rule, and the past-horizon liquidation convention.
struct Market {
  const TrajectoryTree* tree = nullptr;
  PortfolioConstraint constraint;
  Horizon horizon;
  bool liquidation = true;

  Market() = default;
  Market(const TrajectoryTree& t, PortfolioConstraint c = PortfolioConstraint::unconstrained(),
         Horizon h = Horizon::terminal(), bool liq = true)
      : tree(&t), constraint(c), horizon(std::move(h)), liquidation(liq) {}
};

// Sum of H_i(S) * (S_{i+1} - S_i) for i in [from, to).  Holdings follow the
// portfolio's horizon overlay.  Requires from <= to <= number of steps.
double gains_process(const TrajectoryTree& tree, const Portfolio& p,
                     std::span<const NodeId> path, int from, int to);

// Portfolio value V_H(i, S) = v0 + gains up to i.
double portfolio_value(const TrajectoryTree& tree, const Portfolio& p,
                       std::span<const NodeId> path, int i);

// Bank account making the pair (H, B) self-financing at zero interest:
// B_0 = v0 - H_0 S_0 and B_{i+1} = B_i + (H_i - H_{i+1}) S_{i+1}.
// Returns B_0..B_L for a path with L steps.
std::vector<double> bank_account_path(const TrajectoryTree& tree, const Portfolio& p,
                                      std::span<const NodeId> path);

// Pointwise sum of two portfolios on the same tree.  The sum rebalances until
// the later horizon: both positions add before the earlier one ends, the
// surviving position continues alone afterwards.  v0 adds.  The result is
// liquidated only when both inputs are.
Portfolio portfolio_sum(const TrajectoryTree& tree, const Portfolio& a, const Portfolio& b);

// Retimed portfolio H^C with H^C_k = H_{tau_j} for the largest j with
// tau_j <= k.  Requires tau_0 = 0 on every trajectory, the sequence
// non-decreasing pathwise, and every strict increase to jump by at least 2
// (error invalid_tau_spacing otherwise).  The result changes position only at
// the tau times, so any two consecutive steps after a change hold equal
// positions.
Portfolio fast_trend_transform(const TrajectoryTree& tree, const Portfolio& p,
                               const std::vector<StoppingTime>& tau);

}  // namespace trajpace
