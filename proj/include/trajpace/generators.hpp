#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "trajpace/tree.hpp"

namespace trajpace {

// Discrete trajectory space on a log-price lattice with an increasing
// observable.  Prices live on s0 * exp(k * delta) with |k| <= N1 and one-step
// jumps |k' - k| <= p; the observable advances on the beta^2 lattice by at
// most c per step and every trajectory ends the first time it lands in
// Q = {n * beta^2 : n in Lambda}.
struct GridConfig {
  double s0 = 1.0;
  double delta = 0.01;  // log-price tick
  double beta = 0.01;   // observable tick (W values are j * beta^2)
  int p = 1;            // max |k' - k| per step
  double c = 0.0;       // max W increment per step; 0 means default (p*delta)^2
  int N1 = 10;          // price band |k| <= N1
  int N2 = 10;          // observable cap j <= N2
  std::set<int> Lambda; // termination levels, subset of [1, N2]

  double d() const { return p * delta; }
  double max_w_step() const { return c > 0.0 ? c : d() * d(); }
};

struct GridValidation {
  std::vector<std::string> warnings;
};

// Errors: invalid_config on contradictory fields (empty Lambda, Lambda level
// beyond N2, nonpositive ticks).  Warns when N1 > p * N2 leaves price levels
// unreachable.
GridValidation validate_grid_config(const GridConfig& cfg);

// Every trajectory of the space, as a canonical prefix tree.  W values are
// stored as integer lattice indices.  Price moves clip at the |k| = N1 band,
// which leaves one-sided nodes there.  Error: budget_exceeded when the
// enumeration would exceed `node_budget` tree nodes.
TrajectoryTree enumerate_grid_set(const GridConfig& cfg, std::uint64_t node_budget = 5'000'000);

// n trajectories sampled uniformly step-by-step among admissible moves that
// keep termination reachable; deduplicated into a prefix tree.  Trajectory i
// draws from a substream seeded by (seed, i), so equal inputs rebuild an
// identical tree.  n = 0 yields the root-only tree.  Error: budget_exceeded
// when the sampled paths would hold more than `node_budget` points.
TrajectoryTree sample_grid_set(const GridConfig& cfg, int n, std::uint64_t seed,
                               std::uint64_t node_budget = 5'000'000);

// Variant with the observable forced to the running sum of squared log-price
// increments: W_{i+1} - W_i = (k' - k)^2 * delta^2, so zero price moves are
// inadmissible.  Requires beta = delta so increments stay on the W lattice.
TrajectoryTree build_bjn_set(const GridConfig& cfg, std::uint64_t node_budget = 5'000'000);

// One constraint violation of a trajectory against the grid definition.
struct GridViolation {
  std::size_t step = 0;
  std::string what;
};

// Re-validates a (price, w) trajectory against cfg: lattice membership, jump
// bounds, observable monotone advance within c, termination exactly at the
// first visit to Q.  Empty result means the trajectory belongs to the space.
std::vector<GridViolation> validate_grid_path(const PricePath& path, const GridConfig& cfg);

// Discrete-time martingale used as the underlying source process.
struct MartingaleModel {
  enum class Kind { binomial, trinomial, additive };
  Kind kind = Kind::binomial;
  double s0 = 1.0;
  double u = 1.2;   // multiplicative up factor (binomial/trinomial)
  double d = 0.8;   // multiplicative down factor
  double qu = 0.0;  // trinomial up probability; 0 picks the symmetric choice
  double sigma = 1.0;  // additive step size
};

struct SamplingTimes {
  enum class Kind { every_step, every_m, level_grid };
  Kind kind = Kind::every_step;
  int m = 1;           // for every_m
  double level = 1.0;  // for level_grid: resample when |X - last sample| >= level
};

struct MartingaleSamplerConfig {
  MartingaleModel model;
  int t_steps = 4;
  SamplingTimes sampling;
  int n_paths = 100;
  std::uint64_t seed = 1;
  bool exhaustive = false;  // enumerate all source paths (every_step only)
};

// Trajectory set sampled from the martingale: prices are the source values at
// the sampling times and the observable tags (time, source-history digest),
// so distinct fine histories stay distinct trajectories.  Exhaustive mode
// additionally annotates each node with its conditional step probability
// ("q_prob" in the JSON form); the probabilities are metadata and are never
// consulted by pricing.  Errors: invalid_model (bad factors/probabilities,
// exhaustive with sparse sampling), budget_exceeded.
TrajectoryTree sample_martingale_set(const MartingaleSamplerConfig& cfg,
                                     std::uint64_t node_budget = 5'000'000);

struct ChartSeries {
  std::vector<double> timestamps;
  std::vector<double> values;
  bool log_prices = false;  // values already in log space
};

struct IngestResult {
  PricePath path;
  std::vector<int> k_indices;
  bool clipped = false;     // some jump exceeded p and was clipped
  bool terminated = false;  // W reached Q within the series
  std::size_t stop_index = 0;  // index of the terminating observation
};

// Maps an observed price series onto the grid space: each observation rounds
// half-up to the nearest log-price index, jumps clip to the p band, the
// observable accumulates squared mapped log increments, and the trajectory
// ends at the first visit to Q (flagged unterminated otherwise, e.g. for a
// constant series whose observable never advances).  Errors: empty_chart,
// invalid_config.
IngestResult ingest_chart(const ChartSeries& series, const GridConfig& cfg);

}  // namespace trajpace
