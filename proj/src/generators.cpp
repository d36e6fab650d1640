#include "trajpace/generators.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace trajpace {

namespace {

int max_w_ticks(const GridConfig& cfg) {
  return static_cast<int>(std::floor(cfg.max_w_step() / (cfg.beta * cfg.beta) + 1e-9));
}

double lattice_price(const GridConfig& cfg, int k) {
  return cfg.s0 * std::exp(static_cast<double>(k) * cfg.delta);
}

// Exact termination set membership.
bool in_q(const GridConfig& cfg, int j) { return cfg.Lambda.count(j) > 0; }

// A continuing (non-terminated) observable level can still reach Q exactly:
// with unit W ticks admissible, any strictly larger level is hittable.
bool q_reachable_beyond(const GridConfig& cfg, int j) {
  auto it = cfg.Lambda.upper_bound(j);
  return it != cfg.Lambda.end();
}

}  // namespace

GridValidation validate_grid_config(const GridConfig& cfg) {
  GridValidation v;
  if (!(cfg.s0 > 0.0)) raise(Errc::invalid_config, "s0 must be positive");
  if (!(cfg.delta > 0.0) || !(cfg.beta > 0.0))
    raise(Errc::invalid_config, "delta and beta must be positive");
  if (cfg.p < 1) raise(Errc::invalid_config, "p must be >= 1");
  if (cfg.N1 < 0 || cfg.N2 < 1) raise(Errc::invalid_config, "N1 >= 0 and N2 >= 1 required");
  if (cfg.Lambda.empty()) raise(Errc::invalid_config, "Lambda must be nonempty");
  for (int n : cfg.Lambda)
    if (n < 1 || n > cfg.N2)
      raise(Errc::invalid_config, "Lambda level " + std::to_string(n) + " outside [1, N2]");
  if (max_w_ticks(cfg) < 1)
    raise(Errc::invalid_config, "c below one observable tick: no step can advance W");
  if (cfg.N1 > cfg.p * cfg.N2)
    v.warnings.push_back("N1 > p * N2: outer price levels are unreachable");
  return v;
}

TrajectoryTree enumerate_grid_set(const GridConfig& cfg, std::uint64_t node_budget) {
  validate_grid_config(cfg);
  int m = max_w_ticks(cfg);
  if (!q_reachable_beyond(cfg, 0))
    raise(Errc::invalid_config, "termination set unreachable from W = 0");

  TrajectoryTree::Builder builder(cfg.s0, WValue(std::int64_t{0}));
  std::uint64_t created = 1;

  struct Frame {
    NodeId node;
    int k;
    int j;
  };
  std::vector<Frame> stack{{0, 0, 0}};
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    for (int dk = -cfg.p; dk <= cfg.p; ++dk) {
      int k2 = f.k + dk;
      if (k2 < -cfg.N1 || k2 > cfg.N1) continue;
      for (int dj = 1; dj <= m; ++dj) {
        int j2 = f.j + dj;
        if (j2 > cfg.N2) break;
        bool terminal = in_q(cfg, j2);
        if (!terminal && !q_reachable_beyond(cfg, j2)) continue;
        if (++created > node_budget)
          raise(Errc::budget_exceeded,
                "grid enumeration exceeds node budget " + std::to_string(node_budget));
        NodeId child = builder.add_child(f.node, lattice_price(cfg, k2),
                                         WValue(static_cast<std::int64_t>(j2)));
        if (!terminal) stack.push_back({child, k2, j2});
      }
    }
  }
  return builder.build();
}

TrajectoryTree sample_grid_set(const GridConfig& cfg, int n, std::uint64_t seed,
                               std::uint64_t node_budget) {
  validate_grid_config(cfg);
  if (n < 0) raise(Errc::invalid_config, "negative sample count");
  int m = max_w_ticks(cfg);
  if (!q_reachable_beyond(cfg, 0))
    raise(Errc::invalid_config, "termination set unreachable from W = 0");

  if (n == 0) {
    TrajectoryTree::Builder builder(cfg.s0, WValue(std::int64_t{0}));
    return builder.build();
  }

  std::uint64_t points = 0;
  std::vector<PricePath> paths;
  paths.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::seed_seq sseq{static_cast<std::uint64_t>(seed),
                       static_cast<std::uint64_t>(i)};
    std::mt19937_64 rng(sseq);
    PricePath path{{cfg.s0, WValue(std::int64_t{0})}};
    int k = 0, j = 0;
    while (!in_q(cfg, j)) {
      int k_lo = std::max(-cfg.N1, k - cfg.p);
      int k_hi = std::min(cfg.N1, k + cfg.p);
      std::uniform_int_distribution<int> pick_k(k_lo, k_hi);
      int k2 = pick_k(rng);

      // Admissible observable advances keep exact termination reachable.
      std::vector<int> dj_ok;
      for (int dj = 1; dj <= m; ++dj) {
        int j2 = j + dj;
        if (j2 > cfg.N2) break;
        if (in_q(cfg, j2) || q_reachable_beyond(cfg, j2)) dj_ok.push_back(dj);
      }
      std::uniform_int_distribution<std::size_t> pick_j(0, dj_ok.size() - 1);
      int j2 = j + dj_ok[pick_j(rng)];

      k = k2;
      j = j2;
      path.push_back({lattice_price(cfg, k), WValue(static_cast<std::int64_t>(j))});
      if (++points > node_budget)
        raise(Errc::budget_exceeded,
              "grid sampling exceeds node budget " + std::to_string(node_budget));
    }
    paths.push_back(std::move(path));
  }
  return build_tree(paths);
}

TrajectoryTree build_bjn_set(const GridConfig& cfg, std::uint64_t node_budget) {
  validate_grid_config(cfg);
  if (cfg.beta != cfg.delta)
    raise(Errc::invalid_config,
          "squared log increments land on the observable lattice only when beta = delta");
  if (cfg.N1 < cfg.p)
    raise(Errc::invalid_config, "price band narrower than one maximal move (N1 < p)");
  int m = max_w_ticks(cfg);

  // reach[j]: from level j (not in Q), some square-step sequence lands in Q
  // exactly without passing N2.
  std::vector<char> reach(static_cast<std::size_t>(cfg.N2) + 1, 0);
  for (int j = cfg.N2; j >= 0; --j) {
    for (int s = 1; s <= cfg.p; ++s) {
      int j2 = j + s * s;
      if (j2 > cfg.N2 || s * s > m) continue;
      if (in_q(cfg, j2) || (j2 <= cfg.N2 && reach[static_cast<std::size_t>(j2)])) {
        reach[static_cast<std::size_t>(j)] = 1;
        break;
      }
    }
  }
  if (!reach[0]) raise(Errc::invalid_config, "termination set unreachable from W = 0");

  TrajectoryTree::Builder builder(cfg.s0, WValue(std::int64_t{0}));
  std::uint64_t created = 1;
  struct Frame {
    NodeId node;
    int k;
    int j;
  };
  std::vector<Frame> stack{{0, 0, 0}};
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    for (int dk = -cfg.p; dk <= cfg.p; ++dk) {
      if (dk == 0) continue;  // zero moves cannot advance the observable
      int k2 = f.k + dk;
      if (k2 < -cfg.N1 || k2 > cfg.N1) continue;
      int j2 = f.j + dk * dk;
      if (j2 > cfg.N2 || dk * dk > m) continue;
      bool terminal = in_q(cfg, j2);
      if (!terminal && !reach[static_cast<std::size_t>(j2)]) continue;
      if (++created > node_budget)
        raise(Errc::budget_exceeded,
              "enumeration exceeds node budget " + std::to_string(node_budget));
      NodeId child = builder.add_child(f.node, lattice_price(cfg, k2),
                                       WValue(static_cast<std::int64_t>(j2)));
      if (!terminal) stack.push_back({child, k2, j2});
    }
  }
  return builder.build();
}

std::vector<GridViolation> validate_grid_path(const PricePath& path, const GridConfig& cfg) {
  std::vector<GridViolation> out;
  validate_grid_config(cfg);
  if (path.empty()) {
    out.push_back({0, "empty trajectory"});
    return out;
  }
  int m = max_w_ticks(cfg);

  auto k_of = [&](double price) {
    return static_cast<int>(std::lround(std::log(price / cfg.s0) / cfg.delta));
  };
  auto j_of = [&](const WValue& w, bool* ok) {
    *ok = true;
    if (w.is_int()) return static_cast<long long>(w.as_int());
    if (std::holds_alternative<double>(w.v)) {
      double x = std::get<double>(w.v) / (cfg.beta * cfg.beta);
      if (std::abs(x - std::llround(x)) > 1e-9) *ok = false;
      return static_cast<long long>(std::llround(x));
    }
    *ok = false;
    return 0LL;
  };

  std::vector<int> ks;
  std::vector<long long> js;
  for (std::size_t i = 0; i < path.size(); ++i) {
    int k = k_of(path[i].price);
    if (path[i].price != lattice_price(cfg, k))
      out.push_back({i, "price off the log lattice"});
    if (std::abs(k) > cfg.N1) out.push_back({i, "price outside the N1 band"});
    ks.push_back(k);
    bool ok = true;
    long long j = j_of(path[i].w, &ok);
    if (!ok) out.push_back({i, "observable off the beta^2 lattice"});
    if (j > cfg.N2) out.push_back({i, "observable above N2"});
    js.push_back(j);
  }
  if (js[0] != 0) out.push_back({0, "observable must start at 0"});

  for (std::size_t i = 1; i < path.size(); ++i) {
    if (std::abs(ks[i] - ks[i - 1]) > cfg.p)
      out.push_back({i, "price jump beyond p ticks"});
    long long dj = js[i] - js[i - 1];
    if (dj < 1) out.push_back({i, "observable failed to advance"});
    if (dj > m) out.push_back({i, "observable advanced beyond c"});
  }

  // Termination: exactly the final level lies in Q.
  for (std::size_t i = 0; i + 1 < path.size(); ++i)
    if (js[i] >= 0 && js[i] <= cfg.N2 && in_q(cfg, static_cast<int>(js[i])))
      out.push_back({i, "trajectory continues past a termination level"});
  long long last = js.back();
  if (!(last >= 1 && last <= cfg.N2 && in_q(cfg, static_cast<int>(last))))
    out.push_back({path.size() - 1, "trajectory does not end in the termination set"});
  return out;
}

// ---------------------------------------------------------------------------
// Martingale-sampled sets
// ---------------------------------------------------------------------------

namespace {

struct StepLaw {
  std::vector<double> factors;  // multiplicative, or additive offsets
  std::vector<double> probs;
  bool additive = false;
};

StepLaw step_law(const MartingaleModel& model) {
  StepLaw law;
  switch (model.kind) {
    case MartingaleModel::Kind::binomial: {
      if (!(model.d < 1.0 && 1.0 < model.u))
        raise(Errc::invalid_model, "binomial needs d < 1 < u");
      double q = (1.0 - model.d) / (model.u - model.d);
      law.factors = {model.u, model.d};
      law.probs = {q, 1.0 - q};
      break;
    }
    case MartingaleModel::Kind::trinomial: {
      if (!(model.d < 1.0 && 1.0 < model.u))
        raise(Errc::invalid_model, "trinomial needs d < 1 < u");
      double qu = model.qu;
      if (qu == 0.0) qu = (2.0 / 3.0) * (1.0 - model.d) / (model.u - model.d);
      double qd = qu * (model.u - 1.0) / (1.0 - model.d);
      double qm = 1.0 - qu - qd;
      if (!(qu > 0.0 && qd > 0.0 && qm > 0.0))
        raise(Errc::invalid_model, "trinomial probabilities must be positive");
      law.factors = {model.u, 1.0, model.d};
      law.probs = {qu, qm, qd};
      break;
    }
    case MartingaleModel::Kind::additive: {
      if (!(model.sigma > 0.0)) raise(Errc::invalid_model, "additive needs sigma > 0");
      law.factors = {model.sigma, -model.sigma};
      law.probs = {0.5, 0.5};
      law.additive = true;
      break;
    }
  }
  return law;
}

double apply_step(const StepLaw& law, double x, std::size_t branch) {
  return law.additive ? x + law.factors[branch] : x * law.factors[branch];
}

// FNV-1a over the branch history, twice with different offsets; stands in for
// the sampled fine history in the observable.
std::string history_digest(const std::vector<std::uint8_t>& branches) {
  auto fnv = [&](std::uint64_t h) {
    for (std::uint8_t b : branches) {
      h ^= b;
      h *= 1099511628211ULL;
    }
    return h;
  };
  std::ostringstream os;
  os << std::hex << fnv(14695981039346656037ULL) << ":" << fnv(88172645463325252ULL);
  return os.str();
}

TrajectoryTree exhaustive_martingale(const MartingaleSamplerConfig& cfg,
                                     std::uint64_t node_budget) {
  if (cfg.sampling.kind != SamplingTimes::Kind::every_step)
    raise(Errc::invalid_model, "exhaustive enumeration requires every-step sampling");
  StepLaw law = step_law(cfg.model);
  double nodes_needed = 1.0;
  double layer = 1.0;
  for (int t = 0; t < cfg.t_steps; ++t) {
    layer *= static_cast<double>(law.factors.size());
    nodes_needed += layer;
    if (nodes_needed > static_cast<double>(node_budget))
      raise(Errc::budget_exceeded, "exhaustive enumeration exceeds node budget");
  }

  TrajectoryTree::Builder builder(cfg.model.s0, WValue(std::int64_t{0}));
  builder.set_step_probability(0, 1.0);
  struct Frame {
    NodeId node;
    double x;
    int t;
  };
  std::vector<Frame> stack{{0, cfg.model.s0, 0}};
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    if (f.t == cfg.t_steps) continue;
    for (std::size_t b = 0; b < law.factors.size(); ++b) {
      double x2 = apply_step(law, f.x, b);
      NodeId child =
          builder.add_child(f.node, x2, WValue(static_cast<std::int64_t>(f.t + 1)));
      builder.set_step_probability(child, law.probs[b]);
      stack.push_back({child, x2, f.t + 1});
    }
  }
  return builder.build();
}

}  // namespace

TrajectoryTree sample_martingale_set(const MartingaleSamplerConfig& cfg,
                                     std::uint64_t node_budget) {
  if (cfg.t_steps < 1) raise(Errc::invalid_model, "t_steps must be >= 1");
  if (cfg.exhaustive) return exhaustive_martingale(cfg, node_budget);
  if (cfg.n_paths < 0) raise(Errc::invalid_model, "negative path count");
  StepLaw law = step_law(cfg.model);
  if (cfg.sampling.kind == SamplingTimes::Kind::every_m && cfg.sampling.m < 1)
    raise(Errc::invalid_model, "sampling stride must be >= 1");
  if (cfg.sampling.kind == SamplingTimes::Kind::level_grid && !(cfg.sampling.level > 0.0))
    raise(Errc::invalid_model, "sampling level must be positive");

  std::vector<PricePath> paths;
  paths.reserve(static_cast<std::size_t>(cfg.n_paths));
  for (int pi = 0; pi < cfg.n_paths; ++pi) {
    std::seed_seq sseq{static_cast<std::uint64_t>(cfg.seed),
                       static_cast<std::uint64_t>(pi)};
    std::mt19937_64 rng(sseq);
    std::discrete_distribution<std::size_t> branch(law.probs.begin(), law.probs.end());

    std::vector<double> fine{cfg.model.s0};
    std::vector<std::uint8_t> branches;
    for (int t = 0; t < cfg.t_steps; ++t) {
      std::size_t b = branch(rng);
      branches.push_back(static_cast<std::uint8_t>(b));
      fine.push_back(apply_step(law, fine.back(), b));
    }

    // Sampling times: always 0; then per rule; always the final time.
    std::vector<int> taus{0};
    switch (cfg.sampling.kind) {
      case SamplingTimes::Kind::every_step:
        for (int t = 1; t <= cfg.t_steps; ++t) taus.push_back(t);
        break;
      case SamplingTimes::Kind::every_m:
        for (int t = cfg.sampling.m; t <= cfg.t_steps; t += cfg.sampling.m)
          taus.push_back(t);
        break;
      case SamplingTimes::Kind::level_grid: {
        double last = fine[0];
        for (int t = 1; t <= cfg.t_steps; ++t) {
          if (std::abs(fine[static_cast<std::size_t>(t)] - last) >= cfg.sampling.level) {
            taus.push_back(t);
            last = fine[static_cast<std::size_t>(t)];
          }
        }
        break;
      }
    }
    if (taus.back() != cfg.t_steps) taus.push_back(cfg.t_steps);

    PricePath path;
    for (int t : taus) {
      std::vector<std::uint8_t> prefix(branches.begin(), branches.begin() + t);
      std::ostringstream w;
      w << t << "#" << history_digest(prefix);
      path.push_back({fine[static_cast<std::size_t>(t)], WValue(w.str())});
    }
    paths.push_back(std::move(path));
  }
  if (paths.empty()) {
    TrajectoryTree::Builder builder(cfg.model.s0, WValue(std::string("0#root")));
    return builder.build();
  }
  TrajectoryTree tree = build_tree(paths);
  if (tree.size() > node_budget)
    raise(Errc::budget_exceeded, "sampled set exceeds node budget");
  return tree;
}

IngestResult ingest_chart(const ChartSeries& series, const GridConfig& cfg) {
  validate_grid_config(cfg);
  if (series.values.empty()) raise(Errc::empty_chart, "no observations");

  double ratio = (cfg.delta * cfg.delta) / (cfg.beta * cfg.beta);
  long long iratio = std::llround(ratio);
  bool integral = std::abs(ratio - static_cast<double>(iratio)) <= 1e-9;

  auto to_index = [&](double v) {
    double x = series.log_prices ? (v - std::log(cfg.s0)) / cfg.delta
                                 : std::log(v / cfg.s0) / cfg.delta;
    return static_cast<int>(std::floor(x + 0.5));  // round half up
  };

  IngestResult r;
  long long j = 0;
  double wreal = 0.0;
  int prev_k = 0;
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    int k = to_index(series.values[i]);
    if (k > cfg.N1) {
      k = cfg.N1;
      r.clipped = true;
    } else if (k < -cfg.N1) {
      k = -cfg.N1;
      r.clipped = true;
    }
    if (i > 0) {
      int dk = k - prev_k;
      if (dk > cfg.p) {
        k = prev_k + cfg.p;
        r.clipped = true;
      } else if (dk < -cfg.p) {
        k = prev_k - cfg.p;
        r.clipped = true;
      }
      int step = k - prev_k;
      j += static_cast<long long>(step) * step * iratio;
      wreal += static_cast<double>(step) * step * cfg.delta * cfg.delta;
    }
    r.k_indices.push_back(k);
    WValue w = integral ? WValue(static_cast<std::int64_t>(j)) : WValue(wreal);
    r.path.push_back({lattice_price(cfg, k), w});
    r.stop_index = i;
    prev_k = k;
    if (i > 0) {
      bool hit = integral ? (j >= 1 && j <= cfg.N2 && in_q(cfg, static_cast<int>(j)))
                          : [&] {
                              for (int n : cfg.Lambda)
                                if (std::abs(wreal - n * cfg.beta * cfg.beta) <= 1e-12)
                                  return true;
                              return false;
                            }();
      if (hit) {
        r.terminated = true;
        break;
      }
    }
  }
  return r;
}

}  // namespace trajpace
