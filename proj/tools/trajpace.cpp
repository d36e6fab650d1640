// Command-line front end: builds, samples, analyzes and prices trajectory
// sets from JSON/TOML/CSV inputs and emits JSON reports.
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trajpace/analysis.hpp"
#include "trajpace/errors.hpp"
#include "trajpace/generators.hpp"
#include "trajpace/json_io.hpp"
#include "trajpace/market.hpp"
#include "trajpace/pricing.hpp"
#include "trajpace/tree.hpp"
#include "trajpace/verify.hpp"

namespace {

using trajpace::Json;

struct InputRecord {
  std::string name;
  std::string path;
  std::string digest;
};

std::vector<InputRecord> g_inputs;

std::string fnv_digest(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

std::string slurp(const std::string& name, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) trajpace::raise(trajpace::Errc::invalid_input, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  g_inputs.push_back({name, path, fnv_digest(buf.str())});
  return buf.str();
}

Json load_json(const std::string& name, const std::string& path) {
  try {
    return Json::parse(slurp(name, path));
  } catch (const Json::parse_error& e) {
    trajpace::raise(trajpace::Errc::invalid_input,
                    path + ": " + std::string(e.what()));
  }
}

trajpace::TrajectoryTree load_tree(const std::string& path) {
  Json j = load_json("tree", path);
  // Accept a report envelope (or its result object) so commands chain
  // without unwrapping: build --out r.json; price --tree r.json.
  if (j.is_object() && j.contains("result") && j["result"].is_object())
    j = j["result"];
  if (j.is_object() && j.contains("tree") && j["tree"].is_object()) j = j["tree"];
  return trajpace::tree_from_json(j);
}

trajpace::GridConfig load_grid_cfg(const std::string& path) {
  std::string text = slurp("config", path);
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".toml")
    return trajpace::grid_config_from_toml(text);
  try {
    return trajpace::grid_config_from_json(Json::parse(text));
  } catch (const Json::parse_error& e) {
    trajpace::raise(trajpace::Errc::invalid_input,
                    path + ": " + std::string(e.what()));
  }
}

std::uint64_t node_budget() {
  if (const char* env = std::getenv("TRAJPACE_NODE_BUDGET")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
    trajpace::raise(trajpace::Errc::invalid_input,
                    "TRAJPACE_NODE_BUDGET must be a positive integer");
  }
  return 5'000'000;
}

// "call:K=1.0" | "put:K=0.9" | "asian" | "lookback:a=1,b=0" | "stock"
// | "stock:depth=2" | "const:c=1"
trajpace::Payoff parse_payoff(const std::string& spec) {
  std::string head = spec;
  std::string args;
  if (auto colon = spec.find(':'); colon != std::string::npos) {
    head = spec.substr(0, colon);
    args = spec.substr(colon + 1);
  }
  std::map<std::string, double> kv;
  std::istringstream as(args);
  std::string part;
  while (std::getline(as, part, ',')) {
    auto eq = part.find('=');
    if (eq == std::string::npos)
      trajpace::raise(trajpace::Errc::invalid_input,
                      "payoff argument '" + part + "' is not key=value");
    try {
      kv[part.substr(0, eq)] = std::stod(part.substr(eq + 1));
    } catch (const std::exception&) {
      trajpace::raise(trajpace::Errc::invalid_input,
                      "payoff argument '" + part + "' is not numeric");
    }
  }
  auto get = [&](const std::string& key, double fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
  };
  if (head == "call") return trajpace::Payoff::call(get("K", 1.0));
  if (head == "put") return trajpace::Payoff::put(get("K", 1.0));
  if (head == "asian") return trajpace::Payoff::asian();
  if (head == "lookback")
    return trajpace::Payoff::lookback_max(get("a", 1.0), get("b", 0.0));
  if (head == "const") return trajpace::Payoff::constant(get("c", 0.0));
  if (head == "stock") {
    if (kv.count("depth"))
      return trajpace::Payoff::stock_at(
          trajpace::StoppingTime::fixed_depth(static_cast<int>(get("depth", 0))));
    return trajpace::Payoff::stock_at(trajpace::StoppingTime::never());
  }
  trajpace::raise(trajpace::Errc::invalid_input, "unknown payoff '" + head + "'");
}

// "unconstrained" | "interval:lo,hi" | "grid:tick,bound"
trajpace::PortfolioConstraint parse_constraint(const std::string& spec) {
  if (spec == "unconstrained") return trajpace::PortfolioConstraint::unconstrained();
  auto colon = spec.find(':');
  std::string head = spec.substr(0, colon);
  std::vector<double> nums;
  if (colon != std::string::npos) {
    std::istringstream as(spec.substr(colon + 1));
    std::string part;
    while (std::getline(as, part, ',')) {
      try {
        nums.push_back(std::stod(part));
      } catch (const std::exception&) {
        trajpace::raise(trajpace::Errc::invalid_input,
                        "constraint argument '" + part + "' is not numeric");
      }
    }
  }
  if (head == "interval" && nums.size() == 2)
    return trajpace::PortfolioConstraint::interval(nums[0], nums[1]);
  if (head == "grid" && nums.size() == 2)
    return trajpace::PortfolioConstraint::grid(nums[0], nums[1]);
  trajpace::raise(trajpace::Errc::invalid_input, "unknown constraint '" + spec + "'");
}

// "terminal" | "fixed:N" | "nodes:i,j,..."
trajpace::Horizon parse_horizon(const std::string& spec) {
  if (spec == "terminal") return trajpace::Horizon::terminal();
  auto colon = spec.find(':');
  std::string head = spec.substr(0, colon);
  std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (head == "fixed") {
    try {
      return trajpace::Horizon::fixed(std::stoi(args));
    } catch (const std::exception&) {
      trajpace::raise(trajpace::Errc::invalid_input, "fixed horizon needs a depth");
    }
  }
  if (head == "nodes") {
    std::vector<trajpace::NodeId> ids;
    std::istringstream as(args);
    std::string part;
    while (std::getline(as, part, ',')) {
      try {
        ids.push_back(static_cast<trajpace::NodeId>(std::stoul(part)));
      } catch (const std::exception&) {
        trajpace::raise(trajpace::Errc::invalid_input,
                        "horizon node '" + part + "' is not an id");
      }
    }
    return trajpace::Horizon::stops(trajpace::StoppingTime::at_nodes(ids));
  }
  trajpace::raise(trajpace::Errc::invalid_input, "unknown horizon '" + spec + "'");
}

Json paths_json(const trajpace::TrajectoryTree& tree) {
  Json arr = Json::array();
  for (const auto& ids : tree.all_paths()) {
    Json jp = Json::array();
    for (const auto& pt : tree.price_path(ids)) {
      Json point = Json::array();
      point.push_back(pt.price);
      if (std::holds_alternative<std::int64_t>(pt.w.v))
        point.push_back(std::get<std::int64_t>(pt.w.v));
      else if (std::holds_alternative<double>(pt.w.v))
        point.push_back(std::get<double>(pt.w.v));
      else
        point.push_back(std::get<std::string>(pt.w.v));
      jp.push_back(std::move(point));
    }
    arr.push_back(std::move(jp));
  }
  return arr;
}

void emit(const std::string& command, const Json& result, const std::string& out,
          std::chrono::steady_clock::time_point started) {
  auto elapsed = std::chrono::steady_clock::now() - started;
  Json report;
  report["command"] = command;
  report["wall_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
  Json inputs = Json::array();
  for (const auto& rec : g_inputs) {
    Json ji;
    ji["name"] = rec.name;
    ji["path"] = rec.path;
    ji["fnv64"] = rec.digest;
    inputs.push_back(std::move(ji));
  }
  report["inputs"] = std::move(inputs);
  report["result"] = result;

  std::string text = report.dump(2);
  text.push_back('\n');
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream os(out, std::ios::binary);
    if (!os) trajpace::raise(trajpace::Errc::invalid_input, "cannot write " + out);
    os << text;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pricing and arbitrage analysis on finite trajectory sets"};
  app.require_subcommand(1);
  auto started = std::chrono::steady_clock::now();

  std::string out;
  app.add_option("--out", out, "write the JSON report here instead of stdout");

  // ---- build ----
  auto* cmd_build = app.add_subcommand("build", "canonical prefix tree from raw paths");
  std::string build_paths;
  bool build_emit_paths = false;
  cmd_build->add_option("--paths", build_paths, "JSON file: {\"paths\": [[[price, w], ...], ...]}")
      ->required();
  cmd_build->add_flag("--emit-paths", build_emit_paths, "include the path list in the report");

  // ---- sample ----
  auto* cmd_sample = app.add_subcommand("sample", "trajectories of a grid space");
  std::string sample_config;
  int sample_n = 100;
  std::uint64_t sample_seed = 1;
  bool sample_enumerate = false, sample_bjn = false, sample_emit_paths = false;
  cmd_sample->add_option("--config", sample_config, "grid config (.json or .toml)")->required();
  cmd_sample->add_option("--n", sample_n, "number of sampled trajectories");
  cmd_sample->add_option("--seed", sample_seed, "sampling seed");
  cmd_sample->add_flag("--enumerate", sample_enumerate, "enumerate every trajectory");
  cmd_sample->add_flag("--bjn", sample_bjn,
                       "observable forced to summed squared log increments");
  cmd_sample->add_flag("--emit-paths", sample_emit_paths, "include the path list");

  // ---- sample-mart ----
  auto* cmd_mart = app.add_subcommand("sample-mart", "martingale-sampled trajectory set");
  std::string mart_config;
  cmd_mart->add_option("--config", mart_config, "sampler config (.json)")->required();

  // ---- ingest ----
  auto* cmd_ingest = app.add_subcommand("ingest", "map a price series onto a grid space");
  std::string ingest_csv, ingest_config;
  bool ingest_log = false;
  cmd_ingest->add_option("--csv", ingest_csv, "CSV with (timestamp, value) rows")->required();
  cmd_ingest->add_option("--config", ingest_config, "grid config (.json or .toml)")->required();
  cmd_ingest->add_flag("--log-prices", ingest_log, "values are already log prices");

  // ---- classify ----
  auto* cmd_classify = app.add_subcommand("classify", "node classes and counts");
  std::string classify_tree;
  cmd_classify->add_option("--tree", classify_tree, "tree JSON file")->required();

  // ---- price / hedge ----
  std::string price_tree, price_payoff = "call:K=1.0";
  std::string price_constraint = "unconstrained", price_horizon = "terminal";
  trajpace::NodeId price_anchor = 0;
  bool price_attainability = false;
  auto* cmd_price = app.add_subcommand("price", "minmax price interval");
  auto* cmd_hedge = app.add_subcommand("hedge", "price interval plus both hedges");
  for (CLI::App* c : {cmd_price, cmd_hedge}) {
    c->add_option("--tree", price_tree, "tree JSON file")->required();
    c->add_option("--payoff", price_payoff, "payoff spec, e.g. call:K=1.0");
    c->add_option("--constraint", price_constraint,
                  "unconstrained | interval:lo,hi | grid:tick,bound");
    c->add_option("--horizon", price_horizon, "terminal | fixed:N | nodes:i,j,...");
    c->add_option("--anchor", price_anchor, "condition the interval at this node");
  }
  cmd_price->add_flag("--attainability", price_attainability,
                      "also measure hedge replication error");

  // ---- contrarian ----
  auto* cmd_contrarian = app.add_subcommand("contrarian", "greedy contrarian descent");
  std::string contrarian_tree, contrarian_portfolio;
  trajpace::NodeId contrarian_start = 0;
  double contrarian_eps = 0.0;
  cmd_contrarian->add_option("--tree", contrarian_tree, "tree JSON file")->required();
  cmd_contrarian->add_option("--portfolio", contrarian_portfolio, "portfolio JSON file")
      ->required();
  cmd_contrarian->add_option("--start", contrarian_start, "descent start node");
  cmd_contrarian->add_option("--epsilon", contrarian_eps,
                             "gain bound; 0 demands every step gain <= 0");

  // ---- arbitrage ----
  auto* cmd_arb = app.add_subcommand("arbitrage", "search for an arbitrage strategy");
  std::string arb_tree, arb_constraint = "unconstrained", arb_horizon = "terminal";
  std::uint64_t arb_budget = 1'000'000;
  cmd_arb->add_option("--tree", arb_tree, "tree JSON file")->required();
  cmd_arb->add_option("--constraint", arb_constraint,
                      "unconstrained | interval:lo,hi | grid:tick,bound");
  cmd_arb->add_option("--horizon", arb_horizon, "terminal | fixed:N | nodes:i,j,...");
  cmd_arb->add_option("--budget", arb_budget, "max portfolios examined (grid search)");

  // ---- stopped ----
  auto* cmd_stopped = app.add_subcommand("stopped", "truncate a tree at a stopping time");
  std::string stopped_tree_file, stopped_horizon = "terminal";
  cmd_stopped->add_option("--tree", stopped_tree_file, "tree JSON file")->required();
  cmd_stopped->add_option("--horizon", stopped_horizon, "fixed:N | nodes:i,j,...");

  // ---- verify ----
  auto* cmd_verify = app.add_subcommand("verify", "randomized property suites");
  std::string verify_suite = "all";
  std::uint64_t verify_seed = 1;
  int verify_cases = 25, verify_depth = 3;
  cmd_verify->add_option("--suite", verify_suite, "suite name or 'all'");
  cmd_verify->add_option("--seed", verify_seed, "base seed");
  cmd_verify->add_option("--cases", verify_cases, "cases per suite");
  cmd_verify->add_option("--depth", verify_depth, "instance size cap");

  for (CLI::App* c : {cmd_build, cmd_sample, cmd_mart, cmd_ingest, cmd_classify,
                      cmd_price, cmd_hedge, cmd_contrarian, cmd_arb, cmd_stopped,
                      cmd_verify})
    c->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_build) {
      Json doc = load_json("paths", build_paths);
      if (!doc.is_object() || !doc.contains("paths") || !doc["paths"].is_array())
        trajpace::raise(trajpace::Errc::invalid_input,
                        "expected {\"paths\": [[[price, w], ...], ...]}");
      std::vector<trajpace::PricePath> paths;
      for (const Json& jp : doc["paths"]) {
        trajpace::PricePath path;
        for (const Json& pt : jp) {
          if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number())
            trajpace::raise(trajpace::Errc::invalid_input,
                            "each point must be [price, w]");
          trajpace::WValue w;
          if (pt[1].is_number_integer())
            w = trajpace::WValue(pt[1].get<std::int64_t>());
          else if (pt[1].is_number_float())
            w = trajpace::WValue(pt[1].get<double>());
          else if (pt[1].is_string())
            w = trajpace::WValue(pt[1].get<std::string>());
          else
            trajpace::raise(trajpace::Errc::invalid_input,
                            "w must be an integer, number, or string");
          path.push_back({pt[0].get<double>(), std::move(w)});
        }
        paths.push_back(std::move(path));
      }
      trajpace::TrajectoryTree tree = trajpace::build_tree(paths);
      Json result;
      result["tree"] = trajpace::tree_to_json(tree);
      if (build_emit_paths) result["paths"] = paths_json(tree);
      emit("build", result, out, started);
    } else if (*cmd_sample) {
      trajpace::GridConfig cfg = load_grid_cfg(sample_config);
      const std::uint64_t budget = node_budget();
      trajpace::TrajectoryTree tree =
          sample_bjn ? trajpace::build_bjn_set(cfg, budget)
          : sample_enumerate
              ? trajpace::enumerate_grid_set(cfg, budget)
              : trajpace::sample_grid_set(cfg, sample_n, sample_seed, budget);
      Json result;
      result["config"] = trajpace::grid_config_to_json(cfg);
      result["nodes"] = tree.size();
      result["trajectories"] = tree.terminal_nodes().size();
      result["tree"] = trajpace::tree_to_json(tree);
      if (sample_emit_paths) result["paths"] = paths_json(tree);
      emit("sample", result, out, started);
    } else if (*cmd_mart) {
      trajpace::MartingaleSamplerConfig cfg =
          trajpace::martingale_config_from_json(load_json("config", mart_config));
      trajpace::TrajectoryTree tree = trajpace::sample_martingale_set(cfg, node_budget());
      Json result;
      result["nodes"] = tree.size();
      result["trajectories"] = tree.terminal_nodes().size();
      result["tree"] = trajpace::tree_to_json(tree);
      emit("sample-mart", result, out, started);
    } else if (*cmd_ingest) {
      trajpace::ChartSeries series = trajpace::chart_from_csv(slurp("csv", ingest_csv));
      series.log_prices = ingest_log;
      trajpace::GridConfig cfg = load_grid_cfg(ingest_config);
      trajpace::IngestResult r = trajpace::ingest_chart(series, cfg);
      Json result;
      result["k_indices"] = r.k_indices;
      result["clipped"] = r.clipped;
      result["terminated"] = r.terminated;
      result["stop_index"] = r.stop_index;
      Json jpath = Json::array();
      for (const auto& pt : r.path) {
        Json point = Json::array();
        point.push_back(pt.price);
        if (pt.w.is_int())
          point.push_back(pt.w.as_int());
        else
          point.push_back(std::get<double>(pt.w.v));
        jpath.push_back(std::move(point));
      }
      result["path"] = std::move(jpath);
      Json violations = Json::array();
      for (const auto& v : trajpace::validate_grid_path(r.path, cfg)) {
        Json jv;
        jv["step"] = v.step;
        jv["what"] = v.what;
        violations.push_back(std::move(jv));
      }
      result["violations"] = std::move(violations);
      emit("ingest", result, out, started);
    } else if (*cmd_classify) {
      trajpace::TrajectoryTree tree = load_tree(classify_tree);
      emit("classify", trajpace::classification_to_json(trajpace::classify_tree(tree)),
           out, started);
    } else if (*cmd_price || *cmd_hedge) {
      trajpace::TrajectoryTree tree = load_tree(price_tree);
      trajpace::Market market(tree, parse_constraint(price_constraint),
                              parse_horizon(price_horizon));
      trajpace::Payoff payoff = parse_payoff(price_payoff);
      trajpace::PriceBounds b = trajpace::price_bounds(market, payoff, price_anchor);
      Json result;
      if (price_attainability && *cmd_price) {
        trajpace::AttainabilityReport att = trajpace::check_attainability(market, payoff);
        result = trajpace::bounds_report_to_json(b, &att);
      } else {
        result = trajpace::bounds_report_to_json(b);
      }
      if (*cmd_hedge) {
        result["upper_hedge"] = trajpace::portfolio_to_json(tree, b.upper_hedge);
        result["lower_hedge"] = trajpace::portfolio_to_json(tree, b.lower_hedge);
      }
      emit(*cmd_price ? "price" : "hedge", result, out, started);
    } else if (*cmd_contrarian) {
      trajpace::TrajectoryTree tree = load_tree(contrarian_tree);
      trajpace::Portfolio p = trajpace::portfolio_from_json(
          tree, load_json("portfolio", contrarian_portfolio));
      auto r = trajpace::find_contrarian(tree, p, contrarian_start, contrarian_eps);
      Json result;
      result["found"] = r.has_value();
      if (r) result["descent"] = trajpace::contrarian_to_json(*r);
      emit("contrarian", result, out, started);
    } else if (*cmd_arb) {
      trajpace::TrajectoryTree tree = load_tree(arb_tree);
      trajpace::Market market(tree, parse_constraint(arb_constraint),
                              parse_horizon(arb_horizon));
      trajpace::ArbitrageSearchResult r =
          trajpace::find_arbitrage_strategy(market, arb_budget);
      emit("arbitrage", trajpace::arbitrage_result_to_json(tree, r), out, started);
    } else if (*cmd_stopped) {
      trajpace::TrajectoryTree tree = load_tree(stopped_tree_file);
      trajpace::Horizon h = parse_horizon(stopped_horizon);
      trajpace::TrajectoryTree cut = trajpace::stopped_tree(tree, h.stopping_time());
      Json result;
      result["tree"] = trajpace::tree_to_json(cut);
      emit("stopped", result, out, started);
    } else if (*cmd_verify) {
      std::vector<std::string> names = verify_suite == "all"
                                           ? trajpace::verify_suite_names()
                                           : std::vector<std::string>{verify_suite};
      Json suites = Json::array();
      int total_failures = 0;
      for (const std::string& name : names) {
        trajpace::SuiteResult r =
            trajpace::run_verify_suite(name, verify_seed, verify_cases, verify_depth);
        total_failures += r.failures;
        Json js;
        js["suite"] = r.name;
        js["cases"] = r.cases;
        js["failures"] = r.failures;
        js["notes"] = r.failure_notes;
        suites.push_back(std::move(js));
        std::cerr << "suite " << r.name << ": " << r.cases << " cases, "
                  << r.failures << " failures\n";
        for (const auto& note : r.failure_notes) std::cerr << "  " << note << "\n";
      }
      Json result;
      result["suites"] = std::move(suites);
      result["failures"] = total_failures;
      emit("verify", result, out, started);
      if (total_failures > 0) return 1;
    }
  } catch (const trajpace::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return trajpace::is_input_error(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
