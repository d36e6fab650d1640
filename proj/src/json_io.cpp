#include "trajpace/json_io.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace trajpace {

namespace {

Json w_to_json(const WValue& w) {
  if (std::holds_alternative<std::int64_t>(w.v)) return std::get<std::int64_t>(w.v);
  if (std::holds_alternative<double>(w.v)) return std::get<double>(w.v);
  return std::get<std::string>(w.v);
}

WValue w_from_json(const Json& j) {
  if (j.is_number_integer()) return WValue(j.get<std::int64_t>());
  if (j.is_number_float()) return WValue(j.get<double>());
  if (j.is_string()) return WValue(j.get<std::string>());
  raise(Errc::invalid_input, "w must be an integer, number, or string");
}

Json finite_or_tag(double x) {
  if (x == kPosInf) return "+inf";
  if (x == kNegInf) return "-inf";
  return x;
}

void require(bool cond, const std::string& what) {
  if (!cond) raise(Errc::invalid_input, what);
}

const Json& field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) raise(Errc::invalid_input, std::string("missing field '") + key + "'");
  return *it;
}

}  // namespace

Json tree_to_json(const TrajectoryTree& tree) {
  Json out;
  out["s0"] = tree.root_price();
  out["w0"] = w_to_json(tree.root_w());
  Json nodes = Json::array();
  for (NodeId id = 0; id < static_cast<NodeId>(tree.size()); ++id) {
    const TreeNode& n = tree.node(id);
    Json jn;
    jn["id"] = id;
    if (n.parent == kNoParent)
      jn["parent"] = nullptr;
    else
      jn["parent"] = n.parent;
    jn["price"] = n.price;
    jn["w"] = w_to_json(n.w);
    jn["terminal"] = n.terminal;
    if (auto q = tree.step_probability(id)) jn["q_prob"] = *q;
    nodes.push_back(std::move(jn));
  }
  out["nodes"] = std::move(nodes);
  return out;
}

TrajectoryTree tree_from_json(const Json& j) {
  require(j.is_object(), "tree document must be an object");
  const Json& nodes = field(j, "nodes");
  require(nodes.is_array() && !nodes.empty(), "nodes must be a nonempty array");

  const Json& root = nodes[0];
  require(field(root, "parent").is_null(), "node 0 must be the root (parent null)");
  require(field(root, "price").is_number(), "price must be a number");

  TrajectoryTree::Builder builder(field(root, "price").get<double>(),
                                  w_from_json(field(root, "w")));
  bool any_prob = root.contains("q_prob");
  if (any_prob) builder.set_step_probability(0, field(root, "q_prob").get<double>());

  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const Json& jn = nodes[i];
    require(jn.is_object(), "node entries must be objects");
    require(field(jn, "id").is_number_integer() &&
                field(jn, "id").get<std::size_t>() == i,
            "node ids must be dense and ascending from 0");
    const Json& jp = field(jn, "parent");
    require(jp.is_number_integer(), "parent must be an integer for non-root nodes");
    auto parent = jp.get<long long>();
    require(parent >= 0 && static_cast<std::size_t>(parent) < i,
            "parents must precede children");
    require(field(jn, "price").is_number(), "price must be a number");
    NodeId id = builder.add_child(static_cast<NodeId>(parent),
                                  field(jn, "price").get<double>(),
                                  w_from_json(field(jn, "w")));
    require(jn.contains("q_prob") == any_prob,
            "q_prob must be present on all nodes or none");
    if (any_prob) builder.set_step_probability(id, field(jn, "q_prob").get<double>());
  }

  TrajectoryTree tree = builder.build();
  if (j.contains("s0"))
    require(j["s0"].get<double>() == tree.root_price(), "s0 disagrees with node 0");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Json& jt = field(nodes[i], "terminal");
    require(jt.is_boolean(), "terminal must be a boolean");
    require(jt.get<bool>() == tree.node(static_cast<NodeId>(i)).terminal,
            "terminal flag disagrees with the children lists at node " + std::to_string(i));
  }
  return tree;
}

Json portfolio_to_json(const TrajectoryTree& tree, const Portfolio& p) {
  Json out;
  out["v0"] = p.v0();
  Json holdings = Json::object();
  for (NodeId id = 0; id < static_cast<NodeId>(tree.size()); ++id)
    if (p.holding(id) != 0.0) holdings[std::to_string(id)] = p.holding(id);
  out["holdings"] = std::move(holdings);

  Json horizon;
  switch (p.horizon().kind()) {
    case Horizon::Kind::terminal:
      horizon["kind"] = "terminal";
      break;
    case Horizon::Kind::fixed:
      horizon["kind"] = "fixed";
      horizon["depth"] = p.horizon().fixed_depth();
      break;
    case Horizon::Kind::stops: {
      horizon["kind"] = "nodes";
      Json arr = Json::array();
      for (NodeId id : p.horizon().stopping_time().frontier(tree)) arr.push_back(id);
      horizon["nodes"] = std::move(arr);
      break;
    }
  }
  out["horizon"] = std::move(horizon);
  out["liquidated"] = p.liquidated();
  return out;
}

Portfolio portfolio_from_json(const TrajectoryTree& tree, const Json& j) {
  require(j.is_object(), "portfolio document must be an object");
  double v0 = field(j, "v0").get<double>();

  Horizon horizon = Horizon::terminal();
  if (j.contains("horizon")) {
    const Json& jh = j["horizon"];
    std::string kind = field(jh, "kind").get<std::string>();
    if (kind == "terminal") {
      horizon = Horizon::terminal();
    } else if (kind == "fixed") {
      horizon = Horizon::fixed(field(jh, "depth").get<int>());
    } else if (kind == "nodes") {
      std::vector<NodeId> ids;
      for (const Json& v : field(jh, "nodes")) {
        require(v.is_number_integer(), "horizon nodes must be integers");
        auto id = v.get<long long>();
        require(id >= 0 && static_cast<std::size_t>(id) < tree.size(),
                "horizon node out of range");
        ids.push_back(static_cast<NodeId>(id));
      }
      horizon = Horizon::stops(StoppingTime::at_nodes(ids));
    } else {
      raise(Errc::invalid_input, "unknown horizon kind '" + kind + "'");
    }
  }

  bool liquidated = j.contains("liquidated") && j["liquidated"].get<bool>();
  Portfolio p(tree, v0, horizon, liquidated);
  if (j.contains("holdings")) {
    require(j["holdings"].is_object(), "holdings must be an object keyed by node id");
    for (auto it = j["holdings"].begin(); it != j["holdings"].end(); ++it) {
      std::size_t pos = 0;
      unsigned long id = 0;
      try {
        id = std::stoul(it.key(), &pos);
      } catch (const std::exception&) {
        raise(Errc::invalid_input, "holding key '" + it.key() + "' is not a node id");
      }
      require(pos == it.key().size() && id < tree.size(),
              "holding key '" + it.key() + "' is not a node id");
      p.set_holding(static_cast<NodeId>(id), it.value().get<double>());
    }
  }
  return p;
}

Json classification_to_json(const TreeClassification& c) {
  Json out;
  out["up_down"] = c.up_down;
  out["flat"] = c.flat;
  out["arbitrage"] = c.arbitrage;
  out["not_zero_neutral"] = c.not_zero_neutral;
  out["locally_zero_neutral"] = c.locally_zero_neutral;
  out["locally_arbitrage_free"] = c.locally_arbitrage_free;
  out["m_hat"] = c.m_hat;
  Json arr = Json::array();
  for (const auto& cls : c.classes)
    arr.push_back(cls ? Json(node_class_name(*cls)) : Json(nullptr));
  out["classes"] = std::move(arr);
  return out;
}

Json bounds_report_to_json(const PriceBounds& b, const AttainabilityReport* att) {
  Json out;
  out["lower"] = finite_or_tag(b.lower);
  out["upper"] = finite_or_tag(b.upper);
  out["anchor"] = b.anchor;
  out["anchor_depth"] = b.anchor_depth;
  if (att != nullptr) {
    Json ja;
    ja["eps_up"] = att->eps_up;
    ja["eps_down"] = att->eps_down;
    ja["attainable"] = att->attainable;
    ja["point_price"] = att->point_price ? Json(*att->point_price) : Json(nullptr);
    ja["tolerance"] = att->tolerance;
    ja["interval_bound_applicable"] = att->interval_bound_applicable;
    ja["interval_bound_holds"] = att->interval_bound_holds;
    out["attainability"] = std::move(ja);
  }
  return out;
}

Json contrarian_to_json(const ContrarianResult& r) {
  Json out;
  out["path"] = r.path;
  out["start_depth"] = r.start_depth;
  out["achieved_gain"] = r.achieved_gain;
  out["step_gains"] = r.step_gains;
  return out;
}

Json arbitrage_result_to_json(const TrajectoryTree& tree, const ArbitrageSearchResult& r) {
  Json out;
  switch (r.outcome) {
    case ArbitrageSearchResult::Outcome::found:
      out["outcome"] = "found";
      break;
    case ArbitrageSearchResult::Outcome::none:
      out["outcome"] = "none";
      break;
    case ArbitrageSearchResult::Outcome::unknown:
      out["outcome"] = "unknown";
      break;
  }
  if (!r.note.empty()) out["note"] = r.note;
  if (r.strategy) out["strategy"] = portfolio_to_json(tree, *r.strategy);
  return out;
}

Json merton_report_to_json(const MertonReport& r) {
  Json out;
  out["s0"] = r.s0;
  out["strike"] = r.strike;
  out["intrinsic"] = r.intrinsic;
  out["lower"] = finite_or_tag(r.lower);
  out["upper"] = finite_or_tag(r.upper);
  out["lower_dominates_intrinsic"] = r.lower_dominates_intrinsic;
  out["upper_within_stock"] = r.upper_within_stock;
  out["has_constant_trajectory"] = r.has_constant_trajectory;
  out["lower_equals_intrinsic"] = r.lower_equals_intrinsic;
  return out;
}

GridConfig grid_config_from_json(const Json& j) {
  require(j.is_object(), "grid config must be an object");
  GridConfig cfg;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const Json& v = it.value();
    if (key == "s0")
      cfg.s0 = v.get<double>();
    else if (key == "delta")
      cfg.delta = v.get<double>();
    else if (key == "beta")
      cfg.beta = v.get<double>();
    else if (key == "p")
      cfg.p = v.get<int>();
    else if (key == "c")
      cfg.c = v.get<double>();
    else if (key == "N1")
      cfg.N1 = v.get<int>();
    else if (key == "N2")
      cfg.N2 = v.get<int>();
    else if (key == "Lambda") {
      require(v.is_array(), "Lambda must be an array of integers");
      for (const Json& n : v) {
        require(n.is_number_integer(), "Lambda must be an array of integers");
        cfg.Lambda.insert(n.get<int>());
      }
    } else {
      raise(Errc::invalid_input, "unknown grid config field '" + key + "'");
    }
  }
  return cfg;
}

GridConfig grid_config_from_toml(const std::string& text) {
  Json j = Json::object();
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto eq = line.find('=');
    require(eq != std::string::npos,
            "line " + std::to_string(lineno) + ": expected key = value");
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    require(!key.empty() && !val.empty(),
            "line " + std::to_string(lineno) + ": expected key = value");
    try {
      // Values are numbers or integer arrays, all valid JSON.
      j[key] = Json::parse(val);
    } catch (const Json::parse_error&) {
      raise(Errc::invalid_input,
            "line " + std::to_string(lineno) + ": cannot parse value '" + val + "'");
    }
  }
  return grid_config_from_json(j);
}

GridConfig load_grid_config(const std::string& file_path) {
  std::ifstream in(file_path);
  if (!in) raise(Errc::invalid_input, "cannot open config file " + file_path);
  std::stringstream buf;
  buf << in.rdbuf();
  if (file_path.size() >= 5 && file_path.substr(file_path.size() - 5) == ".toml")
    return grid_config_from_toml(buf.str());
  try {
    return grid_config_from_json(Json::parse(buf.str()));
  } catch (const Json::parse_error& e) {
    raise(Errc::invalid_input, std::string("config parse error: ") + e.what());
  }
}

Json grid_config_to_json(const GridConfig& cfg) {
  Json out;
  out["s0"] = cfg.s0;
  out["delta"] = cfg.delta;
  out["beta"] = cfg.beta;
  out["p"] = cfg.p;
  out["c"] = cfg.c;
  out["N1"] = cfg.N1;
  out["N2"] = cfg.N2;
  out["Lambda"] = cfg.Lambda;
  return out;
}

MartingaleSamplerConfig martingale_config_from_json(const Json& j) {
  require(j.is_object(), "sampler config must be an object");
  MartingaleSamplerConfig cfg;
  if (j.contains("model")) {
    const Json& jm = j["model"];
    std::string kind = field(jm, "kind").get<std::string>();
    if (kind == "binomial")
      cfg.model.kind = MartingaleModel::Kind::binomial;
    else if (kind == "trinomial")
      cfg.model.kind = MartingaleModel::Kind::trinomial;
    else if (kind == "additive")
      cfg.model.kind = MartingaleModel::Kind::additive;
    else
      raise(Errc::invalid_input, "unknown model kind '" + kind + "'");
    if (jm.contains("s0")) cfg.model.s0 = jm["s0"].get<double>();
    if (jm.contains("u")) cfg.model.u = jm["u"].get<double>();
    if (jm.contains("d")) cfg.model.d = jm["d"].get<double>();
    if (jm.contains("qu")) cfg.model.qu = jm["qu"].get<double>();
    if (jm.contains("sigma")) cfg.model.sigma = jm["sigma"].get<double>();
  }
  if (j.contains("t_steps")) cfg.t_steps = j["t_steps"].get<int>();
  if (j.contains("sampling")) {
    const Json& js = j["sampling"];
    std::string kind = field(js, "kind").get<std::string>();
    if (kind == "every_step")
      cfg.sampling.kind = SamplingTimes::Kind::every_step;
    else if (kind == "every_m")
      cfg.sampling.kind = SamplingTimes::Kind::every_m;
    else if (kind == "level_grid")
      cfg.sampling.kind = SamplingTimes::Kind::level_grid;
    else
      raise(Errc::invalid_input, "unknown sampling kind '" + kind + "'");
    if (js.contains("m")) cfg.sampling.m = js["m"].get<int>();
    if (js.contains("level")) cfg.sampling.level = js["level"].get<double>();
  }
  if (j.contains("n_paths")) cfg.n_paths = j["n_paths"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("exhaustive")) cfg.exhaustive = j["exhaustive"].get<bool>();
  return cfg;
}

ChartSeries chart_from_csv(const std::string& text) {
  ChartSeries series;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    require(!cells.empty() && cells.size() <= 2,
            "line " + std::to_string(lineno) + ": expected 1 or 2 columns");

    auto parse = [&](const std::string& s, double* out) {
      try {
        std::size_t pos = 0;
        *out = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        return pos == s.size();
      } catch (const std::exception&) {
        return false;
      }
    };

    double t = 0.0, v = 0.0;
    bool ok = cells.size() == 2 ? parse(cells[0], &t) && parse(cells[1], &v)
                                : parse(cells[0], &v);
    if (!ok) {
      if (first) {  // header row
        first = false;
        continue;
      }
      raise(Errc::invalid_input, "line " + std::to_string(lineno) + ": not numeric");
    }
    first = false;
    series.timestamps.push_back(cells.size() == 2
                                    ? t
                                    : static_cast<double>(series.values.size()));
    series.values.push_back(v);
  }
  if (series.values.empty()) raise(Errc::empty_chart, "no observations in CSV");
  return series;
}

}  // namespace trajpace
