#pragma once

#include <string>

#include <json.hpp>

#include "trajpace/analysis.hpp"
#include "trajpace/generators.hpp"
#include "trajpace/market.hpp"
#include "trajpace/pricing.hpp"
#include "trajpace/tree.hpp"

namespace trajpace {

using Json = nlohmann::ordered_json;

// Tree interchange form:
//   {"s0": number, "w0": value,
//    "nodes": [{"id": int, "parent": int|null, "price": number,
//               "w": value, "terminal": bool}, ...]}
// ids are dense from 0, parents precede children, terminal <=> childless.
// W values serialize as JSON integers, numbers, or strings matching their
// exact in-memory type.  Nodes may carry an optional "q_prob" number.
Json tree_to_json(const TrajectoryTree& tree);

// Validates shape and invariants before construction.  Error: invalid_input.
TrajectoryTree tree_from_json(const Json& j);

// {"v0": number, "holdings": {"<node id>": number, ...},
//  "horizon": {"kind": "terminal"} | {"kind": "fixed", "depth": int}
//           | {"kind": "nodes", "nodes": [int, ...]},
//  "liquidated": bool}
// Stopping-time horizons built from predicates serialize through their
// frontier on the tree.
Json portfolio_to_json(const TrajectoryTree& tree, const Portfolio& p);
Portfolio portfolio_from_json(const TrajectoryTree& tree, const Json& j);

Json classification_to_json(const TreeClassification& c);

// {"lower": number|"-inf"|"+inf", "upper": ..., "anchor": int,
//  "attainable": bool, "eps_up": number, "eps_down": number}
Json bounds_report_to_json(const PriceBounds& b, const AttainabilityReport* att = nullptr);

Json contrarian_to_json(const ContrarianResult& r);
Json arbitrage_result_to_json(const TrajectoryTree& tree, const ArbitrageSearchResult& r);
Json merton_report_to_json(const MertonReport& r);

// GridConfig from JSON or minimal flat TOML (key = value, integer arrays)
// with exactly the documented field names.
GridConfig grid_config_from_json(const Json& j);
GridConfig grid_config_from_toml(const std::string& text);
GridConfig load_grid_config(const std::string& file_path);
Json grid_config_to_json(const GridConfig& cfg);

MartingaleSamplerConfig martingale_config_from_json(const Json& j);

// Two-column CSV (timestamp, value); a non-numeric first line is a header.
ChartSeries chart_from_csv(const std::string& text);

}  // namespace trajpace
