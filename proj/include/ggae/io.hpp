#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "ggae/dataset.hpp"
#include "ggae/experiment.hpp"

namespace ggae {

// Canonical graph file: {"nodes":[{"code","log_gdp"}...],
// "edges":[{"src","dst","log_dist","log_flow"}...]} with src/dst indexing
// into the nodes array. Key order is alphabetical and no timestamp is
// written, so identical graphs serialize byte-identically.
nlohmann::json graph_to_json(const TradeGraph& graph);
TradeGraph graph_from_json(const nlohmann::json& j);
void write_graph_json(const TradeGraph& graph, const std::string& path);
TradeGraph read_graph_json(const std::string& path);

// Two-column CSV "gravity_term,log_flow", one row per edge, 9 significant
// digits.
void write_scatter_csv(const std::vector<ScatterPoint>& points, const std::string& path);

nlohmann::json report_to_json(const RunReport& report);
nlohmann::json table_to_json(const std::vector<RunReport>& table);

// Aligned text table, one row per pattern with its RMSE statistics.
std::string table_to_text(const std::vector<RunReport>& table);

std::string iso8601_utc_now();

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace ggae
