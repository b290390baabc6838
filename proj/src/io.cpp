#include "ggae/io.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ggae {

namespace {

using nlohmann::json;

std::string hex64(std::uint64_t value) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(value));
  return buf;
}

const json& require_field(const json& j, const char* key, const char* where) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw SchemaError(std::string(where) + ": missing field '" + key + "'");
  }
  return *it;
}

Scalar require_number(const json& j, const char* key, const char* where) {
  const json& field = require_field(j, key, where);
  if (!field.is_number()) {
    throw SchemaError(std::string(where) + ": field '" + key + "' must be a number");
  }
  return field.get<Scalar>();
}

}  // namespace

json graph_to_json(const TradeGraph& graph) {
  json nodes = json::array();
  for (Index i = 0; i < graph.num_nodes(); ++i) {
    nodes.push_back({{"code", graph.nodes[static_cast<std::size_t>(i)]},
                     {"log_gdp", graph.node_features(i, 0)}});
  }
  json edges = json::array();
  for (Index e = 0; e < graph.num_edges(); ++e) {
    const auto& [src, dst] = graph.edges[static_cast<std::size_t>(e)];
    edges.push_back({{"src", src},
                     {"dst", dst},
                     {"log_dist", graph.edge_log_distance(e)},
                     {"log_flow", graph.edge_log_flow(e)}});
  }
  return json{{"nodes", nodes}, {"edges", edges}};
}

TradeGraph graph_from_json(const json& j) {
  const json& nodes = require_field(j, "nodes", "graph");
  const json& edges = require_field(j, "edges", "graph");
  if (!nodes.is_array() || !edges.is_array()) {
    throw SchemaError("graph: 'nodes' and 'edges' must be arrays");
  }

  TradeGraph graph;
  graph.nodes.reserve(nodes.size());
  graph.node_features = Mat(static_cast<Index>(nodes.size()), 1);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const json& node = nodes[i];
    const json& code = require_field(node, "code", "graph node");
    if (!code.is_string()) {
      throw SchemaError("graph node: field 'code' must be a string");
    }
    graph.nodes.push_back(code.get<std::string>());
    graph.node_features(static_cast<Index>(i), 0) = require_number(node, "log_gdp", "graph node");
  }

  const auto n_nodes = static_cast<int>(nodes.size());
  graph.edges.reserve(edges.size());
  graph.edge_log_distance = Vec(static_cast<Index>(edges.size()));
  graph.edge_log_flow = Vec(static_cast<Index>(edges.size()));
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const json& edge = edges[e];
    const json& src_field = require_field(edge, "src", "graph edge");
    const json& dst_field = require_field(edge, "dst", "graph edge");
    if (!src_field.is_number_integer() || !dst_field.is_number_integer()) {
      throw SchemaError("graph edge: 'src' and 'dst' must be node indexes");
    }
    const int src = src_field.get<int>();
    const int dst = dst_field.get<int>();
    if (src < 0 || src >= n_nodes || dst < 0 || dst >= n_nodes) {
      throw SchemaError("graph edge " + std::to_string(e) + ": node index out of range");
    }
    graph.edges.emplace_back(src, dst);
    graph.edge_log_distance(static_cast<Index>(e)) = require_number(edge, "log_dist", "graph edge");
    graph.edge_log_flow(static_cast<Index>(e)) = require_number(edge, "log_flow", "graph edge");
  }
  return graph;
}

void write_graph_json(const TradeGraph& graph, const std::string& path) {
  write_text_file(path, graph_to_json(graph).dump(2) + "\n");
}

TradeGraph read_graph_json(const std::string& path) {
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& err) {
    throw SchemaError(path + ": not valid JSON: " + err.what());
  }
  try {
    return graph_from_json(j);
  } catch (const SchemaError& err) {
    throw SchemaError(path + ": " + err.what());
  }
}

void write_scatter_csv(const std::vector<ScatterPoint>& points, const std::string& path) {
  std::ostringstream out;
  out << "gravity_term,log_flow\n";
  char buf[64];
  for (const ScatterPoint& p : points) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g\n", p.gravity_term, p.log_flow);
    out << buf;
  }
  write_text_file(path, out.str());
}

json report_to_json(const RunReport& report) {
  json per_run = json::array();
  for (const RunStats& stats : report.per_run) {
    per_run.push_back({{"seed", stats.seed},
                       {"train_rmse", stats.train_rmse},
                       {"test_rmse", stats.test_rmse},
                       {"final_loss", stats.final_loss},
                       {"epochs_run", stats.epochs_run},
                       {"diverged", stats.diverged},
                       {"divergence_epoch", stats.divergence_epoch}});
  }
  const ModelConfig& c = report.config;
  return json{
      {"config",
       {{"pattern", pattern_name(c.pattern)},
        {"model", pattern_description(c.pattern)},
        {"learning_rate", c.learning_rate},
        {"epochs", c.epochs},
        {"train_ratio", c.train_ratio},
        {"hidden_dim", c.hidden_dim},
        {"base_seed", c.seed},
        {"n_runs", report.n_runs},
        {"propagate_train_edges_only", c.propagate_train_edges_only}}},
      {"per_run", per_run},
      {"aggregate",
       {{"rmse_avg", report.aggregate.rmse_avg},
        {"rmse_max", report.aggregate.rmse_max},
        {"rmse_min", report.aggregate.rmse_min}}},
      {"config_hash", hex64(report.config_hash)},
      {"dataset_fingerprint", hex64(report.dataset_fingerprint)}};
}

json table_to_json(const std::vector<RunReport>& table) {
  json patterns = json::array();
  for (const RunReport& report : table) patterns.push_back(report_to_json(report));
  return json{{"patterns", patterns}};
}

std::string table_to_text(const std::vector<RunReport>& table) {
  std::ostringstream out;
  out << std::left << std::setw(9) << "pattern" << std::setw(12) << "node_feat" << std::setw(12)
      << "edge_feat" << std::setw(26) << "model" << std::right << std::setw(10) << "rmse_avg"
      << std::setw(10) << "rmse_max" << std::setw(10) << "rmse_min" << "\n";
  char buf[32];
  for (const RunReport& report : table) {
    out << std::left << std::setw(9) << pattern_name(report.config.pattern) << std::setw(12)
        << "log(gdp)" << std::setw(12) << "log(dist)" << std::setw(26)
        << pattern_description(report.config.pattern) << std::right;
    for (const Scalar v : {report.aggregate.rmse_avg, report.aggregate.rmse_max,
                           report.aggregate.rmse_min}) {
      std::snprintf(buf, sizeof(buf), "%10.3f", v);
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

std::string iso8601_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  out << content;
  if (!out) {
    throw IoError("write to '" + path + "' failed");
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path + "' for reading");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) {
    throw IoError("read from '" + path + "' failed");
  }
  return buffer.str();
}

}  // namespace ggae
