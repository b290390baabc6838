#include "ggae/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <sstream>

namespace ggae {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

// Splits one CSV line; double quotes guard embedded delimiters, "" escapes a
// quote. Embedded newlines inside quoted cells are not supported.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

std::optional<Scalar> parse_cell_real(const std::string& raw) {
  const std::string cell = trim(raw);
  if (cell.empty()) return std::nullopt;
  Scalar value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::optional<int> parse_cell_int(const std::string& raw) {
  const std::string cell = trim(raw);
  if (cell.empty()) return std::nullopt;
  int value = 0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  return value;
}

int find_column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (trim(header[i]) == name) return static_cast<int>(i);
  }
  return -1;
}

int require_column(const std::vector<std::string>& header, const std::string& name) {
  const int idx = find_column(header, name);
  if (idx < 0) {
    throw SchemaError("missing required column '" + name + "' in CSV header");
  }
  return idx;
}

std::string cell_at(const std::vector<std::string>& row, int idx) {
  if (idx < 0 || static_cast<std::size_t>(idx) >= row.size()) return {};
  return row[static_cast<std::size_t>(idx)];
}

bool positive(const std::optional<Scalar>& v) { return v.has_value() && *v > 0.0; }

// Missing year sorts before any real year; row order breaks ties so the last
// observation wins.
long year_rank(const std::optional<int>& year) {
  return year.has_value() ? static_cast<long>(*year)
                          : std::numeric_limits<long>::min();
}

}  // namespace

Scalar log_transform(Scalar x) {
  if (!(x > 0.0)) {
    std::ostringstream msg;
    msg << "log_transform: argument must be positive, got " << x;
    throw DomainError(msg.str());
  }
  return std::log(x);
}

std::vector<TradeRecord> parse_gravity_csv(std::istream& source, const CsvSchema& schema) {
  std::string header_line;
  if (!std::getline(source, header_line)) {
    throw EmptyInputError("empty input: no header row");
  }
  const std::vector<std::string> header = split_csv_line(header_line);

  const int col_exporter = require_column(header, schema.exporter);
  const int col_importer = require_column(header, schema.importer);
  const int col_gdp_exporter = require_column(header, schema.gdp_exporter);
  const int col_gdp_importer = require_column(header, schema.gdp_importer);
  const int col_distance = require_column(header, schema.distance);
  const int col_flow = require_column(header, schema.flow);
  const int col_flow_mirror =
      schema.flow_mirror.empty() ? -1 : require_column(header, schema.flow_mirror);
  const int col_year = schema.year.empty() ? -1 : find_column(header, schema.year);

  std::vector<TradeRecord> records;
  std::string line;
  while (std::getline(source, line)) {
    if (trim(line).empty()) continue;
    const std::vector<std::string> row = split_csv_line(line);
    TradeRecord record;
    record.exporter = trim(cell_at(row, col_exporter));
    record.importer = trim(cell_at(row, col_importer));
    record.gdp_exporter = parse_cell_real(cell_at(row, col_gdp_exporter));
    record.gdp_importer = parse_cell_real(cell_at(row, col_gdp_importer));
    record.distance = parse_cell_real(cell_at(row, col_distance));
    record.flow = parse_cell_real(cell_at(row, col_flow));
    if (!record.flow.has_value() && col_flow_mirror >= 0) {
      record.flow = parse_cell_real(cell_at(row, col_flow_mirror));
    }
    record.year = parse_cell_int(cell_at(row, col_year));
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<TradeRecord> filter_complete(const std::vector<TradeRecord>& records,
                                         FilterStats* stats) {
  FilterStats local;
  local.input = records.size();
  std::vector<TradeRecord> kept;
  kept.reserve(records.size());
  for (const TradeRecord& r : records) {
    if (r.exporter == r.importer) {
      local.self_pair += 1;
    } else if (!positive(r.gdp_exporter)) {
      local.bad_gdp_exporter += 1;
    } else if (!positive(r.gdp_importer)) {
      local.bad_gdp_importer += 1;
    } else if (!positive(r.distance)) {
      local.bad_distance += 1;
    } else if (!positive(r.flow)) {
      local.bad_flow += 1;
    } else {
      kept.push_back(r);
    }
  }
  local.kept = kept.size();
  if (stats != nullptr) *stats = local;
  return kept;
}

TradeGraph build_graph(const std::vector<TradeRecord>& records) {
  if (records.empty()) {
    throw EmptyGraphError("build_graph: no records; nothing to train on");
  }

  // Latest-year-wins resolution for both the per-country GDP observation and
  // the surviving row per directed pair.
  struct Pick {
    long rank;
    std::size_t row;
  };
  std::map<std::string, std::pair<Pick, Scalar>> gdp_by_country;
  std::map<std::pair<std::string, std::string>, std::pair<Pick, std::size_t>> row_by_pair;

  for (std::size_t i = 0; i < records.size(); ++i) {
    const TradeRecord& r = records[i];
    if (r.exporter == r.importer || !positive(r.gdp_exporter) || !positive(r.gdp_importer) ||
        !positive(r.distance) || !positive(r.flow)) {
      throw ContractError("build_graph: record " + std::to_string(i) +
                          " is incomplete; run filter_complete first");
    }
    const Pick pick{year_rank(r.year), i};
    const auto consider = [&](const std::string& country, Scalar gdp) {
      auto it = gdp_by_country.find(country);
      if (it == gdp_by_country.end() || pick.rank > it->second.first.rank ||
          (pick.rank == it->second.first.rank && pick.row >= it->second.first.row)) {
        gdp_by_country[country] = {pick, gdp};
      }
    };
    consider(r.exporter, *r.gdp_exporter);
    consider(r.importer, *r.gdp_importer);

    const auto key = std::make_pair(r.exporter, r.importer);
    auto it = row_by_pair.find(key);
    if (it == row_by_pair.end() || pick.rank > it->second.first.rank ||
        (pick.rank == it->second.first.rank && pick.row >= it->second.first.row)) {
      row_by_pair[key] = {pick, i};
    }
  }

  TradeGraph graph;
  graph.nodes.reserve(gdp_by_country.size());
  for (const auto& [country, _] : gdp_by_country) {
    graph.nodes.push_back(country);  // std::map iterates sorted
  }
  std::map<std::string, int> index_of;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    index_of[graph.nodes[i]] = static_cast<int>(i);
  }

  graph.node_features = Mat(graph.num_nodes(), 1);
  for (Index i = 0; i < graph.num_nodes(); ++i) {
    graph.node_features(i, 0) = log_transform(gdp_by_country[graph.nodes[i]].second);
  }

  // row_by_pair iterates by (exporter, importer) name order == index order,
  // since node indices follow the sorted codes.
  graph.edges.reserve(row_by_pair.size());
  std::vector<Scalar> log_dist, log_flow;
  for (const auto& [pair, pick] : row_by_pair) {
    const TradeRecord& r = records[pick.second];
    graph.edges.emplace_back(index_of[pair.first], index_of[pair.second]);
    log_dist.push_back(log_transform(*r.distance));
    log_flow.push_back(log_transform(*r.flow));
  }
  graph.edge_log_distance = Eigen::Map<const Vec>(log_dist.data(), static_cast<Index>(log_dist.size()));
  graph.edge_log_flow = Eigen::Map<const Vec>(log_flow.data(), static_cast<Index>(log_flow.size()));
  return graph;
}

EdgeSplit split_edges(const TradeGraph& graph, Scalar train_ratio, std::uint64_t seed) {
  if (!(train_ratio > 0.0) || !(train_ratio < 1.0)) {
    std::ostringstream msg;
    msg << "split_edges: train ratio must lie in (0,1), got " << train_ratio;
    throw ConfigError(msg.str());
  }
  const Index n_edges = graph.num_edges();
  if (n_edges < 2) {
    throw ContractError("split_edges: need at least 2 edges to split");
  }

  std::vector<int> order(static_cast<std::size_t>(n_edges));
  for (Index i = 0; i < n_edges; ++i) order[static_cast<std::size_t>(i)] = static_cast<int>(i);
  Rng rng(seed);
  rng.shuffle(order);

  auto n_train = static_cast<Index>(std::llround(train_ratio * static_cast<Scalar>(n_edges)));
  n_train = std::clamp<Index>(n_train, 1, n_edges - 1);

  EdgeSplit split;
  split.seed = seed;
  split.train_edges.assign(order.begin(), order.begin() + n_train);
  split.test_edges.assign(order.begin() + n_train, order.end());
  std::sort(split.train_edges.begin(), split.train_edges.end());
  std::sort(split.test_edges.begin(), split.test_edges.end());
  return split;
}

std::vector<ScatterPoint> emit_loglog_scatter(const TradeGraph& graph) {
  if (graph.num_edges() == 0) {
    throw EmptyGraphError("emit_loglog_scatter: graph has no edges");
  }
  std::vector<ScatterPoint> points;
  points.reserve(graph.edges.size());
  for (Index e = 0; e < graph.num_edges(); ++e) {
    const auto [u, v] = graph.edges[static_cast<std::size_t>(e)];
    ScatterPoint p;
    p.gravity_term =
        graph.node_features(u, 0) + graph.node_features(v, 0) - graph.edge_log_distance(e);
    p.log_flow = graph.edge_log_flow(e);
    points.push_back(p);
  }
  return points;
}

}  // namespace ggae
