#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ggae/types.hpp"

namespace ggae {

// One exporter -> importer observation. Numeric fields are empty when the
// source cell was blank or unparseable.
struct TradeRecord {
  std::string exporter;
  std::string importer;
  std::optional<Scalar> gdp_exporter;  // current USD
  std::optional<Scalar> gdp_importer;  // current USD
  std::optional<Scalar> distance;      // km
  std::optional<Scalar> flow;          // USD trade value
  std::optional<int> year;             // used to pick the newest duplicate row
};

// Column-name bindings for a CEPII-style CSV.
struct CsvSchema {
  std::string exporter = "iso3_o";
  std::string importer = "iso3_d";
  std::string gdp_exporter = "gdp_o";
  std::string gdp_importer = "gdp_d";
  std::string distance = "dist";
  std::string flow = "tradeflow";
  // Reverse-reported flow (imports); used only when the primary flow cell is
  // missing. Empty = no such column.
  std::string flow_mirror;
  // Tolerated missing from the header.
  std::string year = "year";
};

// Country graph with log-scale features. Nodes are sorted country codes;
// edges are directed and sorted by (src, dst); indices are dense 0..|V|-1.
struct TradeGraph {
  std::vector<std::string> nodes;
  Mat node_features;  // |V| x 1, log GDP
  std::vector<std::pair<int, int>> edges;
  Vec edge_log_distance;
  Vec edge_log_flow;

  Index num_nodes() const { return static_cast<Index>(nodes.size()); }
  Index num_edges() const { return static_cast<Index>(edges.size()); }
};

struct EdgeSplit {
  std::vector<int> train_edges;
  std::vector<int> test_edges;
  std::uint64_t seed = 0;
};

struct ScatterPoint {
  Scalar gravity_term;  // log gdp_u + log gdp_v - log dist
  Scalar log_flow;
};

// Per-reason drop counts from filter_complete; a record lands in the first
// category (in field order) it fails.
struct FilterStats {
  std::size_t input = 0;
  std::size_t kept = 0;
  std::size_t self_pair = 0;
  std::size_t bad_gdp_exporter = 0;  // missing or nonpositive
  std::size_t bad_gdp_importer = 0;
  std::size_t bad_distance = 0;
  std::size_t bad_flow = 0;
};

// Natural log; DomainError for x <= 0.
Scalar log_transform(Scalar x);

// Parses a CEPII-style CSV with a header row into one record per data row.
// Unparseable numeric cells become missing values, not errors. SchemaError
// names any required column absent from the header; EmptyInputError for an
// input with no bytes.
std::vector<TradeRecord> parse_gravity_csv(std::istream& source, const CsvSchema& schema = {});

// Keeps records with distinct endpoints whose GDPs, distance and flow are all
// present and strictly positive. Order preserved; empty output is legal.
std::vector<TradeRecord> filter_complete(const std::vector<TradeRecord>& records,
                                         FilterStats* stats = nullptr);

// Builds the graph from complete records: node feature = log GDP, edge
// features = log distance / log flow. Duplicate (exporter, importer) rows and
// conflicting GDP observations resolve to the latest year (last row on ties);
// EmptyGraphError when no records are given.
TradeGraph build_graph(const std::vector<TradeRecord>& records);

// Seeded uniform permutation split. Train side takes round(ratio * |E|)
// edges, clamped so both sides stay non-empty. ConfigError for a ratio
// outside (0,1); ContractError for graphs with fewer than 2 edges.
EdgeSplit split_edges(const TradeGraph& graph, Scalar train_ratio, std::uint64_t seed);

// One row per edge, in edge order.
std::vector<ScatterPoint> emit_loglog_scatter(const TradeGraph& graph);

}  // namespace ggae
