// Command-line front end: ingest a gravity-style CSV into a canonical graph
// file, train the encoder/decoder patterns on it, reproduce the five-pattern
// RMSE table, and emit the log-log scatter data.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ggae/dataset.hpp"
#include "ggae/experiment.hpp"
#include "ggae/io.hpp"
#include "ggae/types.hpp"

namespace {

using ggae::Scalar;

struct IngestArgs {
  std::string input;
  std::string output;
  std::vector<std::string> schema_overrides;
};

struct ScatterArgs {
  std::string graph;
  std::string out;
};

struct TrainArgs {
  std::string graph;
  std::string pattern = "P1";
  int runs = 1;
  std::uint64_t base_seed = 1;
  int epochs = 1000;
  Scalar learning_rate = 0.01;
  Scalar train_ratio = 0.66;
  int hidden_dim = 16;
  bool propagate_all_edges = false;
  std::string out;
};

struct TableArgs {
  std::string graph;
  int runs = 10;
  std::uint64_t base_seed = 1;
  int epochs = 1000;
  Scalar learning_rate = 0.01;
  Scalar train_ratio = 0.66;
  int hidden_dim = 16;
  bool propagate_all_edges = false;
  std::string out;
};

struct SynthArgs {
  int nodes = 100;
  Scalar density = 0.3;
  Scalar sigma = 0.5;
  std::uint64_t seed = 1;
  std::string output;
};

ggae::CsvSchema resolve_schema(const std::vector<std::string>& overrides) {
  ggae::CsvSchema schema;
  std::map<std::string, std::string*> roles{
      {"exporter", &schema.exporter},         {"importer", &schema.importer},
      {"gdp_exporter", &schema.gdp_exporter}, {"gdp_importer", &schema.gdp_importer},
      {"distance", &schema.distance},         {"flow", &schema.flow},
      {"flow_mirror", &schema.flow_mirror},   {"year", &schema.year}};
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ggae::ConfigError("--schema expects role=column, got '" + kv + "'");
    }
    const std::string role = kv.substr(0, eq);
    const auto it = roles.find(role);
    if (it == roles.end()) {
      std::string known;
      for (const auto& [name, _] : roles) known += (known.empty() ? "" : ", ") + name;
      throw ggae::ConfigError("--schema role '" + role + "' unknown; expected one of " + known);
    }
    *it->second = kv.substr(eq + 1);
  }
  return schema;
}

void echo_schema(const ggae::CsvSchema& s) {
  std::cout << "schema: exporter=" << s.exporter << " importer=" << s.importer
            << " gdp_exporter=" << s.gdp_exporter << " gdp_importer=" << s.gdp_importer
            << " distance=" << s.distance << " flow=" << s.flow;
  if (!s.flow_mirror.empty()) std::cout << " flow_mirror=" << s.flow_mirror;
  if (!s.year.empty()) std::cout << " year=" << s.year;
  std::cout << "\n";
}

int run_ingest(const IngestArgs& args) {
  const ggae::CsvSchema schema = resolve_schema(args.schema_overrides);
  echo_schema(schema);

  std::ifstream in(args.input, std::ios::binary);
  if (!in) {
    throw ggae::IoError("cannot open '" + args.input + "' for reading");
  }
  const std::vector<ggae::TradeRecord> records = ggae::parse_gravity_csv(in, schema);
  ggae::FilterStats stats;
  const std::vector<ggae::TradeRecord> complete = ggae::filter_complete(records, &stats);
  const ggae::TradeGraph graph = ggae::build_graph(complete);
  ggae::write_graph_json(graph, args.output);

  std::cout << "records: " << stats.input << " read, " << stats.kept << " kept\n"
            << "dropped: self_pair=" << stats.self_pair
            << " gdp_exporter=" << stats.bad_gdp_exporter
            << " gdp_importer=" << stats.bad_gdp_importer << " distance=" << stats.bad_distance
            << " flow=" << stats.bad_flow << "\n"
            << "nodes: " << graph.num_nodes() << "\n"
            << "edges: " << graph.num_edges() << "\n"
            << "wrote " << args.output << "\n";
  return 0;
}

int run_scatter(const ScatterArgs& args) {
  const ggae::TradeGraph graph = ggae::read_graph_json(args.graph);
  const std::vector<ggae::ScatterPoint> points = ggae::emit_loglog_scatter(graph);
  ggae::write_scatter_csv(points, args.out);
  std::cout << "rows: " << points.size() << "\n"
            << "wrote " << args.out << "\n";
  return 0;
}

ggae::ModelConfig to_config(Scalar lr, int epochs, Scalar ratio, int hidden,
                            bool propagate_all_edges) {
  ggae::ModelConfig config;
  config.learning_rate = lr;
  config.epochs = epochs;
  config.train_ratio = ratio;
  config.hidden_dim = hidden;
  config.propagate_train_edges_only = !propagate_all_edges;
  return config;
}

int run_train(const TrainArgs& args) {
  ggae::ModelConfig config = to_config(args.learning_rate, args.epochs, args.train_ratio,
                                        args.hidden_dim, args.propagate_all_edges);
  config.pattern = ggae::parse_pattern(args.pattern);
  const ggae::TradeGraph graph = ggae::read_graph_json(args.graph);

  const ggae::RunReport report =
      ggae::run_experiment(graph, config, args.runs, args.base_seed);
  nlohmann::json j = ggae::report_to_json(report);
  std::cout << j.dump(2) << "\n";
  if (!args.out.empty()) {
    j["generated_at"] = ggae::iso8601_utc_now();
    ggae::write_text_file(args.out, j.dump(2) + "\n");
    std::cout << "wrote " << args.out << "\n";
  }
  return 0;
}

std::string text_table_path(const std::string& json_path) {
  const std::string suffix = ".json";
  if (json_path.size() > suffix.size() &&
      json_path.compare(json_path.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return json_path.substr(0, json_path.size() - suffix.size()) + ".txt";
  }
  return json_path + ".txt";
}

int run_table(const TableArgs& args) {
  const ggae::ModelConfig base = to_config(args.learning_rate, args.epochs, args.train_ratio,
                                           args.hidden_dim, args.propagate_all_edges);
  const ggae::TradeGraph graph = ggae::read_graph_json(args.graph);

  // Divergences are recorded per run rather than aborting the table; the
  // exit code still reports them.
  const std::vector<ggae::RunReport> table = ggae::reproduce_table(
      graph, base, args.runs, args.base_seed, ggae::DivergencePolicy::kRecord);

  nlohmann::json j = ggae::table_to_json(table);
  j["generated_at"] = ggae::iso8601_utc_now();
  ggae::write_text_file(args.out, j.dump(2) + "\n");
  const std::string text = ggae::table_to_text(table);
  ggae::write_text_file(text_table_path(args.out), text);

  std::cout << "learning_rate=" << args.learning_rate << " epochs=" << args.epochs
            << " train_ratio=" << args.train_ratio << " hidden_dim=" << args.hidden_dim
            << " runs=" << args.runs << " base_seed=" << args.base_seed << "\n"
            << text << "wrote " << args.out << "\n"
            << "wrote " << text_table_path(args.out) << "\n";

  int diverged = 0;
  for (const ggae::RunReport& report : table) {
    for (const ggae::RunStats& stats : report.per_run) diverged += stats.diverged ? 1 : 0;
  }
  if (diverged > 0) {
    std::cerr << "error: " << diverged << " run(s) diverged; see report\n";
    return 3;
  }
  return 0;
}

int run_synth(const SynthArgs& args) {
  const ggae::TradeGraph graph =
      ggae::generate_synthetic_gravity(args.nodes, args.density, args.sigma, args.seed);
  ggae::write_graph_json(graph, args.output);
  std::cout << "nodes: " << graph.num_nodes() << "\n"
            << "edges: " << graph.num_edges() << "\n"
            << "density=" << args.density << " sigma=" << args.sigma << " seed=" << args.seed
            << "\n"
            << "wrote " << args.output << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trade-flow prediction on a country graph: gravity baseline, GCN encoders, "
               "and gravity-informed graph autoencoder decoders."};
  app.require_subcommand(1);

  IngestArgs ingest;
  CLI::App* cmd_ingest = app.add_subcommand("ingest", "Convert a gravity-style CSV to a graph file");
  cmd_ingest->add_option("--input", ingest.input, "CSV with bilateral flows, GDPs, distances")
      ->required();
  cmd_ingest->add_option("--output", ingest.output, "graph JSON to write")->required();
  cmd_ingest->add_option("--schema", ingest.schema_overrides,
                         "role=column mapping override (roles: exporter, importer, gdp_exporter, "
                         "gdp_importer, distance, flow, flow_mirror, year)");

  ScatterArgs scatter;
  CLI::App* cmd_scatter = app.add_subcommand("scatter", "Emit log-log scatter data (gravity term vs flow)");
  cmd_scatter->add_option("--graph", scatter.graph, "graph JSON")->required();
  cmd_scatter->add_option("--out", scatter.out, "CSV to write")->required();

  TrainArgs train;
  CLI::App* cmd_train = app.add_subcommand("train", "Train one pattern and report RMSE");
  cmd_train->add_option("--graph", train.graph, "graph JSON")->required();
  cmd_train->add_option("--pattern", train.pattern, "P1..P5 (default P1)");
  cmd_train->add_option("--runs", train.runs, "number of seeded runs (default 1)");
  cmd_train->add_option("--base-seed", train.base_seed, "seed of run 0 (default 1)");
  cmd_train->add_option("--epochs", train.epochs, "training epochs (default 1000)");
  cmd_train->add_option("--lr", train.learning_rate, "Adam learning rate (default 0.01)");
  cmd_train->add_option("--train-ratio", train.train_ratio, "train split fraction (default 0.66)");
  cmd_train->add_option("--hidden-dim", train.hidden_dim, "GCN embedding width (default 16)");
  cmd_train->add_flag("--propagate-all-edges", train.propagate_all_edges,
                      "let test edges participate in message passing");
  cmd_train->add_option("--out", train.out, "report JSON to write (optional)");

  TableArgs table;
  CLI::App* cmd_table =
      app.add_subcommand("reproduce-table", "Run all five patterns and tabulate RMSE statistics");
  cmd_table->add_option("--graph", table.graph, "graph JSON")->required();
  cmd_table->add_option("--runs", table.runs, "runs per pattern (default 10)");
  cmd_table->add_option("--base-seed", table.base_seed, "seed of run 0 (default 1)");
  cmd_table->add_option("--epochs", table.epochs, "training epochs (default 1000)");
  cmd_table->add_option("--lr", table.learning_rate, "Adam learning rate (default 0.01)");
  cmd_table->add_option("--train-ratio", table.train_ratio, "train split fraction (default 0.66)");
  cmd_table->add_option("--hidden-dim", table.hidden_dim, "GCN embedding width (default 16)");
  cmd_table->add_flag("--propagate-all-edges", table.propagate_all_edges,
                      "let test edges participate in message passing");
  cmd_table->add_option("--out", table.out, "report JSON to write")->required();

  SynthArgs synth;
  CLI::App* cmd_synth =
      app.add_subcommand("synth", "Generate a synthetic gravity graph for testing");
  cmd_synth->add_option("--nodes", synth.nodes, "country count (default 100)");
  cmd_synth->add_option("--density", synth.density, "directed edge probability (default 0.3)");
  cmd_synth->add_option("--sigma", synth.sigma, "log-flow noise stddev (default 0.5)");
  cmd_synth->add_option("--seed", synth.seed, "generator seed (default 1)");
  cmd_synth->add_option("--output", synth.output, "graph JSON to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cmd_ingest->parsed()) return run_ingest(ingest);
    if (cmd_scatter->parsed()) return run_scatter(scatter);
    if (cmd_train->parsed()) return run_train(train);
    if (cmd_table->parsed()) return run_table(table);
    if (cmd_synth->parsed()) return run_synth(synth);
  } catch (const ggae::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ggae::DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ggae::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
