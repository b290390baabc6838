#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "json.hpp"

#include "ggae/io.hpp"
#include "testing_util.hpp"

using namespace ggae;

namespace {

const std::string kFixtures = GGAE_FIXTURE_DIR;
const std::string kCli = GGAE_CLI_PATH;

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

CmdResult run_cli(const testutil::TempDir& dir, const std::string& args) {
  static int counter = 0;
  const std::string out_path = dir.file("cmd_out_" + std::to_string(counter));
  const std::string err_path = dir.file("cmd_err_" + std::to_string(counter));
  ++counter;
  const std::string command = kCli + " " + args + " >" + out_path + " 2>" + err_path;
  const int status = std::system(command.c_str());
  CmdResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = testutil::slurp(out_path);
  result.err = testutil::slurp(err_path);
  return result;
}

std::string make_synth_graph(const testutil::TempDir& dir, const std::string& name,
                             const std::string& params) {
  const std::string path = dir.file(name);
  const CmdResult r = run_cli(dir, "synth " + params + " --output " + path);
  REQUIRE(r.exit_code == 0);
  return path;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("ingest summarizes its work") {
  testutil::TempDir dir("ggae_cli");
  const std::string graph_path = dir.file("graph.json");
  const CmdResult r =
      run_cli(dir, "ingest --input " + kFixtures + "/trade_small.csv --output " + graph_path);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("records: 10 read, 7 kept") != std::string::npos);
  CHECK(r.out.find("gdp_importer=1") != std::string::npos);
  CHECK(r.out.find("distance=1") != std::string::npos);
  CHECK(r.out.find("flow=1") != std::string::npos);
  CHECK(r.out.find("nodes: 9") != std::string::npos);
  CHECK(r.out.find("edges: 7") != std::string::npos);

  const TradeGraph graph = read_graph_json(graph_path);
  CHECK(graph.num_nodes() == 9);
  CHECK(graph.num_edges() == 7);
}

TEST_CASE("ingest of an empty file is a data error") {
  testutil::TempDir dir("ggae_cli");
  const CmdResult r =
      run_cli(dir, "ingest --input " + kFixtures + "/empty.csv --output " + dir.file("g.json"));
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("empty input") != std::string::npos);
}

TEST_CASE("ingest output is byte stable") {
  testutil::TempDir dir("ggae_cli");
  const std::string a = dir.file("a.json");
  const std::string b = dir.file("b.json");
  REQUIRE(run_cli(dir, "ingest --input " + kFixtures + "/trade_small.csv --output " + a)
              .exit_code == 0);
  REQUIRE(run_cli(dir, "ingest --input " + kFixtures + "/trade_small.csv --output " + b)
              .exit_code == 0);
  CHECK(testutil::slurp(a) == testutil::slurp(b));
}

TEST_CASE("ingest schema override must name a real column") {
  testutil::TempDir dir("ggae_cli");
  const CmdResult r = run_cli(dir, "ingest --input " + kFixtures +
                                       "/trade_small.csv --output " + dir.file("g.json") +
                                       " --schema flow=nope");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("nope") != std::string::npos);
}

TEST_CASE("ingest rejects unknown schema roles") {
  testutil::TempDir dir("ggae_cli");
  const CmdResult r = run_cli(dir, "ingest --input " + kFixtures +
                                       "/trade_small.csv --output " + dir.file("g.json") +
                                       " --schema banana=x");
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("banana") != std::string::npos);
}

TEST_CASE("ingest schema override can rename columns") {
  testutil::TempDir dir("ggae_cli");
  const std::string csv = dir.file("renamed.csv");
  write_text_file(csv,
                  "from,to,gdp_o,gdp_d,dist,value\n"
                  "DEU,FRA,1e12,2e12,450,5e9\n"
                  "FRA,ITA,2e12,1.5e12,700,3e9\n");
  const CmdResult r = run_cli(dir, "ingest --input " + csv + " --output " + dir.file("g.json") +
                                       " --schema exporter=from --schema importer=to --schema "
                                       "flow=value");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("records: 2 read, 2 kept") != std::string::npos);
  CHECK(r.out.find("nodes: 3") != std::string::npos);
}

TEST_CASE("usage errors exit with one") {
  testutil::TempDir dir("ggae_cli");
  CHECK(run_cli(dir, "frobnicate").exit_code == 1);
  CHECK(run_cli(dir, "").exit_code == 1);
  CHECK(run_cli(dir, "scatter --graph g.json --out s.csv --bogus").exit_code == 1);
  CHECK(run_cli(dir, "ingest --input only.csv").exit_code == 1);  // missing --output
}

TEST_CASE("scatter reports one row per edge") {
  testutil::TempDir dir("ggae_cli");
  const std::string graph_path = dir.file("graph.json");
  REQUIRE(run_cli(dir, "ingest --input " + kFixtures + "/trade_small.csv --output " + graph_path)
              .exit_code == 0);
  const std::string csv = dir.file("scatter.csv");
  const CmdResult r = run_cli(dir, "scatter --graph " + graph_path + " --out " + csv);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("rows: 7") != std::string::npos);

  std::istringstream lines(testutil::slurp(csv));
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) ++count;
  CHECK(count == 8);  // header + 7 edges
}

TEST_CASE("scatter on an edgeless graph is a data error") {
  testutil::TempDir dir("ggae_cli");
  const std::string graph_path = dir.file("lonely.json");
  write_text_file(graph_path,
                  "{\"edges\": [], \"nodes\": [{\"code\": \"AAA\", \"log_gdp\": 24.0}]}\n");
  const CmdResult r = run_cli(dir, "scatter --graph " + graph_path + " --out " + dir.file("s.csv"));
  CHECK(r.exit_code == 2);
}

TEST_CASE("scatter on a missing graph file is a data error") {
  testutil::TempDir dir("ggae_cli");
  const CmdResult r =
      run_cli(dir, "scatter --graph " + dir.file("absent.json") + " --out " + dir.file("s.csv"));
  CHECK(r.exit_code == 2);
}

TEST_CASE("noise-free scatter lies on the unit line") {
  testutil::TempDir dir("ggae_cli");
  const std::string graph_path =
      make_synth_graph(dir, "exact.json", "--nodes 40 --density 0.4 --sigma 0 --seed 5");
  const std::string csv = dir.file("scatter.csv");
  REQUIRE(run_cli(dir, "scatter --graph " + graph_path + " --out " + csv).exit_code == 0);

  std::istringstream lines(testutil::slurp(csv));
  std::string line;
  std::getline(lines, line);  // header
  std::vector<double> z, y;
  while (std::getline(lines, line)) {
    const auto comma = line.find(',');
    REQUIRE(comma != std::string::npos);
    z.push_back(std::stod(line.substr(0, comma)));
    y.push_back(std::stod(line.substr(comma + 1)));
  }
  REQUIRE(z.size() >= 10);
  const auto fit = testutil::ols_single_regressor(z, y);
  CHECK(fit.slope == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(fit.intercept) <= 1e-5);
}

TEST_CASE("train prints a parseable report") {
  testutil::TempDir dir("ggae_cli");
  const std::string graph_path =
      make_synth_graph(dir, "g.json", "--nodes 25 --density 0.4 --sigma 0.3 --seed 8");
  const CmdResult r =
      run_cli(dir, "train --graph " + graph_path + " --pattern P2 --epochs 15 --runs 2");
  CHECK(r.exit_code == 0);
  const nlohmann::json j = nlohmann::json::parse(r.out);
  CHECK(j["config"]["pattern"] == "P2");
  CHECK(j["config"]["epochs"] == 15);
  CHECK(j["per_run"].size() == 2);
}

TEST_CASE("train writes the report file with a timestamp") {
  testutil::TempDir dir("ggae_cli");
  const std::string graph_path =
      make_synth_graph(dir, "g.json", "--nodes 25 --density 0.4 --sigma 0.3 --seed 8");
  const std::string out = dir.file("report.json");
  const CmdResult r =
      run_cli(dir, "train --graph " + graph_path + " --epochs 10 --out " + out);
  CHECK(r.exit_code == 0);
  const nlohmann::json j = nlohmann::json::parse(testutil::slurp(out));
  CHECK(j.contains("generated_at"));
  CHECK(j["config"]["pattern"] == "P1");
}

TEST_CASE("train rejects an unknown pattern") {
  testutil::TempDir dir("ggae_cli");
  const std::string graph_path =
      make_synth_graph(dir, "g.json", "--nodes 10 --density 0.5 --sigma 0.1 --seed 1");
  const CmdResult r = run_cli(dir, "train --graph " + graph_path + " --pattern P9");
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("P9") != std::string::npos);
}

TEST_CASE("train rejects zero epochs") {
  testutil::TempDir dir("ggae_cli");
  const std::string graph_path =
      make_synth_graph(dir, "g.json", "--nodes 10 --density 0.5 --sigma 0.1 --seed 1");
  const CmdResult r = run_cli(dir, "train --graph " + graph_path + " --epochs 0");
  CHECK(r.exit_code == 1);
}

TEST_CASE("training divergence has its own exit code") {
  testutil::TempDir dir("ggae_cli");
  const std::string graph_path =
      make_synth_graph(dir, "g.json", "--nodes 15 --density 0.5 --sigma 0.2 --seed 2");
  const CmdResult r = run_cli(dir, "train --graph " + graph_path + " --epochs 10 --lr 1e160");
  CHECK(r.exit_code == 3);
  CHECK(r.err.find("diverged") != std::string::npos);
}

TEST_CASE("reproduce-table writes json and text outputs") {
  testutil::TempDir dir("ggae_cli");
  const std::string graph_path =
      make_synth_graph(dir, "g.json", "--nodes 25 --density 0.4 --sigma 0.3 --seed 8");
  const std::string out = dir.file("table.json");
  const CmdResult r = run_cli(dir, "reproduce-table --graph " + graph_path +
                                       " --runs 1 --epochs 5 --out " + out);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("P5") != std::string::npos);

  const nlohmann::json j = nlohmann::json::parse(testutil::slurp(out));
  CHECK(j["patterns"].size() == 5);
  CHECK(j.contains("generated_at"));

  std::istringstream lines(testutil::slurp(dir.file("table.txt")));
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) ++count;
  CHECK(count == 6);
}

TEST_CASE("reproduce-table is deterministic modulo the timestamp") {
  testutil::TempDir dir("ggae_cli");
  const std::string graph_path =
      make_synth_graph(dir, "g.json", "--nodes 20 --density 0.5 --sigma 0.3 --seed 9");
  const std::string out_a = dir.file("a.json");
  const std::string out_b = dir.file("b.json");
  REQUIRE(run_cli(dir, "reproduce-table --graph " + graph_path + " --runs 2 --epochs 8 --out " +
                           out_a)
              .exit_code == 0);
  REQUIRE(run_cli(dir, "reproduce-table --graph " + graph_path + " --runs 2 --epochs 8 --out " +
                           out_b)
              .exit_code == 0);
  nlohmann::json a = nlohmann::json::parse(testutil::slurp(out_a));
  nlohmann::json b = nlohmann::json::parse(testutil::slurp(out_b));
  a.erase("generated_at");
  b.erase("generated_at");
  CHECK(a.dump() == b.dump());
  CHECK(testutil::slurp(dir.file("a.txt")) == testutil::slurp(dir.file("b.txt")));
}

TEST_CASE("synth validates its parameters") {
  testutil::TempDir dir("ggae_cli");
  CHECK(run_cli(dir, "synth --density 0 --output " + dir.file("g.json")).exit_code == 1);
  CHECK(run_cli(dir, "synth --nodes 1 --output " + dir.file("g.json")).exit_code == 1);
  CHECK(run_cli(dir, "synth --sigma -1 --output " + dir.file("g.json")).exit_code == 1);
}

TEST_CASE("synth writes a loadable graph") {
  testutil::TempDir dir("ggae_cli");
  const std::string path = dir.file("g.json");
  const CmdResult r = run_cli(dir, "synth --nodes 12 --density 0.5 --sigma 0.2 --seed 4 --output " + path);
  CHECK(r.exit_code == 0);
  const TradeGraph graph = read_graph_json(path);
  CHECK(graph.num_nodes() == 12);
  CHECK(graph.num_edges() >= 1);
}

}  // TEST_SUITE
