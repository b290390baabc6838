#include <algorithm>
#include <numeric>
#include <vector>

#include "doctest.h"

#include "ggae/encoder.hpp"
#include "testing_util.hpp"

using namespace ggae;

namespace {

std::vector<int> all_edge_ids(const TradeGraph& graph) {
  std::vector<int> ids(static_cast<std::size_t>(graph.num_edges()));
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

// Straight-line dense evaluation of the stacked layers, no tape involved.
Mat dense_gcn(const Mat& s, const Mat& x, const std::vector<Mat>& weights) {
  Mat h = x;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    h = s * h * weights[k];
    if (k + 1 < weights.size()) h = h.cwiseMax(0.0);
  }
  return h;
}

}  // namespace

TEST_SUITE("encoder") {

TEST_CASE("isolated node normalizes to its self loop") {
  TradeGraph graph;
  graph.nodes.push_back("AAA");
  graph.node_features = Mat::Zero(1, 1);
  const auto norm = normalize_adjacency(graph, {});
  REQUIRE(norm.matrix.rows() == 1);
  CHECK(norm.matrix(0, 0) == 1.0);
}

TEST_CASE("single undirected pair gives four entries of one half") {
  TradeGraph graph;
  graph.nodes = {"AAA", "BBB"};
  graph.node_features = Mat::Zero(2, 1);
  graph.edges = {{0, 1}};
  graph.edge_log_distance = Vec::Zero(1);
  graph.edge_log_flow = Vec::Zero(1);
  const std::vector<int> ids = {0};
  const auto norm = normalize_adjacency(graph, ids);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) CHECK(norm.matrix(i, j) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("reciprocal directed edges collapse to one undirected link") {
  TradeGraph graph;
  graph.nodes = {"AAA", "BBB"};
  graph.node_features = Mat::Zero(2, 1);
  graph.edges = {{0, 1}, {1, 0}};
  graph.edge_log_distance = Vec::Zero(2);
  graph.edge_log_flow = Vec::Zero(2);
  const auto both = normalize_adjacency(graph, all_edge_ids(graph));
  const std::vector<int> one = {0};
  const auto single = normalize_adjacency(graph, one);
  CHECK((both.matrix - single.matrix).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("normalization matches the per-entry oracle on random graphs") {
  Rng rng(101);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(0, 4));
    const auto graph = testutil::random_graph(rng, n, 0.5);
    const auto ids = all_edge_ids(graph);
    const auto norm = normalize_adjacency(graph, ids);
    const Mat oracle = testutil::brute_force_normalized(graph, ids);
    REQUIRE(norm.matrix.rows() == n);
    CHECK((norm.matrix - oracle).cwiseAbs().maxCoeff() <= 1e-12);
    // structural sanity: symmetric, entries in [0, 1], sparsity mirrors links
    CHECK((norm.matrix - norm.matrix.transpose()).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(norm.matrix.minCoeff() >= 0.0);
    CHECK(norm.matrix.maxCoeff() <= 1.0);
    for (Index i = 0; i < n; ++i) {
      CHECK(norm.matrix(i, i) > 0.0);
      for (Index j = 0; j < n; ++j) {
        const bool linked =
            i == j || std::any_of(graph.edges.begin(), graph.edges.end(), [&](const auto& e) {
              return (e.first == i && e.second == j) || (e.first == j && e.second == i);
            });
        CHECK((norm.matrix(i, j) > 0.0) == linked);
      }
    }
  }
}

TEST_CASE("edges outside the listed subset do not propagate") {
  TradeGraph graph;
  graph.nodes = {"AAA", "BBB", "CCC"};
  graph.node_features = Mat::Zero(3, 1);
  graph.edges = {{0, 1}, {1, 2}};
  graph.edge_log_distance = Vec::Zero(2);
  graph.edge_log_flow = Vec::Zero(2);
  const std::vector<int> train_only = {0};
  const auto norm = normalize_adjacency(graph, train_only);
  CHECK(norm.matrix(1, 2) == 0.0);
  CHECK(norm.matrix(2, 1) == 0.0);
  CHECK(norm.matrix(0, 1) > 0.0);
  CHECK(norm.matrix(2, 2) == 1.0);  // excluded endpoint keeps only its self loop
}

TEST_CASE("zero-node graph is rejected") {
  TradeGraph graph;
  CHECK_THROWS_AS(normalize_adjacency(graph, {}), EmptyGraphError);
}

TEST_CASE("edge ids outside the graph are rejected") {
  Rng rng(5);
  const auto graph = testutil::random_graph(rng, 4, 0.8);
  const std::vector<int> bad = {static_cast<int>(graph.num_edges())};
  CHECK_THROWS_AS(normalize_adjacency(graph, bad), ContractError);
  const std::vector<int> negative = {-1};
  CHECK_THROWS_AS(normalize_adjacency(graph, negative), ContractError);
}

TEST_CASE("single-node convolution is plain feature scaling") {
  Tape tape;
  Tensor s = tape.constant(Mat::Ones(1, 1));
  Tensor x = tape.constant((Mat(1, 1) << 2.0).finished());
  std::vector<GcnLayerParams> layers;
  layers.push_back({tape.parameter(Mat::Ones(1, 1)), Activation::kNone});
  const Tensor out = gcn_forward(s, x, layers);
  CHECK(out.value()(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("two-node path averages the features") {
  TradeGraph graph;
  graph.nodes = {"AAA", "BBB"};
  graph.node_features = (Mat(2, 1) << 1.0, 0.0).finished();
  graph.edges = {{0, 1}};
  graph.edge_log_distance = Vec::Zero(1);
  graph.edge_log_flow = Vec::Zero(1);
  const auto norm = normalize_adjacency(graph, all_edge_ids(graph));

  Tape tape;
  Tensor x = tape.constant(graph.node_features);
  std::vector<GcnLayerParams> layers;
  layers.push_back({tape.parameter(Mat::Ones(1, 1)), Activation::kNone});
  const Tensor out = gcn_forward(norm, x, layers);
  CHECK(out.value()(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(out.value()(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("identity weights with no activation reduce to one smoothing step") {
  Rng rng(21);
  const auto graph = testutil::random_graph(rng, 5, 0.5);
  const auto norm = normalize_adjacency(graph, all_edge_ids(graph));

  Tape tape;
  Tensor x = tape.constant(graph.node_features);
  std::vector<GcnLayerParams> layers;
  layers.push_back({tape.parameter(Mat::Identity(1, 1)), Activation::kNone});
  const Tensor out = gcn_forward(norm, x, layers);
  const Mat expected = norm.matrix * graph.node_features;
  CHECK((out.value() - expected).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("two stacked layers match a straight-line dense evaluation") {
  Rng rng(33);
  const auto graph = testutil::random_graph(rng, 6, 0.5);
  const auto norm = normalize_adjacency(graph, all_edge_ids(graph));

  Mat w1(1, 4), w2(4, 3);
  for (Index i = 0; i < w1.size(); ++i) w1(i) = rng.normal();
  for (Index i = 0; i < w2.size(); ++i) w2(i) = rng.normal();

  Tape tape;
  Tensor x = tape.constant(graph.node_features);
  std::vector<GcnLayerParams> layers;
  layers.push_back({tape.parameter(w1), Activation::kRelu});
  layers.push_back({tape.parameter(w2), Activation::kNone});
  const Tensor out = gcn_forward(norm, x, layers);

  const Mat expected = dense_gcn(norm.matrix, graph.node_features, {w1, w2});
  REQUIRE(out.value().rows() == 6);
  REQUIRE(out.value().cols() == 3);
  CHECK((out.value() - expected).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("relabeling nodes relabels embeddings the same way") {
  Rng rng(55);
  const int n = 7;
  const auto graph = testutil::random_graph(rng, n, 0.45);
  REQUIRE(graph.num_edges() >= 1);

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);

  TradeGraph permuted;
  permuted.nodes.resize(n);
  permuted.node_features = Mat::Zero(n, 1);
  for (int i = 0; i < n; ++i) {
    permuted.nodes[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] =
        graph.nodes[static_cast<std::size_t>(i)];
    permuted.node_features.row(perm[static_cast<std::size_t>(i)]) = graph.node_features.row(i);
  }
  for (const auto& [u, v] : graph.edges)
    permuted.edges.emplace_back(perm[static_cast<std::size_t>(u)],
                                perm[static_cast<std::size_t>(v)]);
  permuted.edge_log_distance = graph.edge_log_distance;
  permuted.edge_log_flow = graph.edge_log_flow;

  Mat w1(1, 4), w2(4, 2);
  for (Index i = 0; i < w1.size(); ++i) w1(i) = rng.normal();
  for (Index i = 0; i < w2.size(); ++i) w2(i) = rng.normal();

  const auto run = [&](const TradeGraph& g) {
    Tape tape;
    const auto norm = normalize_adjacency(g, all_edge_ids(g));
    Tensor x = tape.constant(g.node_features);
    std::vector<GcnLayerParams> layers;
    layers.push_back({tape.parameter(w1), Activation::kRelu});
    layers.push_back({tape.parameter(w2), Activation::kNone});
    return gcn_forward(norm, x, layers).value();
  };

  const Mat base = run(graph);
  const Mat relabeled = run(permuted);
  for (int i = 0; i < n; ++i) {
    CHECK((relabeled.row(perm[static_cast<std::size_t>(i)]) - base.row(i)).cwiseAbs().maxCoeff() <=
          1e-10);
  }
}

TEST_CASE("layer width chain is validated up front") {
  Tape tape;
  Tensor s = tape.constant(Mat::Ones(1, 1));
  Tensor x = tape.constant(Mat::Ones(1, 1));

  std::vector<GcnLayerParams> bad_first;
  bad_first.push_back({tape.parameter(Mat::Ones(2, 3)), Activation::kNone});
  CHECK_THROWS_WITH_AS(gcn_forward(s, x, bad_first), doctest::Contains("layer 0"), ConfigError);

  std::vector<GcnLayerParams> bad_second;
  bad_second.push_back({tape.parameter(Mat::Ones(1, 4)), Activation::kRelu});
  bad_second.push_back({tape.parameter(Mat::Ones(5, 2)), Activation::kNone});
  CHECK_THROWS_WITH_AS(gcn_forward(s, x, bad_second), doctest::Contains("layer 1"), ConfigError);
}

TEST_CASE("identity encoder is a pass-through") {
  Tape tape;
  Mat features(3, 2);
  features << 1.0, 2.0, 3.0, 4.0, 5.0, 6.0;
  Tensor x = tape.constant(features);
  const Tensor once = identity_encode(x);
  CHECK((once.value() - features).cwiseAbs().maxCoeff() == 0.0);
  const Tensor twice = identity_encode(once);
  CHECK((twice.value() - features).cwiseAbs().maxCoeff() == 0.0);
}

}  // TEST_SUITE
