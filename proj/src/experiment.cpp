#include "ggae/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

namespace ggae {

namespace {

// Decorrelates parameter initialization from the split draw, which consumes
// the run seed directly.
constexpr std::uint64_t kInitSeedSalt = 0xD1B54A32D192ED03ULL;

constexpr Scalar kNaN = std::numeric_limits<Scalar>::quiet_NaN();

std::uint64_t hash_bytes(std::uint64_t h, const void* data, std::size_t size) {
  return fnv1a64(data, size, h);
}

std::uint64_t hash_scalar(std::uint64_t h, Scalar value) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &value, sizeof(bits));
  return hash_bytes(h, &bits, sizeof(bits));
}

std::uint64_t hash_u64(std::uint64_t h, std::uint64_t value) {
  return hash_bytes(h, &value, sizeof(value));
}

std::uint64_t hash_string(std::uint64_t h, const std::string& s) {
  h = hash_u64(h, s.size());
  return hash_bytes(h, s.data(), s.size());
}

}  // namespace

int gcn_depth(Pattern pattern) {
  switch (pattern) {
    case Pattern::kIdentityGgae:
      return 0;
    case Pattern::kGcn1Ggae:
    case Pattern::kGcn1Mlp:
      return 1;
    case Pattern::kGcn2Ggae:
    case Pattern::kGcn2Mlp:
      return 2;
  }
  throw ContractError("gcn_depth: unknown pattern");
}

bool uses_mlp_decoder(Pattern pattern) {
  return pattern == Pattern::kGcn1Mlp || pattern == Pattern::kGcn2Mlp;
}

const char* pattern_name(Pattern pattern) {
  switch (pattern) {
    case Pattern::kIdentityGgae:
      return "P1";
    case Pattern::kGcn1Ggae:
      return "P2";
    case Pattern::kGcn1Mlp:
      return "P3";
    case Pattern::kGcn2Ggae:
      return "P4";
    case Pattern::kGcn2Mlp:
      return "P5";
  }
  throw ContractError("pattern_name: unknown pattern");
}

const char* pattern_description(Pattern pattern) {
  switch (pattern) {
    case Pattern::kIdentityGgae:
      return "identity + GGAE(linear)";
    case Pattern::kGcn1Ggae:
      return "GCN(1) + GGAE(linear)";
    case Pattern::kGcn1Mlp:
      return "GCN(1) + MLP(surrogate)";
    case Pattern::kGcn2Ggae:
      return "GCN(2) + GGAE(linear)";
    case Pattern::kGcn2Mlp:
      return "GCN(2) + MLP(surrogate)";
  }
  throw ContractError("pattern_description: unknown pattern");
}

Pattern parse_pattern(std::string_view text) {
  std::string t(text);
  std::transform(t.begin(), t.end(), t.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (const Pattern p : kAllPatterns) {
    if (t == pattern_name(p) || (t.size() == 1 && t[0] == '0' + static_cast<int>(p))) {
      return p;
    }
  }
  throw ConfigError("unknown pattern '" + std::string(text) + "'; expected P1..P5");
}

void ModelConfig::validate() const {
  if (epochs < 1) {
    throw ConfigError("epochs must be at least 1, got " + std::to_string(epochs));
  }
  if (!(learning_rate > 0.0)) {
    std::ostringstream msg;
    msg << "learning rate must be positive, got " << learning_rate;
    throw ConfigError(msg.str());
  }
  if (!(train_ratio > 0.0) || !(train_ratio < 1.0)) {
    std::ostringstream msg;
    msg << "train ratio must lie in (0,1), got " << train_ratio;
    throw ConfigError(msg.str());
  }
  if (hidden_dim < 1) {
    throw ConfigError("hidden dim must be at least 1, got " + std::to_string(hidden_dim));
  }
}

TrainedPattern::TrainedPattern(const TradeGraph& graph, const EdgeSplit& split,
                               const ModelConfig& config)
    : config_(config), tape_(std::make_unique<Tape>()) {
  config_.validate();
  if (split.train_edges.empty() || split.test_edges.empty()) {
    throw ContractError("train_pattern: both split sides must be non-empty");
  }

  num_nodes_ = graph.num_nodes();
  num_edges_ = graph.num_edges();
  edge_src_.reserve(graph.edges.size());
  edge_dst_.reserve(graph.edges.size());
  for (const auto& [u, v] : graph.edges) {
    edge_src_.push_back(u);
    edge_dst_.push_back(v);
  }
  edge_log_distance_ = graph.edge_log_distance;
  edge_log_flow_ = graph.edge_log_flow;
  train_edges_ = split.train_edges;

  features_ = tape_->constant(graph.node_features);
  const int depth = gcn_depth(config_.pattern);
  if (depth > 0) {
    std::vector<int> all_edges;
    std::span<const int> propagation_edges(split.train_edges);
    if (!config_.propagate_train_edges_only) {
      all_edges.resize(static_cast<std::size_t>(num_edges_));
      for (Index i = 0; i < num_edges_; ++i) all_edges[static_cast<std::size_t>(i)] = static_cast<int>(i);
      propagation_edges = all_edges;
    }
    adjacency_ = tape_->constant(normalize_adjacency(graph, propagation_edges).matrix);
  }

  Rng init_rng(config_.seed ^ kInitSeedSalt);
  Index embedding_dim = graph.node_features.cols();
  if (depth >= 1) {
    gcn_layers_.push_back(
        {tape_->parameter(glorot_uniform(embedding_dim, config_.hidden_dim, init_rng)),
         depth > 1 ? Activation::kRelu : Activation::kNone});
    for (int k = 1; k < depth; ++k) {
      gcn_layers_.push_back(
          {tape_->parameter(glorot_uniform(config_.hidden_dim, config_.hidden_dim, init_rng)),
           k + 1 < depth ? Activation::kRelu : Activation::kNone});
    }
    embedding_dim = config_.hidden_dim;
  }
  for (const GcnLayerParams& layer : gcn_layers_) parameters_.push_back(layer.weight);

  if (uses_mlp_decoder(config_.pattern)) {
    mlp_ = MlpParams::glorot(*tape_, 2 * embedding_dim + 1, init_rng);
    for (const Tensor& p : mlp_.parameters()) parameters_.push_back(p);
  } else {
    linear_ = GgaeLinearParams::glorot(*tape_, embedding_dim, init_rng);
    for (const Tensor& p : linear_.parameters()) parameters_.push_back(p);
  }

  Mat train_dist(static_cast<Index>(train_edges_.size()), 1);
  Mat train_flow(static_cast<Index>(train_edges_.size()), 1);
  for (std::size_t i = 0; i < train_edges_.size(); ++i) {
    train_dist(static_cast<Index>(i), 0) = edge_log_distance_(train_edges_[i]);
    train_flow(static_cast<Index>(i), 0) = edge_log_flow_(train_edges_[i]);
  }
  train_distance_ = tape_->constant(train_dist);
  train_targets_ = tape_->constant(train_flow);

  AdamConfig adam_config;
  adam_config.learning_rate = config_.learning_rate;
  adam_ = std::make_unique<AdamState>(parameters_, adam_config);

  watermark_ = tape_->checkpoint();
}

Tensor TrainedPattern::encode() {
  if (gcn_layers_.empty()) return identity_encode(features_);
  return gcn_forward(adjacency_, features_, gcn_layers_);
}

Tensor TrainedPattern::decode(Tensor embeddings, std::span<const int> edge_ids,
                              Tensor edge_log_distance) {
  std::vector<int> src, dst;
  src.reserve(edge_ids.size());
  dst.reserve(edge_ids.size());
  for (const int id : edge_ids) {
    src.push_back(edge_src_[static_cast<std::size_t>(id)]);
    dst.push_back(edge_dst_[static_cast<std::size_t>(id)]);
  }
  if (uses_mlp_decoder(config_.pattern)) {
    return surrogate_decode(embeddings, src, dst, edge_log_distance, mlp_);
  }
  return ggae_decode_linear(ggae_edge_embedding_log(embeddings, src, dst, edge_log_distance),
                            linear_);
}

void TrainedPattern::train() {
  loss_history_.clear();
  loss_history_.reserve(static_cast<std::size_t>(config_.epochs));
  for (int epoch = 1; epoch <= config_.epochs; ++epoch) {
    try {
      Tensor predictions = decode(encode(), train_edges_, train_distance_);
      Tensor loss = mse_loss(predictions, train_targets_);
      loss_history_.push_back(loss.value()(0, 0));
      tape_->backward(loss);
      adam_step(parameters_, *adam_);
      tape_->rewind(watermark_);
    } catch (const DivergenceError& err) {
      tape_->rewind(watermark_);
      std::ostringstream msg;
      msg << "training diverged at epoch " << epoch << ": " << err.what();
      throw DivergenceError(msg.str(), epoch, err.run());
    }
  }
}

Vec TrainedPattern::predict(const TradeGraph& graph, std::span<const int> edge_ids) {
  if (graph.num_nodes() != num_nodes_ || graph.num_edges() != num_edges_) {
    throw ContractError("predict: graph shape does not match the training graph");
  }
  for (const int id : edge_ids) {
    if (id < 0 || id >= num_edges_) {
      throw ContractError("predict: edge id " + std::to_string(id) + " out of range");
    }
  }
  Mat dist(static_cast<Index>(edge_ids.size()), 1);
  for (std::size_t i = 0; i < edge_ids.size(); ++i) {
    dist(static_cast<Index>(i), 0) = edge_log_distance_(edge_ids[i]);
  }
  Tensor distance = tape_->constant(dist);
  Tensor predictions = decode(encode(), edge_ids, distance);
  Vec out = predictions.value().col(0);
  tape_->rewind(watermark_);
  return out;
}

TrainedPattern train_pattern(const TradeGraph& graph, const EdgeSplit& split,
                             const ModelConfig& config) {
  TrainedPattern model(graph, split, config);
  model.train();
  return model;
}

Scalar rmse(const Vec& predictions, const Vec& targets) {
  if (predictions.size() != targets.size()) {
    std::ostringstream msg;
    msg << "rmse: " << predictions.size() << " predictions vs " << targets.size() << " targets";
    throw DimensionError(msg.str());
  }
  if (predictions.size() == 0) {
    throw ContractError("rmse: empty edge list");
  }
  return std::sqrt((predictions - targets).squaredNorm() / static_cast<Scalar>(predictions.size()));
}

Scalar evaluate_rmse(TrainedPattern& model, const TradeGraph& graph,
                     std::span<const int> edge_ids) {
  if (edge_ids.empty()) {
    throw ContractError("evaluate_rmse: empty edge list");
  }
  const Vec predictions = model.predict(graph, edge_ids);
  Vec targets(static_cast<Index>(edge_ids.size()));
  for (std::size_t i = 0; i < edge_ids.size(); ++i) {
    targets(static_cast<Index>(i)) = graph.edge_log_flow(edge_ids[i]);
  }
  return rmse(predictions, targets);
}

RunReport run_experiment(const TradeGraph& graph, const ModelConfig& config, int n_runs,
                         std::uint64_t base_seed, DivergencePolicy policy) {
  config.validate();
  if (n_runs < 1) {
    throw ConfigError("n_runs must be at least 1, got " + std::to_string(n_runs));
  }

  RunReport report;
  report.config = config;
  report.config.seed = base_seed;
  report.n_runs = n_runs;
  report.config_hash = config_hash(report.config, n_runs, base_seed);
  report.dataset_fingerprint = dataset_fingerprint(graph);
  report.per_run.reserve(static_cast<std::size_t>(n_runs));

  for (int i = 0; i < n_runs; ++i) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
    ModelConfig run_config = config;
    run_config.seed = seed;
    const EdgeSplit split = split_edges(graph, run_config.train_ratio, seed);

    RunStats stats;
    stats.seed = seed;
    try {
      TrainedPattern model = train_pattern(graph, split, run_config);
      stats.train_rmse = evaluate_rmse(model, graph, split.train_edges);
      stats.test_rmse = evaluate_rmse(model, graph, split.test_edges);
      stats.final_loss = model.loss_history().back();
      stats.epochs_run = static_cast<int>(model.loss_history().size());
    } catch (const DivergenceError& err) {
      if (policy == DivergencePolicy::kThrow) {
        std::ostringstream msg;
        msg << "run " << i << " (seed " << seed << "): " << err.what();
        throw DivergenceError(msg.str(), err.epoch(), i);
      }
      stats.train_rmse = kNaN;
      stats.test_rmse = kNaN;
      stats.final_loss = kNaN;
      stats.epochs_run = err.epoch();
      stats.diverged = true;
      stats.divergence_epoch = err.epoch();
    }
    report.per_run.push_back(stats);
  }

  Scalar sum = 0.0;
  Scalar max = -std::numeric_limits<Scalar>::infinity();
  Scalar min = std::numeric_limits<Scalar>::infinity();
  int completed = 0;
  for (const RunStats& stats : report.per_run) {
    if (stats.diverged) continue;
    sum += stats.test_rmse;
    max = std::max(max, stats.test_rmse);
    min = std::min(min, stats.test_rmse);
    completed += 1;
  }
  if (completed > 0) {
    report.aggregate = {sum / completed, max, min};
  } else {
    report.aggregate = {kNaN, kNaN, kNaN};
  }
  return report;
}

std::vector<RunReport> reproduce_table(const TradeGraph& graph, const ModelConfig& base_config,
                                       int n_runs, std::uint64_t base_seed,
                                       DivergencePolicy policy) {
  std::vector<RunReport> table;
  table.reserve(std::size(kAllPatterns));
  for (const Pattern pattern : kAllPatterns) {
    ModelConfig config = base_config;
    config.pattern = pattern;
    // Same base seed for every pattern: run i of each pattern shares one
    // split, so the comparison is paired.
    table.push_back(run_experiment(graph, config, n_runs, base_seed, policy));
  }
  return table;
}

TradeGraph generate_synthetic_gravity(int n_countries, Scalar edge_density, Scalar noise_sigma,
                                      std::uint64_t seed) {
  if (n_countries < 2) {
    throw ConfigError("synthetic graph needs at least 2 countries, got " +
                      std::to_string(n_countries));
  }
  if (n_countries > 26 * 26 * 26) {
    throw ConfigError("synthetic graph supports at most 17576 countries");
  }
  if (!(edge_density > 0.0) || edge_density > 1.0) {
    std::ostringstream msg;
    msg << "edge density must lie in (0,1], got " << edge_density;
    throw ConfigError(msg.str());
  }
  if (noise_sigma < 0.0) {
    std::ostringstream msg;
    msg << "noise sigma must be non-negative, got " << noise_sigma;
    throw ConfigError(msg.str());
  }

  Rng rng(seed);
  TradeGraph graph;
  graph.nodes.reserve(static_cast<std::size_t>(n_countries));
  for (int i = 0; i < n_countries; ++i) {
    std::string code(3, 'A');
    code[0] = static_cast<char>('A' + i / 676);
    code[1] = static_cast<char>('A' + (i / 26) % 26);
    code[2] = static_cast<char>('A' + i % 26);
    graph.nodes.push_back(code);
  }
  graph.node_features = Mat(n_countries, 1);
  for (int i = 0; i < n_countries; ++i) {
    graph.node_features(i, 0) = rng.normal(24.0, 2.0);
  }

  std::vector<Scalar> log_dist, log_flow;
  for (int u = 0; u < n_countries; ++u) {
    for (int v = 0; v < n_countries; ++v) {
      if (u == v) continue;
      if (rng.uniform() >= edge_density) continue;
      const Scalar d = rng.normal(8.0, 1.0);
      const Scalar eps = rng.normal(0.0, 1.0);
      graph.edges.emplace_back(u, v);
      log_dist.push_back(d);
      log_flow.push_back(graph.node_features(u, 0) + graph.node_features(v, 0) - d +
                         noise_sigma * eps);
    }
  }
  graph.edge_log_distance =
      Eigen::Map<const Vec>(log_dist.data(), static_cast<Index>(log_dist.size()));
  graph.edge_log_flow =
      Eigen::Map<const Vec>(log_flow.data(), static_cast<Index>(log_flow.size()));
  return graph;
}

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t dataset_fingerprint(const TradeGraph& graph) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = hash_u64(h, static_cast<std::uint64_t>(graph.num_nodes()));
  for (const std::string& code : graph.nodes) h = hash_string(h, code);
  for (Index i = 0; i < graph.num_nodes(); ++i) h = hash_scalar(h, graph.node_features(i, 0));
  h = hash_u64(h, static_cast<std::uint64_t>(graph.num_edges()));
  for (Index e = 0; e < graph.num_edges(); ++e) {
    h = hash_u64(h, static_cast<std::uint64_t>(graph.edges[static_cast<std::size_t>(e)].first));
    h = hash_u64(h, static_cast<std::uint64_t>(graph.edges[static_cast<std::size_t>(e)].second));
    h = hash_scalar(h, graph.edge_log_distance(e));
    h = hash_scalar(h, graph.edge_log_flow(e));
  }
  return h;
}

std::uint64_t config_hash(const ModelConfig& config, int n_runs, std::uint64_t base_seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = hash_u64(h, static_cast<std::uint64_t>(config.pattern));
  h = hash_scalar(h, config.learning_rate);
  h = hash_u64(h, static_cast<std::uint64_t>(config.epochs));
  h = hash_scalar(h, config.train_ratio);
  h = hash_u64(h, static_cast<std::uint64_t>(config.hidden_dim));
  h = hash_u64(h, config.propagate_train_edges_only ? 1 : 0);
  h = hash_u64(h, static_cast<std::uint64_t>(n_runs));
  h = hash_u64(h, base_seed);
  return h;
}

}  // namespace ggae
