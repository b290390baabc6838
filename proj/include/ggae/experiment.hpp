#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ggae/autodiff.hpp"
#include "ggae/dataset.hpp"
#include "ggae/decoder.hpp"
#include "ggae/encoder.hpp"
#include "ggae/optimizer.hpp"
#include "ggae/types.hpp"

namespace ggae {

// The five encoder/decoder pairings compared in the study: identity or GCN
// stacks of depth 1 and 2 on the encoder side, the linear gravity-form
// readout or the surrogate MLP on the decoder side.
enum class Pattern {
  kIdentityGgae = 1,
  kGcn1Ggae = 2,
  kGcn1Mlp = 3,
  kGcn2Ggae = 4,
  kGcn2Mlp = 5,
};

inline constexpr Pattern kAllPatterns[] = {Pattern::kIdentityGgae, Pattern::kGcn1Ggae,
                                           Pattern::kGcn1Mlp, Pattern::kGcn2Ggae,
                                           Pattern::kGcn2Mlp};

int gcn_depth(Pattern pattern);
bool uses_mlp_decoder(Pattern pattern);
const char* pattern_name(Pattern pattern);         // "P1" .. "P5"
const char* pattern_description(Pattern pattern);  // encoder + decoder summary
Pattern parse_pattern(std::string_view text);      // accepts "P1".."P5" or "1".."5"

struct ModelConfig {
  Pattern pattern = Pattern::kIdentityGgae;
  Scalar learning_rate = 0.01;
  int epochs = 1000;
  Scalar train_ratio = 0.66;
  Index hidden_dim = 16;
  std::uint64_t seed = 0;
  // Message passing sees train edges only, so test flows never leak into the
  // propagation structure. Disable to propagate over the full edge set.
  bool propagate_train_edges_only = true;

  void validate() const;
};

// One model instance: owns its tape, constants, and trained parameters.
class TrainedPattern {
 public:
  TrainedPattern(const TradeGraph& graph, const EdgeSplit& split, const ModelConfig& config);

  TrainedPattern(TrainedPattern&&) = default;
  TrainedPattern& operator=(TrainedPattern&&) = default;

  // Full-batch Adam on MSE over the train edges. Throws DivergenceError with
  // the epoch index if any quantity goes non-finite.
  void train();

  // Predicted log flow for the listed edge ids of the graph the model was
  // built on. Usable before train() (predicts from the initial parameters).
  Vec predict(const TradeGraph& graph, std::span<const int> edge_ids);

  const ModelConfig& config() const { return config_; }
  const std::vector<Scalar>& loss_history() const { return loss_history_; }
  // Trainable tensors in registration order. For the identity + linear
  // pairing that is exactly {weight, bias} of the readout.
  const std::vector<Tensor>& parameters() const { return parameters_; }

 private:
  Tensor encode();
  Tensor decode(Tensor embeddings, std::span<const int> edge_ids, Tensor edge_log_distance);
  std::size_t param_count() const;

  ModelConfig config_;
  std::unique_ptr<Tape> tape_;
  Index num_nodes_ = 0;
  Index num_edges_ = 0;
  std::vector<int> edge_src_;
  std::vector<int> edge_dst_;
  Vec edge_log_distance_;
  Vec edge_log_flow_;

  Tensor features_;
  Tensor adjacency_;  // unset for the identity encoder
  Tensor train_distance_;
  Tensor train_targets_;
  std::vector<GcnLayerParams> gcn_layers_;
  GgaeLinearParams linear_;
  MlpParams mlp_;
  std::vector<Tensor> parameters_;
  std::unique_ptr<AdamState> adam_;
  std::vector<int> train_edges_;
  std::size_t watermark_ = 0;
  std::vector<Scalar> loss_history_;
};

TrainedPattern train_pattern(const TradeGraph& graph, const EdgeSplit& split,
                             const ModelConfig& config);

// sqrt(mean((pred - target)^2)); the model variant predicts first.
Scalar rmse(const Vec& predictions, const Vec& targets);
Scalar evaluate_rmse(TrainedPattern& model, const TradeGraph& graph,
                     std::span<const int> edge_ids);

struct RunStats {
  std::uint64_t seed = 0;
  Scalar train_rmse = 0.0;
  Scalar test_rmse = 0.0;
  Scalar final_loss = 0.0;
  int epochs_run = 0;
  bool diverged = false;
  int divergence_epoch = -1;
};

struct Aggregate {
  Scalar rmse_avg = 0.0;
  Scalar rmse_max = 0.0;
  Scalar rmse_min = 0.0;
};

struct RunReport {
  ModelConfig config;  // seed holds the base seed
  int n_runs = 0;
  std::vector<RunStats> per_run;
  Aggregate aggregate;
  std::uint64_t config_hash = 0;
  std::uint64_t dataset_fingerprint = 0;
};

// kThrow propagates a DivergenceError annotated with run and epoch; kRecord
// marks the run diverged in the report and aggregates over the finished runs.
enum class DivergencePolicy { kThrow, kRecord };

// Runs one pattern n_runs times: run i uses seed base_seed + i for a fresh
// split and fresh initialization, then records test RMSE.
RunReport run_experiment(const TradeGraph& graph, const ModelConfig& config, int n_runs,
                         std::uint64_t base_seed,
                         DivergencePolicy policy = DivergencePolicy::kThrow);

// All five patterns, ordered P1..P5, with shared per-seed splits so every
// pattern sees the same train/test edges within a run.
std::vector<RunReport> reproduce_table(const TradeGraph& graph, const ModelConfig& base_config,
                                       int n_runs, std::uint64_t base_seed,
                                       DivergencePolicy policy = DivergencePolicy::kThrow);

// Hermetic stand-in for the real snapshot: node log GDPs ~ Normal(24, 2),
// each directed pair kept with probability edge_density, log distance
// ~ Normal(8, 1), and log flow = logG_u + logG_v - logd + Normal(0, sigma^2).
TradeGraph generate_synthetic_gravity(int n_countries, Scalar edge_density, Scalar noise_sigma,
                                      std::uint64_t seed);

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t dataset_fingerprint(const TradeGraph& graph);
std::uint64_t config_hash(const ModelConfig& config, int n_runs, std::uint64_t base_seed);

}  // namespace ggae
