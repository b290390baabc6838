#pragma once

#include <span>
#include <vector>

#include "ggae/autodiff.hpp"
#include "ggae/types.hpp"

namespace ggae {

struct GravityParams {
  Scalar gamma = 1.0;
};

// Closed-form gravity prediction: gamma * gdp_u * gdp_v / distance.
Scalar gravity_flow(const GravityParams& params, Scalar gdp_u, Scalar gdp_v, Scalar distance);

// Link probability sigmoid(h_u . h_v), scalar and batched forms. The batched
// form scores edge (src[i], dst[i]) from rows of the embedding matrix.
Scalar gae_link_score(const Vec& h_u, const Vec& h_v);
Tensor gae_link_score(Tensor embeddings, std::span<const int> src, std::span<const int> dst);

// Log-space edge embedding: row i is h_src[i] + h_dst[i] - e_i * 1, where e_i
// is that edge's log distance broadcast across embedding dimensions.
Tensor ggae_edge_embedding_log(Tensor embeddings, std::span<const int> src,
                               std::span<const int> dst, Tensor edge_log_distance);

// Linear readout of an edge embedding to one predicted log flow per edge.
struct GgaeLinearParams {
  Tensor weight;  // embedding_dim x 1
  Tensor bias;    // 1 x 1

  static GgaeLinearParams glorot(Tape& tape, Index embedding_dim, Rng& rng);
  std::vector<Tensor> parameters() const;
};

Tensor ggae_decode_linear(Tensor edge_embedding, const GgaeLinearParams& params);

// Fully connected stack with ReLU between layers and a linear last layer.
struct MlpParams {
  std::vector<Tensor> weights;
  std::vector<Tensor> biases;

  static MlpParams glorot(Tape& tape, Index input_dim, Rng& rng,
                          const std::vector<Index>& widths = {32, 16, 1});
  std::vector<Tensor> parameters() const;
  Index input_dim() const;
};

Tensor mlp_forward(Tensor input, const MlpParams& params);

Tensor ggae_decode_mlp(Tensor edge_embedding, const MlpParams& params);

// Surrogate decoder: scores edges from the concatenation
// [h_src | h_dst | edge_features] fed through the MLP.
Tensor surrogate_decode(Tensor embeddings, std::span<const int> src, std::span<const int> dst,
                        Tensor edge_features, const MlpParams& params);

}  // namespace ggae
