#include "ggae/decoder.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace ggae {

namespace {

void check_edge_lists(std::span<const int> src, std::span<const int> dst) {
  if (src.size() != dst.size()) {
    std::ostringstream msg;
    msg << "edge endpoint lists disagree: " << src.size() << " sources vs " << dst.size()
        << " destinations";
    throw DimensionError(msg.str());
  }
}

std::vector<int> to_vector(std::span<const int> ids) { return {ids.begin(), ids.end()}; }

}  // namespace

Scalar gravity_flow(const GravityParams& params, Scalar gdp_u, Scalar gdp_v, Scalar distance) {
  const auto reject = [](const char* name, Scalar value) {
    std::ostringstream msg;
    msg << "gravity_flow: " << name << " must be positive, got " << value;
    throw DomainError(msg.str());
  };
  if (!(params.gamma > 0.0)) reject("gamma", params.gamma);
  if (!(gdp_u > 0.0)) reject("gdp_u", gdp_u);
  if (!(gdp_v > 0.0)) reject("gdp_v", gdp_v);
  if (!(distance > 0.0)) reject("distance", distance);
  return params.gamma * gdp_u * gdp_v / distance;
}

Scalar gae_link_score(const Vec& h_u, const Vec& h_v) {
  if (h_u.size() != h_v.size()) {
    std::ostringstream msg;
    msg << "gae_link_score: embedding sizes disagree: " << h_u.size() << " vs " << h_v.size();
    throw DimensionError(msg.str());
  }
  const Scalar x = h_u.dot(h_v);
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (1.0 + e);
}

Tensor gae_link_score(Tensor embeddings, std::span<const int> src, std::span<const int> dst) {
  check_edge_lists(src, dst);
  Tape* tape = embeddings.tape();
  Tensor h_src = gather_rows(embeddings, to_vector(src));
  Tensor h_dst = gather_rows(embeddings, to_vector(dst));
  // Row-wise dot product as (h_src o h_dst) * ones.
  Tensor ones = tape->constant(Mat::Ones(embeddings.cols(), 1));
  return sigmoid(matmul(hadamard(h_src, h_dst), ones));
}

Tensor ggae_edge_embedding_log(Tensor embeddings, std::span<const int> src,
                               std::span<const int> dst, Tensor edge_log_distance) {
  check_edge_lists(src, dst);
  if (edge_log_distance.cols() != 1 ||
      edge_log_distance.rows() != static_cast<Index>(src.size())) {
    std::ostringstream msg;
    msg << "ggae_edge_embedding_log: expected " << src.size() << "x1 edge distances, got "
        << edge_log_distance.rows() << "x" << edge_log_distance.cols();
    throw DimensionError(msg.str());
  }
  Tensor h_src = gather_rows(embeddings, to_vector(src));
  Tensor h_dst = gather_rows(embeddings, to_vector(dst));
  Tensor spread = broadcast_cols(edge_log_distance, embeddings.cols());
  return sub(add(h_src, h_dst), spread);
}

GgaeLinearParams GgaeLinearParams::glorot(Tape& tape, Index embedding_dim, Rng& rng) {
  GgaeLinearParams params;
  params.weight = tape.parameter(glorot_uniform(embedding_dim, 1, rng));
  params.bias = tape.parameter(Mat::Zero(1, 1));
  return params;
}

std::vector<Tensor> GgaeLinearParams::parameters() const { return {weight, bias}; }

Tensor ggae_decode_linear(Tensor edge_embedding, const GgaeLinearParams& params) {
  return add_rowwise(matmul(edge_embedding, params.weight), params.bias);
}

MlpParams MlpParams::glorot(Tape& tape, Index input_dim, Rng& rng,
                            const std::vector<Index>& widths) {
  if (widths.empty()) {
    throw ConfigError("mlp: need at least one layer width");
  }
  if (input_dim <= 0) {
    throw ConfigError("mlp: input dimension must be positive, got " + std::to_string(input_dim));
  }
  MlpParams params;
  Index fan_in = input_dim;
  for (const Index width : widths) {
    if (width <= 0) {
      throw ConfigError("mlp: layer width must be positive, got " + std::to_string(width));
    }
    params.weights.push_back(tape.parameter(glorot_uniform(fan_in, width, rng)));
    params.biases.push_back(tape.parameter(Mat::Zero(1, width)));
    fan_in = width;
  }
  return params;
}

std::vector<Tensor> MlpParams::parameters() const {
  std::vector<Tensor> out;
  out.reserve(weights.size() + biases.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out.push_back(weights[i]);
    out.push_back(biases[i]);
  }
  return out;
}

Index MlpParams::input_dim() const {
  if (weights.empty()) {
    throw ContractError("mlp: parameters not initialized");
  }
  return weights.front().rows();
}

Tensor mlp_forward(Tensor input, const MlpParams& params) {
  if (params.weights.empty() || params.weights.size() != params.biases.size()) {
    throw ContractError("mlp_forward: malformed parameter stack");
  }
  Tensor h = input;
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    h = add_rowwise(matmul(h, params.weights[i]), params.biases[i]);
    if (i + 1 < params.weights.size()) h = relu(h);
  }
  return h;
}

Tensor ggae_decode_mlp(Tensor edge_embedding, const MlpParams& params) {
  return mlp_forward(edge_embedding, params);
}

Tensor surrogate_decode(Tensor embeddings, std::span<const int> src, std::span<const int> dst,
                        Tensor edge_features, const MlpParams& params) {
  check_edge_lists(src, dst);
  if (edge_features.rows() != static_cast<Index>(src.size())) {
    std::ostringstream msg;
    msg << "surrogate_decode: " << src.size() << " edges but " << edge_features.rows()
        << " feature rows";
    throw DimensionError(msg.str());
  }
  Tensor h_src = gather_rows(embeddings, to_vector(src));
  Tensor h_dst = gather_rows(embeddings, to_vector(dst));
  Tensor x = concat_cols(concat_cols(h_src, h_dst), edge_features);
  return mlp_forward(x, params);
}

}  // namespace ggae
