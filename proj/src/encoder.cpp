#include "ggae/encoder.hpp"

#include <cmath>
#include <string>

namespace ggae {

NormalizedAdjacency normalize_adjacency(const TradeGraph& graph, std::span<const int> edge_ids) {
  const Index n = graph.num_nodes();
  if (n == 0) {
    throw EmptyGraphError("normalize_adjacency: graph has no nodes");
  }

  Mat a = Mat::Zero(n, n);
  for (const int id : edge_ids) {
    if (id < 0 || id >= graph.num_edges()) {
      throw ContractError("normalize_adjacency: edge id " + std::to_string(id) +
                          " out of range [0, " + std::to_string(graph.num_edges()) + ")");
    }
    const auto [u, v] = graph.edges[static_cast<std::size_t>(id)];
    a(u, v) = 1.0;
    a(v, u) = 1.0;
  }
  a.diagonal().setOnes();  // self loops; also gives isolated nodes degree 1

  Vec inv_sqrt_degree = a.rowwise().sum().array().rsqrt();
  NormalizedAdjacency result;
  result.matrix = inv_sqrt_degree.asDiagonal() * a * inv_sqrt_degree.asDiagonal();
  return result;
}

Tensor gcn_forward(Tensor adjacency, Tensor features, const std::vector<GcnLayerParams>& layers) {
  Index width = features.cols();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    if (layers[k].weight.rows() != width) {
      throw ConfigError("gcn_forward: layer " + std::to_string(k) + " expects input width " +
                        std::to_string(layers[k].weight.rows()) + " but receives " +
                        std::to_string(width));
    }
    width = layers[k].weight.cols();
  }
  Tensor h = features;
  for (const GcnLayerParams& layer : layers) {
    h = matmul(matmul(adjacency, h), layer.weight);
    if (layer.activation == Activation::kRelu) h = relu(h);
  }
  return h;
}

Tensor gcn_forward(const NormalizedAdjacency& adjacency, Tensor features,
                   const std::vector<GcnLayerParams>& layers) {
  Tensor s = features.tape()->constant(adjacency.matrix);
  return gcn_forward(s, features, layers);
}

Tensor identity_encode(Tensor features) { return features; }

}  // namespace ggae
