#pragma once

#include <span>
#include <vector>

#include "ggae/autodiff.hpp"
#include "ggae/dataset.hpp"
#include "ggae/types.hpp"

namespace ggae {

// Symmetric-normalized adjacency D^{-1/2} (A + I) D^{-1/2}, the propagation
// operator shared by every GCN layer on a given graph.
struct NormalizedAdjacency {
  Mat matrix;
};

enum class Activation { kNone, kRelu };

struct GcnLayerParams {
  Tensor weight;
  Activation activation = Activation::kNone;
};

// Builds the normalized adjacency from the listed edges only. Directed edges
// are first merged into an undirected structure, then self loops are added so
// isolated nodes keep a defined degree.
NormalizedAdjacency normalize_adjacency(const TradeGraph& graph, std::span<const int> edge_ids);

// Stacks GCN layers: H <- act(S * H * W) per layer, starting from the raw
// node features. The adjacency participates as a constant on the tape.
Tensor gcn_forward(Tensor adjacency, Tensor features, const std::vector<GcnLayerParams>& layers);
Tensor gcn_forward(const NormalizedAdjacency& adjacency, Tensor features,
                   const std::vector<GcnLayerParams>& layers);

// Pass-through encoder: the embedding of each node is its feature row.
Tensor identity_encode(Tensor features);

}  // namespace ggae
