#pragma once

#include "impgraph/geometry.hpp"
#include "impgraph/interaction_graph.hpp"
#include "impgraph/loss.hpp"
#include "impgraph/params.hpp"
#include "impgraph/scene.hpp"
#include "impgraph/scoring_head.hpp"

#include <optional>
#include <span>
#include <vector>

namespace impgraph {

/// Intermediates of one forward pass, kept for the reverse pass.
struct ForwardTape {
  FeatureGrid aggregated;       // temporal conv output, single frame
  std::vector<int> node_cells;  // N x C: winning cell (h * W + w) per node feature
  Matrix nodes;                 // V, N x C
  std::optional<GcnTape> gcn;   // absent with no_graph
  Vector descriptor;            // global average of the input grid
  Matrix fused;                 // Y
  MlpTape mlp;
};

struct ForwardResult {
  Vector scores;
  Vector logits;
  Matrix edges;  // N x N edge matrix, empty with no_graph
  ForwardTape tape;
};

/// temporal conv -> ROI pool + spatial max per proposal -> GCN -> fuse with
/// the global descriptor -> shared MLP -> sigmoid.
ForwardResult forward(const FeatureGrid& grid, std::span<const Proposal> proposals,
                      const ModelParams& params);

/// Gradient of a loss with respect to every parameter given dL/dlogits.
ModelParams backward_from_logits(const ForwardResult& fwd, const FeatureGrid& grid,
                                 const ModelParams& params, const Vector& grad_logits);

struct SampleGradients {
  LossBreakdown loss;
  ModelParams grads;
};

/// Mined loss of one sample (scaled by loss_scale) and its exact gradients.
SampleGradients backward(const ForwardResult& fwd, const FeatureGrid& grid,
                         const ModelParams& params, std::span<const int> labels,
                         double loss_scale = 1.0);

/// Mean mined loss over a batch and the matching gradient, accumulated in
/// sample order. Samples are processed in parallel when threads > 1.
struct BatchGradients {
  double loss = 0.0;
  ModelParams grads;
};

struct BatchItem {
  const FeatureGrid* grid;
  std::span<const Proposal> proposals;
};

BatchGradients batch_gradients(std::span<const BatchItem> batch, const ModelParams& params,
                               int threads = 1);
double batch_loss(std::span<const BatchItem> batch, const ModelParams& params);

}  // namespace impgraph
