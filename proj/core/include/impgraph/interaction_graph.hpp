#pragma once

#include "impgraph/tensor.hpp"

#include <array>

namespace impgraph {

/// Learned directional edge parameters. gamma and gamma_prime are C x d
/// projections for the source and target node; phi (length 2d) scores their
/// concatenation. No bias terms anywhere.
struct EdgeParams {
  Matrix gamma;
  Matrix gamma_prime;
  Vector phi;

  int channels() const { return static_cast<int>(gamma.rows()); }
  int dim() const { return static_cast<int>(gamma.cols()); }
};

inline constexpr int kGcnLayers = 3;

/// Square C x C weights for each stacked graph convolution.
struct GcnWeights {
  std::array<Matrix, kGcnLayers> layers;
};

/// IS(i, j) = phi . (gamma^T v_i || gamma_prime^T v_j). Not symmetric in general.
Matrix interaction_scores(const Matrix& nodes, const EdgeParams& params);

/// Row-wise softmax of the interaction scores, plus the identity when
/// self_attention is set. Softmax uses row-max subtraction and a
/// permutation-invariant denominator, so permuting nodes permutes E exactly.
Matrix edge_matrix(const Matrix& scores, bool self_attention = true);

/// ReLU(E * V * W).
Matrix graph_conv_layer(const Matrix& edges, const Matrix& nodes, const Matrix& weights);

/// Everything gcn_backward needs. E is computed once from the input node
/// features and shared by all layers.
struct GcnTape {
  Matrix scores;                                // IS
  Matrix softmax;                               // row softmax of IS
  Matrix edges;                                 // softmax (+ I)
  std::array<Matrix, kGcnLayers + 1> features;  // features[0] = V, features[l + 1] = layer l output
  std::array<Matrix, kGcnLayers> aggregated;    // E * features[l]
  std::array<Matrix, kGcnLayers> preact;        // E * features[l] * W_l
  int edge_evaluations = 0;                     // how many times E was built
  bool self_attention = true;

  const Matrix& output() const { return features[kGcnLayers]; }
};

GcnTape gcn_forward(const Matrix& nodes, const EdgeParams& edge, const GcnWeights& gcn,
                    bool self_attention = true);

struct GcnGradients {
  Matrix nodes;  // dL/dV, flowing through both the layers and E
  EdgeParams edge;
  GcnWeights gcn;
};

/// Reverse pass of gcn_forward given dL/dU. Gradients flow through the
/// softmax into gamma, gamma_prime and phi.
GcnGradients gcn_backward(const GcnTape& tape, const EdgeParams& edge, const GcnWeights& gcn,
                          const Matrix& grad_output);

/// Row sums, diagonal and off-diagonal ranges of an edge matrix.
bool edge_invariants_hold(const Matrix& edges, bool self_attention = true,
                          double row_tol = 1e-9);

}  // namespace impgraph
