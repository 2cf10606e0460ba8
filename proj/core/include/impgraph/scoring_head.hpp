#pragma once

#include "impgraph/tensor.hpp"

#include <vector>

namespace impgraph {

/// Shared per-node MLP: weights[l] is (in x out), ReLU between layers,
/// single logit at the end.
struct MlpParams {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  int input_dim() const { return weights.empty() ? 0 : static_cast<int>(weights.front().rows()); }
  std::size_t depth() const { return weights.size(); }
};

/// Row i is (u_i || d): node features first, global descriptor second.
Matrix fuse_global(const Matrix& updated, const Vector& descriptor);

struct MlpTape {
  std::vector<Matrix> inputs;  // inputs[l] feeds layer l; inputs[0] = Y
  std::vector<Matrix> preact;  // inputs[l] * W_l + b_l
  Vector logits;
  Vector scores;  // sigmoid(logits)
};

MlpTape mlp_forward(const Matrix& fused, const MlpParams& mlp);

/// sigmoid(MLP(Y_i)) for each row.
Vector score_nodes(const Matrix& fused, const MlpParams& mlp);

struct MlpGradients {
  MlpParams params;
  Matrix input;  // dL/dY
};

MlpGradients mlp_backward(const MlpTape& tape, const MlpParams& mlp, const Vector& grad_logits);

double sigmoid(double x);

}  // namespace impgraph
