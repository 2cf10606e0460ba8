#pragma once

#include "impgraph/config.hpp"
#include "impgraph/params.hpp"

#include <cstdint>

namespace impgraph {

/// SGD with momentum, inverse-time learning-rate decay and coupled L2.
struct OptimizerState {
  double lr = 0.0003;
  double momentum = 0.9;
  double decay = 0.0001;
  double l2 = 0.0005;
  ModelParams velocity;
  std::int64_t step = 0;

  static OptimizerState for_params(const ModelParams& params, const TrainConfig& train);

  double effective_lr() const { return lr / (1.0 + decay * static_cast<double>(step)); }
};

/// g' = g + l2 * theta; v = momentum * v - effective_lr * g'; theta += v.
/// Throws kNumerical naming the parameter if a gradient is not finite.
void sgd_step(ModelParams& params, const ModelParams& grads, OptimizerState& state);

}  // namespace impgraph
