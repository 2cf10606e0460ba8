#include "impgraph/optimizer.hpp"

#include "impgraph/error.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace impgraph {

OptimizerState OptimizerState::for_params(const ModelParams& params, const TrainConfig& train) {
  OptimizerState s;
  s.lr = train.lr;
  s.momentum = train.momentum;
  s.decay = train.decay;
  s.l2 = train.l2;
  s.velocity = ModelParams::zeros(params.config);
  return s;
}

void sgd_step(ModelParams& params, const ModelParams& grads, OptimizerState& state) {
  std::vector<ConstParamView> g;
  grads.for_each([&](ConstParamView v) { g.push_back(v); });
  std::vector<ParamView> vel;
  state.velocity.for_each([&](ParamView v) { vel.push_back(v); });

  std::vector<ParamView> theta;
  params.for_each([&](ParamView v) { theta.push_back(v); });
  if (g.size() != theta.size() || vel.size() != theta.size()) {
    fail(ErrorKind::kMismatch, "sgd_step: parameter, gradient and velocity layouts differ");
  }
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (g[i].values.size() != theta[i].values.size() ||
        vel[i].values.size() != theta[i].values.size()) {
      fail(ErrorKind::kMismatch, "sgd_step: shape mismatch at " + theta[i].name);
    }
    for (std::size_t k = 0; k < g[i].values.size(); ++k) {
      if (!std::isfinite(g[i].values[k])) {
        std::ostringstream msg;
        msg << "non-finite gradient in " << g[i].name << "[" << k << "] at step " << state.step;
        fail(ErrorKind::kNumerical, msg.str());
      }
    }
  }

  const double lr = state.effective_lr();
  for (std::size_t i = 0; i < theta.size(); ++i) {
    auto th = theta[i].values;
    auto v = vel[i].values;
    auto gr = g[i].values;
    for (std::size_t k = 0; k < th.size(); ++k) {
      const double gk = gr[k] + state.l2 * th[k];
      v[k] = state.momentum * v[k] - lr * gk;
      th[k] += v[k];
    }
  }
  ++state.step;
}

}  // namespace impgraph
