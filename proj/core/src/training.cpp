#include "impgraph/training.hpp"

#include "impgraph/error.hpp"
#include "impgraph/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace impgraph {

ModelParams initial_params(const ModelConfig& model, const TrainConfig& train) {
  ModelParams p = ModelParams::glorot(model, train.seed);
  if (train.zero_init_head) {
    p.mlp.weights.back().setZero();
  }
  return p;
}

double mean_edge_row_sum(const ModelParams& params, const Scene& scene) {
  if (params.config.no_graph) return 0.0;
  const ForwardResult fwd = forward(scene.grid, scene.train_proposals, params);
  return fwd.edges.rowwise().sum().mean();
}

TrainResult train_model(const ModelConfig& model, const TrainConfig& train,
                        std::span<const Scene> scenes, int fold, int threads,
                        const std::function<void(const EpochLog&)>& on_epoch, long max_steps) {
  model.validate();
  train.validate();
  if (scenes.empty()) fail(ErrorKind::kUsage, "train_model: no training scenes");

  TrainResult result;
  result.params = initial_params(model, train);
  OptimizerState opt = OptimizerState::for_params(result.params, train);

  std::mt19937_64 rng(train.seed ^ (0x5eedULL + static_cast<std::uint64_t>(fold)));
  std::vector<std::size_t> order(scenes.size());
  std::iota(order.begin(), order.end(), 0);

  const auto batch = static_cast<std::size_t>(train.batch_size);
  long steps = 0;
  for (int epoch = 1; epoch <= train.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochLog log;
    log.fold = fold;
    log.epoch = epoch;
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      if (max_steps >= 0 && steps >= max_steps) break;
      std::vector<BatchItem> items;
      for (std::size_t k = start; k < std::min(order.size(), start + batch); ++k) {
        const Scene& s = scenes[order[k]];
        items.push_back(BatchItem{&s.grid, s.train_proposals});
      }
      BatchGradients g = batch_gradients(items, result.params, threads);
      if (!std::isfinite(g.loss)) {
        std::ostringstream msg;
        msg << "non-finite loss at step " << opt.step << " (fold " << fold << ", epoch " << epoch
            << ")";
        fail(ErrorKind::kNumerical, msg.str());
      }
      sgd_step(result.params, g.grads, opt);
      result.step_losses.push_back(g.loss);
      loss_sum += g.loss;
      ++log.steps;
      ++steps;
    }
    log.mean_loss = log.steps ? loss_sum / log.steps : 0.0;
    log.edge_row_sum = mean_edge_row_sum(result.params, scenes.front());
    result.epochs.push_back(log);
    if (on_epoch) on_epoch(log);
    if (max_steps >= 0 && steps >= max_steps) break;
  }
  return result;
}

Scorer model_scorer(const ModelParams& params) {
  return [&params](const Scene& s) {
    const ForwardResult fwd = forward(s.grid, s.test_proposals, params);
    return std::vector<double>(fwd.scores.data(), fwd.scores.data() + fwd.scores.size());
  };
}

CrossValidation cross_validate(const ModelConfig& model, const TrainConfig& train,
                               std::span<const Scene> scenes, int threads,
                               const std::function<void(const EpochLog&)>& on_epoch) {
  CrossValidation cv;
  cv.report = evaluate_splits(
      scenes,
      [&](int fold, std::span<const Scene> train_scenes) {
        TrainResult r = train_model(model, train, train_scenes, fold, threads, on_epoch);
        cv.epochs.insert(cv.epochs.end(), r.epochs.begin(), r.epochs.end());
        auto& slot = cv.fold_params[static_cast<std::size_t>(fold - 1)];
        slot = std::move(r.params);
        return model_scorer(slot);
      },
      threads);
  return cv;
}

}  // namespace impgraph
