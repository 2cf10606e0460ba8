#pragma once

#include "impgraph/config.hpp"
#include "impgraph/evaluation.hpp"
#include "impgraph/optimizer.hpp"
#include "impgraph/params.hpp"
#include "impgraph/scene.hpp"

#include <functional>
#include <span>
#include <vector>

namespace impgraph {

struct EpochLog {
  int fold = 0;
  int epoch = 0;
  double mean_loss = 0.0;
  int steps = 0;
  double edge_row_sum = 0.0;  // mean row sum of E on the first training scene
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochLog> epochs;
  std::vector<double> step_losses;
};

/// Initial parameters for a run: Glorot everywhere, MLP output layer zeroed
/// when zero_init_head is set.
ModelParams initial_params(const ModelConfig& model, const TrainConfig& train);

/// Minibatch SGD over the training proposals of the given scenes. Batches are
/// drawn from a seeded shuffle each epoch. max_steps < 0 means no cap.
TrainResult train_model(const ModelConfig& model, const TrainConfig& train,
                        std::span<const Scene> scenes, int fold = 0, int threads = 1,
                        const std::function<void(const EpochLog&)>& on_epoch = {},
                        long max_steps = -1);

/// Scores a scene's test proposals with the model.
Scorer model_scorer(const ModelParams& params);

/// Mean row sum of the edge matrix for one scene (0 with no_graph).
double mean_edge_row_sum(const ModelParams& params, const Scene& scene);

struct CrossValidation {
  ApReport report;
  std::array<ModelParams, 3> fold_params;
  std::vector<EpochLog> epochs;
};

/// Trains one model per fold on the other two splits and evaluates it on the
/// held-out split.
CrossValidation cross_validate(const ModelConfig& model, const TrainConfig& train,
                               std::span<const Scene> scenes, int threads = 1,
                               const std::function<void(const EpochLog&)>& on_epoch = {});

}  // namespace impgraph
