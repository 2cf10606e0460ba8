#include "impgraph/interaction_graph.hpp"
#include "impgraph/model.hpp"
#include "impgraph/params.hpp"
#include "impgraph/synthetic.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace impgraph;

namespace {

ModelConfig config_for(int n, bool no_graph = false) {
  ModelConfig m;
  m.dims.n_proposals = n;
  m.no_graph = no_graph;
  return m;
}

Scene scene_for(const ModelConfig& m) {
  SceneConfig s;
  s.max_objects = std::min(8, m.dims.n_proposals);
  return generate_scene(m.dims, s, 7);
}

void BM_Forward(benchmark::State& state) {
  const ModelConfig m = config_for(static_cast<int>(state.range(0)), state.range(1) != 0);
  const ModelParams p = ModelParams::glorot(m, 1);
  const Scene s = scene_for(m);
  for (auto _ : state) benchmark::DoNotOptimize(forward(s.grid, s.train_proposals, p).scores);
}
BENCHMARK(BM_Forward)->Args({10, 0})->Args({40, 0})->Args({80, 0})->Args({40, 1});

void BM_ForwardBackward(benchmark::State& state) {
  const ModelConfig m = config_for(static_cast<int>(state.range(0)));
  const ModelParams p = ModelParams::glorot(m, 1);
  const Scene s = scene_for(m);
  const auto labels = Scene::labels_of(s.train_proposals);
  for (auto _ : state) {
    const ForwardResult f = forward(s.grid, s.train_proposals, p);
    benchmark::DoNotOptimize(backward(f, s.grid, p, labels).grads);
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(10)->Arg(40)->Arg(80);

void BM_EdgeMatrix(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Matrix is(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) is(i, j) = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(edge_matrix(is));
}
BENCHMARK(BM_EdgeMatrix)->Arg(40)->Arg(160);

void BM_BatchGradients(benchmark::State& state) {
  const ModelConfig m = config_for(40);
  const ModelParams p = ModelParams::glorot(m, 1);
  SceneConfig sc;
  sc.scenes = 8;
  const auto scenes = generate_dataset(m.dims, sc, 5);
  std::vector<BatchItem> batch;
  for (const auto& s : scenes) batch.push_back({&s.grid, s.train_proposals});
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(batch_gradients(batch, p, threads).loss);
}
BENCHMARK(BM_BatchGradients)->Arg(1)->Arg(4)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
