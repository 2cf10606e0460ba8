#include "impgraph/gradcheck.hpp"

#include "impgraph/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

namespace impgraph {

ModelConfig gradcheck_config() {
  ModelConfig cfg;
  cfg.dims = GridDims{6, 2, 4, 4, 8};
  cfg.edge_dim = 8;
  cfg.roi_size = 2;
  cfg.mlp_hidden = {8, 4};
  return cfg;
}

Scene random_check_scene(const ModelConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const GridDims& d = config.dims;

  Scene s;
  s.seed = seed;
  s.grid = FeatureGrid(d.frames, d.height, d.width, d.channels);
  for (double& v : s.grid.data) v = 0.05 + unit(rng);

  for (int i = 0; i < d.n_proposals; ++i) {
    const double w = 0.25 + 0.5 * unit(rng);
    const double h = 0.25 + 0.5 * unit(rng);
    const double x1 = unit(rng) * (1.0 - w);
    const double y1 = unit(rng) * (1.0 - h);
    Proposal p{BBox::make(x1, y1, std::min(1.0, x1 + w), std::min(1.0, y1 + h)), false, 0, 1.0};
    p.label = unit(rng) < 0.35 ? 1 : 0;
    s.train_proposals.push_back(p);
  }
  s.train_proposals.front().label = 1;
  s.test_proposals = s.train_proposals;
  for (const auto& p : s.train_proposals) {
    if (p.label) s.gt_boxes.push_back(p.box);
  }
  return s;
}

std::string GradCheckReport::to_text() const {
  std::ostringstream out;
  out.precision(3);
  for (const auto& g : groups) {
    out << (g.passed ? "PASS " : "FAIL ") << g.name << " n=" << g.count
        << " max_rel=" << std::scientific << g.max_rel_error << " max_abs=" << g.max_abs_error
        << std::defaultfloat << "\n";
  }
  out << (passed ? "PASS" : "FAIL") << " gradient check (tolerance " << tolerance << ", "
      << seconds << " s)\n";
  return out.str();
}

GradCheckReport gradient_check(const ModelConfig& config, std::uint64_t seed,
                               const GradCheckOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  ModelParams params = ModelParams::glorot(config, seed);

  std::vector<Scene> scenes;
  for (int k = 0; k < options.samples; ++k) {
    scenes.push_back(random_check_scene(config, seed * 1000003ULL + static_cast<std::uint64_t>(k)));
  }
  std::vector<BatchItem> batch;
  for (const auto& s : scenes) batch.push_back(BatchItem{&s.grid, s.train_proposals});

  BatchGradients analytic = batch_gradients(batch, params, 1);
  if (!options.corrupt_param.empty()) {
    analytic.grads.for_each([&](ParamView v) {
      if (v.name == options.corrupt_param) {
        for (double& x : v.values) x *= options.corrupt_factor;
      }
    });
  }
  std::vector<ConstParamView> grads;
  analytic.grads.for_each([&](ConstParamView v) { grads.push_back(v); });

  GradCheckReport report;
  report.tolerance = options.tolerance;
  std::size_t index = 0;
  params.for_each([&](ParamView v) {
    GradCheckGroup group;
    group.name = v.name;
    group.count = v.values.size();
    const auto& g = grads[index++];
    for (std::size_t k = 0; k < v.values.size(); ++k) {
      const double orig = v.values[k];
      v.values[k] = orig + options.step;
      const double plus = batch_loss(batch, params);
      v.values[k] = orig - options.step;
      const double minus = batch_loss(batch, params);
      v.values[k] = orig;
      const double numeric = (plus - minus) / (2.0 * options.step);
      const double a = g.values[k];
      const double abs_err = std::abs(a - numeric);
      const double denom = std::max({std::abs(a), std::abs(numeric), options.abs_floor});
      group.max_abs_error = std::max(group.max_abs_error, abs_err);
      group.max_rel_error = std::max(group.max_rel_error, abs_err / denom);
    }
    group.passed = group.max_rel_error < options.tolerance;
    report.passed = report.passed && group.passed;
    report.groups.push_back(group);
  });
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace impgraph
