// Acceptance gate. Prints one PASS/FAIL line per criterion; with arguments,
// runs only the listed criteria. Exit status is the number of failures.

#include "../common/helpers.hpp"
#include "../common/oracles.hpp"

#include "impgraph/dataset_io.hpp"
#include "impgraph/gradcheck.hpp"
#include "impgraph/interaction_graph.hpp"
#include "impgraph/loss.hpp"
#include "impgraph/model.hpp"
#include "impgraph/parallel.hpp"
#include "impgraph/synthetic.hpp"
#include "impgraph/training.hpp"
#include "impgraph/weights_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

using namespace impgraph;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

int worker_threads() {
  return std::max(threads_from_env(), static_cast<int>(std::thread::hardware_concurrency()));
}

// ------------------------------------------------------------------------

Outcome gradient_fidelity() {
  const auto t0 = Clock::now();
  const GradCheckReport r = gradient_check(gradcheck_config(), 0);
  const double secs = seconds_since(t0);
  double worst = 0.0;
  for (const auto& g : r.groups) worst = std::max(worst, g.max_rel_error);
  return {r.passed && r.tolerance <= 1e-4 && secs < 60.0,
          fmt("%.0f parameter groups, max rel error %.2e, %.1f s", double(r.groups.size()), worst, secs)};
}

Outcome edge_invariants() {
  std::mt19937_64 rng(2);
  int bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 40);
    Matrix is;
    if (trial % 2 == 0) {
      // Spread up to 20: every softmax entry stays above double epsilon, so
      // 1 + entry is representable as > 1.
      is = testing::random_matrix(n, n, rng, 1.0 + static_cast<double>(rng() % 10));
    } else {
      // Scores produced by the learned edge function itself.
      const int c = 1 + static_cast<int>(rng() % 16), d = 1 + static_cast<int>(rng() % 8);
      EdgeParams p{testing::random_matrix(c, d, rng), testing::random_matrix(c, d, rng),
                   testing::random_matrix(2 * d, 1, rng).col(0)};
      is = interaction_scores(testing::random_matrix(n, c, rng, 2.0), p);
    }
    const Matrix e = edge_matrix(is, true);
    bool ok = true;
    for (int i = 0; i < n; ++i) {
      if (std::abs(e.row(i).sum() - 2.0) > 1e-9) ok = false;
      for (int j = 0; j < n; ++j) {
        const double v = e(i, j);
        if (i == j ? !(v > 1.0 && v <= 2.0) : !(v > 0.0 && v < 1.0)) ok = false;
      }
    }
    bad += ok ? 0 : 1;
  }
  int saturated_bad = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 40);
    Matrix is(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) is(i, j) = rng() % 2 ? 1000.0 : -1000.0;
    const Matrix e = edge_matrix(is, true);
    bool ok = e.allFinite();
    for (int i = 0; i < n; ++i) ok = ok && std::abs(e.row(i).sum() - 2.0) <= 1e-9;
    saturated_bad += ok ? 0 : 1;
  }
  return {bad == 0 && saturated_bad == 0,
          fmt("%.0f/1000 random matrices and %.0f/200 saturated ones violate", bad, saturated_bad)};
}

Outcome ap_oracle() {
  std::mt19937_64 rng(3);
  int mismatches = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<GroundTruth> gts;
    std::vector<Prediction> preds;
    const int n_gt = static_cast<int>(rng() % 5);
    const int n_pred = static_cast<int>(rng() % 7);
    const int samples = 1 + static_cast<int>(rng() % 2);
    for (int g = 0; g < n_gt; ++g) gts.push_back({testing::random_box(rng, 0.2), static_cast<int>(rng() % samples)});
    for (int k = 0; k < n_pred; ++k) {
      BBox b = testing::random_box(rng, 0.2);
      int s = static_cast<int>(rng() % samples);
      if (!gts.empty() && rng() % 3 != 0) {
        const auto& g = gts[rng() % gts.size()];
        b = g.box;
        s = g.sample_id;
        const double dy = std::min(0.05 * static_cast<double>(rng() % 3), 1.0 - b.y2);
        b = BBox::make(b.x1, b.y1 + dy, b.x2, b.y2 + dy);
      }
      preds.push_back({b, static_cast<double>(rng() % 4), s});
    }
    sort_predictions(preds);
    const auto flags = match_predictions(preds, gts);
    if (flags != testing::greedy_oracle(preds, gts)) ++mismatches;
    const double diff = std::abs(eleven_point_ap(flags, n_gt).ap - testing::eleven_point_oracle(flags, n_gt));
    worst = std::max(worst, diff);
  }
  const BBox box = BBox::make(0.2, 0.2, 0.5, 0.6);
  const std::vector<Prediction> dup{{box, 0.8, 0}, {box, 0.8, 0}};
  const std::vector<GroundTruth> one{{box, 0}};
  const auto f = match_predictions(dup, one);
  const int tps = static_cast<int>(std::count(f.begin(), f.end(), true));
  return {mismatches == 0 && worst <= 1e-12 && tps == 1,
          fmt("%.0f matching mismatches, max AP diff %.1e, duplicate case %.0f TP", mismatches, worst, tps)};
}

Outcome mining_law() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  int quota_bad = 0;
  int perturb_bad = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 80);
    Vector s(n);
    std::vector<int> labels(n);
    const int pos_rate = 1 + static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i) {
      s(i) = u(rng);
      labels[i] = static_cast<int>(rng() % pos_rate) == 0;
    }
    const int n_pos = static_cast<int>(std::count(labels.begin(), labels.end(), 1));
    const LossBreakdown l = mined_loss(s, labels);
    if (l.n_neg != std::min(std::max(5 * n_pos, 10), n - n_pos)) ++quota_bad;

    const std::set<int> chosen(l.selected_negative_indices.begin(), l.selected_negative_indices.end());
    for (int i = 0; i < n; ++i) {
      if (labels[i] || chosen.count(i)) continue;
      // Lower score means lower loss, so the negative stays unselected.
      Vector t = s;
      t(i) *= u(rng);
      const LossBreakdown m = mined_loss(t, labels);
      if (m.total != l.total ||
          std::set<int>(m.selected_negative_indices.begin(), m.selected_negative_indices.end()) != chosen) {
        ++perturb_bad;
      }
    }
  }
  const LossBreakdown flat = mined_loss(Vector::Constant(40, 0.5), std::vector<int>(40, 0));
  const double err = std::abs(flat.total - 10.0 * std::log(2.0));
  return {quota_bad == 0 && perturb_bad == 0 && err <= 1e-12,
          fmt("%.0f quota violations, %.0f loss changes from unselected negatives, |all-neg - 10 ln2| = %.1e",
              quota_bad, perturb_bad, err)};
}

Outcome permutation_equivariance() {
  ModelConfig cfg;
  const ModelParams params = ModelParams::glorot(cfg, 11);
  SceneConfig scene_cfg;
  std::mt19937_64 rng(5);
  double worst = 0.0;
  int edge_bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Scene s = generate_scene(cfg.dims, scene_cfg, scene_seed(5, trial));
    std::vector<int> perm(cfg.dims.n_proposals);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Proposal> permuted;
    for (int i : perm) permuted.push_back(s.test_proposals[i]);
    const ForwardResult a = forward(s.grid, s.test_proposals, params);
    const ForwardResult b = forward(s.grid, permuted, params);
    for (int i = 0; i < cfg.dims.n_proposals; ++i) {
      worst = std::max(worst, std::abs(b.scores(i) - a.scores(perm[i])));
      for (int j = 0; j < cfg.dims.n_proposals; ++j) {
        if (b.edges(i, j) != a.edges(perm[i], perm[j])) ++edge_bad;
      }
    }
  }
  return {worst <= 1e-9 && edge_bad == 0,
          fmt("max score diff %.1e, %.0f edge entries differ", worst, edge_bad)};
}

// ------------------------------------------------------------------------

struct Ablations {
  std::vector<Scene> scenes;
  double seconds = 0.0;
};

double cv_ap(const ModelConfig& model, const std::vector<Scene>& scenes) {
  return cross_validate(model, TrainConfig{}, scenes, worker_threads()).report.avg_ap;
}

ModelConfig variant(bool no_graph, bool no_global, bool no_self) {
  ModelConfig m;
  m.no_graph = no_graph;
  m.no_global_descriptor = no_global;
  m.no_self_attention = no_self;
  return m;
}

std::vector<Scene> default_benchmark(LaneMode mode = LaneMode::kFixed) {
  SceneConfig cfg;
  cfg.lane_mode = mode;
  return generate_dataset(GridDims{}, cfg, 0, worker_threads());
}

Outcome graph_ablation() {
  const auto t0 = Clock::now();
  const auto scenes = default_benchmark();
  const double full = cv_ap(variant(false, false, false), scenes);
  const double no_graph = cv_ap(variant(true, false, false), scenes);
  const double secs = seconds_since(t0);
  const double gap = 100.0 * (full - no_graph);
  return {gap >= 5.0 && secs < 1800.0,
          fmt("full %.1f vs no_graph %.1f avgAP, gap %+.1f points (need >= 5), %.0f s", 100 * full,
              100 * no_graph, gap, secs)};
}

Outcome global_ablation() {
  const auto scenes = default_benchmark(LaneMode::kContext);
  const double full = cv_ap(variant(false, false, false), scenes);
  const double no_global = cv_ap(variant(false, true, false), scenes);
  return {full > no_global, fmt("context lanes: full %.1f vs no_global_descriptor %.1f avgAP, gap %+.1f",
                                100 * full, 100 * no_global, 100 * (full - no_global))};
}

Outcome self_attention_ablation() {
  const auto scenes = default_benchmark();
  const double full = cv_ap(variant(false, false, false), scenes);
  const double no_graph = cv_ap(variant(true, false, false), scenes);
  const double no_self = cv_ap(variant(false, false, true), scenes);
  return {no_self < full && no_self < no_graph,
          fmt("no_self_attention %.1f vs full %.1f and no_graph %.1f avgAP", 100 * no_self, 100 * full,
              100 * no_graph)};
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "impgraph_acceptance";
  fs::create_directories(dir);
  ModelConfig model;
  model.dims.n_proposals = 12;
  model.mlp_hidden = {32};
  SceneConfig scene_cfg;
  scene_cfg.scenes = 24;
  scene_cfg.max_objects = 8;
  TrainConfig train;
  train.epochs = 3;
  train.seed = 17;

  const auto scenes_a = generate_dataset(model.dims, scene_cfg, 17, 1);
  const auto scenes_b = generate_dataset(model.dims, scene_cfg, 17, worker_threads());
  write_dataset((dir / "a.igds").string(), scenes_a);
  write_dataset((dir / "b.igds").string(), scenes_b);
  const auto reread = read_dataset((dir / "a.igds").string());
  write_dataset((dir / "a2.igds").string(), reread);

  const TrainResult ra = train_model(model, train, scenes_a, 0, 1);
  const TrainResult rb = train_model(model, train, reread, 0, worker_threads());
  write_weights((dir / "a.igwt").string(), ra.params);
  write_weights((dir / "b.igwt").string(), rb.params);
  const ModelParams back = read_weights((dir / "a.igwt").string());
  write_weights((dir / "a2.igwt").string(), back);

  auto bytes = [&](const char* name) {
    std::ifstream in(dir / name, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  const bool data_same = bytes("a.igds") == bytes("b.igds") && bytes("a.igds") == bytes("a2.igds");
  const bool data_exact = reread == scenes_a;
  const bool weights_same = bytes("a.igwt") == bytes("b.igwt");
  const bool weights_exact = back == ra.params && bytes("a.igwt") == bytes("a2.igwt");
  std::string detail = std::string("dataset files ") + (data_same ? "identical" : "DIFFER") +
                       ", dataset round-trip " + (data_exact ? "exact" : "LOSSY") +
                       ", weight files " + (weights_same ? "identical" : "DIFFER") +
                       ", weight round-trip " + (weights_exact ? "exact" : "LOSSY");
  return {data_same && data_exact && weights_same && weights_exact, detail};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {"gradient fidelity", gradient_fidelity},
      {"edge-matrix invariants", edge_invariants},
      {"AP oracle equivalence", ap_oracle},
      {"hard-negative mining law", mining_law},
      {"permutation equivariance", permutation_equivariance},
      {"interaction graph ablation", graph_ablation},
      {"global descriptor ablation", global_ablation},
      {"self-attention ablation", self_attention_ablation},
      {"determinism and persistence", determinism},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::cerr << "usage: " << argv[0] << " [criterion 1-" << criteria.size() << "]...\n";
      return 64;
    }
    selected.push_back(k);
  }
  if (selected.empty()) {
    selected.resize(criteria.size());
    std::iota(selected.begin(), selected.end(), 1);
  }

  int failures = 0;
  for (int k : selected) {
    const Criterion& c = criteria[static_cast<std::size_t>(k - 1)];
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << k << " " << c.name << ": " << o.detail << std::endl;
  }
  return failures;
}
