#include "../common/helpers.hpp"
#include "../common/oracles.hpp"

#include "impgraph/error.hpp"
#include "impgraph/evaluation.hpp"

#include <doctest.h>

#include <cmath>

using namespace impgraph;

TEST_CASE("eleven point ap on hand-worked rankings") {
  CHECK(eleven_point_ap({true, true}, 2).ap == 1.0);
  CHECK(eleven_point_ap({false, false}, 2).ap == 0.0);
  // TP, FP, TP with 2 GT: recall 0.5 at precision 1, recall 1 at 2/3.
  CHECK(eleven_point_ap({true, false, true}, 2).ap == doctest::Approx((6 * 1.0 + 5 * (2.0 / 3.0)) / 11.0));
  // Only the 0.0 threshold is reachable with 1 of 20 found at rank 2.
  CHECK(eleven_point_ap({false, true}, 20).ap == doctest::Approx(0.5 / 11.0));
  const ApResult none = eleven_point_ap({false}, 0);
  CHECK(none.no_ground_truth);
  CHECK(none.ap == 0.0);
}

TEST_CASE("duplicate predictions match one ground truth") {
  const BBox b = BBox::make(0.1, 0.1, 0.4, 0.4);
  std::vector<Prediction> preds{{b, 0.9, 0}, {b, 0.9, 0}};
  std::vector<GroundTruth> gts{{b, 0}};
  std::vector<int> matched;
  const auto flags = match_predictions(preds, gts, &matched);
  CHECK(flags[0]);
  CHECK_FALSE(flags[1]);
  CHECK(matched[0] == 0);
  CHECK(matched[1] == -1);
}

TEST_CASE("matching stays within a sample and needs iou above one half") {
  const BBox b = BBox::make(0.0, 0.0, 0.5, 0.5);
  std::vector<GroundTruth> gts{{b, 1}};
  std::vector<Prediction> other_sample{{b, 1.0, 0}};
  CHECK_FALSE(match_predictions(other_sample, gts)[0]);
  // IOU exactly 1/2 is not enough.
  const BBox half = BBox::make(0.0, 0.0, 0.5, 0.25);
  CHECK(iou(b, half) == 0.5);
  std::vector<Prediction> edge{{half, 1.0, 1}};
  CHECK_FALSE(match_predictions(edge, gts)[0]);
}

TEST_CASE("sorting is stable on ties") {
  std::vector<Prediction> p{{kDummyBox, 0.5, 0}, {kDummyBox, 0.9, 1}, {kDummyBox, 0.5, 2}};
  sort_predictions(p);
  CHECK(p[0].sample_id == 1);
  CHECK(p[1].sample_id == 0);
  CHECK(p[2].sample_id == 2);
}

TEST_CASE("matching and ap agree with the brute-force definition") {
  std::mt19937_64 rng(40);
  for (int trial = 0; trial < 300; ++trial) {
    const int n_samples = 1 + static_cast<int>(rng() % 3);
    std::vector<GroundTruth> gts;
    std::vector<Prediction> preds;
    for (int s = 0; s < n_samples; ++s) {
      const int n_gt = static_cast<int>(rng() % 4);
      for (int g = 0; g < n_gt; ++g) gts.push_back({testing::random_box(rng, 0.2), s});
    }
    const int n_pred = static_cast<int>(rng() % 9);
    for (int k = 0; k < n_pred; ++k) {
      const int s = static_cast<int>(rng() % n_samples);
      BBox box = testing::random_box(rng, 0.2);
      // Often reuse a ground truth box, sometimes nudged.
      if (!gts.empty() && rng() % 2) {
        box = gts[rng() % gts.size()].box;
        const double dx = std::min(0.03, 1.0 - box.x2);
        if (rng() % 2) box = BBox::make(box.x1 + dx, box.y1, box.x2 + dx, box.y2);
      }
      preds.push_back({box, static_cast<double>(rng() % 5) / 4.0, s});
    }
    sort_predictions(preds);
    const auto flags = match_predictions(preds, gts);
    CHECK(flags == testing::greedy_oracle(preds, gts));
    const double ap = eleven_point_ap(flags, static_cast<int>(gts.size())).ap;
    CHECK(std::abs(ap - testing::eleven_point_oracle(flags, static_cast<int>(gts.size()))) <= 1e-12);
  }
}

TEST_CASE("scene evaluation with the label oracle") {
  Scene s;
  s.grid = FeatureGrid(1, 2, 2, 1);
  const BBox a = BBox::make(0.1, 0.1, 0.3, 0.3);
  const BBox b = BBox::make(0.6, 0.6, 0.9, 0.9);
  s.test_proposals = pad_proposals({{a, false, 1, 0.9}, {b, false, 0, 0.8}}, 4);
  s.train_proposals = s.test_proposals;
  s.gt_boxes = {a};
  const std::vector<Scene> scenes{s, s};
  const FoldReport r = evaluate_scenes(scenes, oracle_scorer(), 1);
  CHECK(r.ap == 1.0);
  CHECK(r.n_gt == 2);

  // An important object the detector missed caps recall.
  Scene missed = s;
  missed.gt_boxes.push_back(BBox::make(0.5, 0.1, 0.7, 0.3));
  const std::vector<Scene> one{missed};
  CHECK(evaluate_scenes(one, oracle_scorer()).ap == doctest::Approx(6.0 / 11.0));

  const Scorer wrong = [](const Scene&) { return std::vector<double>{1.0}; };
  CHECK_THROWS_AS(evaluate_scenes(one, wrong), Error);
}

TEST_CASE("three-fold protocol trains on the other splits") {
  std::vector<Scene> scenes;
  for (int i = 0; i < 6; ++i) {
    Scene s;
    s.grid = FeatureGrid(1, 1, 1, 1);
    s.split = i % 3 + 1;
    s.seed = static_cast<std::uint64_t>(i);
    const BBox a = BBox::make(0.1, 0.1, 0.3, 0.3);
    s.test_proposals = pad_proposals({{a, false, 1, 1.0}}, 2);
    s.gt_boxes = {a};
    scenes.push_back(s);
  }
  std::vector<int> seen;
  const ApReport rep = evaluate_splits(scenes, [&](int fold, std::span<const Scene> train) {
    for (const auto& s : train) CHECK(s.split != fold);
    CHECK(train.size() == 4);
    seen.push_back(fold);
    return oracle_scorer();
  });
  CHECK(seen == std::vector<int>{1, 2, 3});
  CHECK(rep.avg_ap == 1.0);
  CHECK(rep.to_table("x").find("100.0") != std::string::npos);

  const std::vector<Scene> only_one(scenes.begin(), scenes.begin() + 1);
  CHECK_THROWS_AS(evaluate_splits(only_one, [](int, std::span<const Scene>) { return oracle_scorer(); }),
                  Error);
}
