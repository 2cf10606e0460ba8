#pragma once

#include "impgraph/geometry.hpp"
#include "impgraph/scene.hpp"

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace impgraph {

inline constexpr double kMatchIou = 0.5;

struct Prediction {
  BBox box;
  double score = 0.0;
  int sample_id = 0;
};

struct GroundTruth {
  BBox box;
  int sample_id = 0;
};

/// Stable sort by score, highest first.
void sort_predictions(std::vector<Prediction>& preds);

/// Greedy matching in the given (score-descending) order. A prediction is a
/// true positive when its best-IOU unmatched ground truth of the same sample
/// has IOU > 0.5; that ground truth is then consumed. IOU ties go to the lower
/// ground-truth index. matched_gt, when given, receives the consumed index or -1.
std::vector<bool> match_predictions(std::span<const Prediction> sorted,
                                    std::span<const GroundTruth> gts,
                                    std::vector<int>* matched_gt = nullptr);

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};

struct ApResult {
  double ap = 0.0;
  std::vector<PrPoint> curve;
  bool no_ground_truth = false;  // AP reported as 0
};

/// VOC-2007 11-point interpolated AP: mean over recall thresholds 0, 0.1, ..., 1
/// of the best precision at recall >= threshold (0 when unreachable).
ApResult eleven_point_ap(const std::vector<bool>& flags, int n_gt);

/// Scores for a scene's test proposals.
using Scorer = std::function<std::vector<double>(const Scene&)>;

struct FoldReport {
  int fold = 0;
  double ap = 0.0;
  int n_samples = 0;
  int n_gt = 0;
  bool no_ground_truth = false;
  std::vector<PrPoint> curve;
};

/// AP over all test proposals of the given scenes, ranked jointly.
FoldReport evaluate_scenes(std::span<const Scene> scenes, const Scorer& scorer, int fold = 0,
                           int threads = 1);

struct ApReport {
  std::array<FoldReport, 3> folds;
  double avg_ap = 0.0;

  /// One JSON object per line: a record per fold, then a summary record.
  std::string to_records(const std::string& label = "") const;
  /// AP1 / AP2 / AP3 / avgAP table in percent.
  std::string to_table(const std::string& model_name) const;
};

/// Builds a scorer from the training scenes of one fold.
using FoldFitter = std::function<Scorer(int fold, std::span<const Scene> train)>;

/// 3-fold protocol: for each split k, fit on the other two splits and
/// evaluate on split k. Throws kUsage if a split is empty.
ApReport evaluate_splits(std::span<const Scene> scenes, const FoldFitter& fit, int threads = 1);

/// Scenes with the given split id, and those without it.
std::vector<Scene> scenes_in_split(std::span<const Scene> scenes, int split);
std::vector<Scene> scenes_outside_split(std::span<const Scene> scenes, int split);

/// Scorer that returns each test proposal's label.
Scorer oracle_scorer();

}  // namespace impgraph
