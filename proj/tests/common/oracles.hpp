#pragma once

#include "impgraph/evaluation.hpp"

#include <algorithm>
#include <vector>

namespace testing {

// Greedy matching written from the definition: walk predictions in the given
// order, look at every ground truth of the same sample that is still free and
// take the best one if it clears the IOU bar.
inline std::vector<bool> greedy_oracle(const std::vector<impgraph::Prediction>& preds,
                                       const std::vector<impgraph::GroundTruth>& gts) {
  std::vector<bool> used(gts.size(), false);
  std::vector<bool> tp;
  for (const auto& p : preds) {
    int best = -1;
    double best_iou = 0.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (used[g] || gts[g].sample_id != p.sample_id) continue;
      const double a = impgraph::iou(p.box, gts[g].box);
      if (a > best_iou) {
        best_iou = a;
        best = static_cast<int>(g);
      }
    }
    const bool hit = best >= 0 && best_iou > 0.5;
    if (hit) used[static_cast<std::size_t>(best)] = true;
    tp.push_back(hit);
  }
  return tp;
}

// Eleven recall thresholds; at each, the best precision over every ranked
// cutoff that reaches it.
inline double eleven_point_oracle(const std::vector<bool>& tp, int n_gt) {
  if (n_gt == 0) return 0.0;
  double sum = 0.0;
  for (int k = 0; k <= 10; ++k) {
    const double t = k / 10.0;
    double best = 0.0;
    int hits = 0;
    for (std::size_t cut = 1; cut <= tp.size(); ++cut) {
      hits += tp[cut - 1] ? 1 : 0;
      const double recall = static_cast<double>(hits) / n_gt;
      const double precision = static_cast<double>(hits) / static_cast<double>(cut);
      if (recall >= t - 1e-12) best = std::max(best, precision);
    }
    sum += best;
  }
  return sum / 11.0;
}

}  // namespace testing
