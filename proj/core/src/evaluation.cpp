#include "impgraph/evaluation.hpp"

#include "impgraph/error.hpp"
#include "impgraph/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <unordered_map>

namespace impgraph {

void sort_predictions(std::vector<Prediction>& preds) {
  std::stable_sort(preds.begin(), preds.end(),
                   [](const Prediction& a, const Prediction& b) { return a.score > b.score; });
}

std::vector<bool> match_predictions(std::span<const Prediction> sorted,
                                    std::span<const GroundTruth> gts,
                                    std::vector<int>* matched_gt) {
  std::unordered_map<int, std::vector<int>> by_sample;
  for (std::size_t g = 0; g < gts.size(); ++g) by_sample[gts[g].sample_id].push_back(static_cast<int>(g));

  std::vector<bool> used(gts.size(), false);
  std::vector<bool> flags(sorted.size(), false);
  if (matched_gt) matched_gt->assign(sorted.size(), -1);

  for (std::size_t p = 0; p < sorted.size(); ++p) {
    auto it = by_sample.find(sorted[p].sample_id);
    if (it == by_sample.end()) continue;
    int best = -1;
    double best_iou = kMatchIou;
    for (int g : it->second) {
      if (used[static_cast<std::size_t>(g)]) continue;
      const double o = iou(sorted[p].box, gts[static_cast<std::size_t>(g)].box);
      if (o > best_iou) {
        best_iou = o;
        best = g;
      }
    }
    if (best >= 0) {
      used[static_cast<std::size_t>(best)] = true;
      flags[p] = true;
      if (matched_gt) (*matched_gt)[p] = best;
    }
  }
  return flags;
}

ApResult eleven_point_ap(const std::vector<bool>& flags, int n_gt) {
  ApResult out;
  if (n_gt <= 0) {
    out.no_ground_truth = true;
    return out;
  }
  std::vector<long> tp_cum(flags.size());
  long tp = 0;
  out.curve.reserve(flags.size());
  for (std::size_t k = 0; k < flags.size(); ++k) {
    tp += flags[k] ? 1 : 0;
    tp_cum[k] = tp;
    out.curve.push_back(PrPoint{static_cast<double>(tp) / n_gt,
                                static_cast<double>(tp) / static_cast<double>(k + 1)});
  }
  double sum = 0.0;
  for (int j = 0; j <= 10; ++j) {
    double best = 0.0;
    for (std::size_t k = 0; k < flags.size(); ++k) {
      // recall >= j / 10 in exact integer arithmetic
      if (tp_cum[k] * 10 >= static_cast<long>(j) * n_gt) {
        best = std::max(best, out.curve[k].precision);
      }
    }
    sum += best;
  }
  out.ap = sum / 11.0;
  return out;
}

FoldReport evaluate_scenes(std::span<const Scene> scenes, const Scorer& scorer, int fold,
                           int threads) {
  std::vector<std::vector<double>> scores(scenes.size());
  parallel_for(scenes.size(), threads, [&](std::size_t i) { scores[i] = scorer(scenes[i]); });

  std::vector<Prediction> preds;
  std::vector<GroundTruth> gts;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const Scene& s = scenes[i];
    if (scores[i].size() != s.test_proposals.size()) {
      fail(ErrorKind::kMismatch, "scorer returned the wrong number of scores");
    }
    for (std::size_t p = 0; p < s.test_proposals.size(); ++p) {
      preds.push_back(Prediction{s.test_proposals[p].box, scores[i][p], static_cast<int>(i)});
    }
    for (const BBox& b : s.gt_boxes) gts.push_back(GroundTruth{b, static_cast<int>(i)});
  }
  sort_predictions(preds);
  const std::vector<bool> flags = match_predictions(preds, gts);
  const ApResult ap = eleven_point_ap(flags, static_cast<int>(gts.size()));

  FoldReport r;
  r.fold = fold;
  r.ap = ap.ap;
  r.n_samples = static_cast<int>(scenes.size());
  r.n_gt = static_cast<int>(gts.size());
  r.no_ground_truth = ap.no_ground_truth;
  r.curve = ap.curve;
  return r;
}

std::vector<Scene> scenes_in_split(std::span<const Scene> scenes, int split) {
  std::vector<Scene> out;
  for (const auto& s : scenes) {
    if (s.split == split) out.push_back(s);
  }
  return out;
}

std::vector<Scene> scenes_outside_split(std::span<const Scene> scenes, int split) {
  std::vector<Scene> out;
  for (const auto& s : scenes) {
    if (s.split != split) out.push_back(s);
  }
  return out;
}

ApReport evaluate_splits(std::span<const Scene> scenes, const FoldFitter& fit, int threads) {
  ApReport report;
  double sum = 0.0;
  for (int split = 1; split <= 3; ++split) {
    const std::vector<Scene> test = scenes_in_split(scenes, split);
    if (test.empty()) {
      fail(ErrorKind::kUsage, "split " + std::to_string(split) + " has no scenes");
    }
    const std::vector<Scene> train = scenes_outside_split(scenes, split);
    const Scorer scorer = fit(split, train);
    report.folds[static_cast<std::size_t>(split - 1)] = evaluate_scenes(test, scorer, split, threads);
    sum += report.folds[static_cast<std::size_t>(split - 1)].ap;
  }
  report.avg_ap = sum / 3.0;
  return report;
}

Scorer oracle_scorer() {
  return [](const Scene& s) {
    std::vector<double> out;
    for (const auto& p : s.test_proposals) out.push_back(p.label ? 1.0 : 0.0);
    return out;
  };
}

std::string ApReport::to_records(const std::string& label) const {
  std::string out;
  int n_samples = 0;
  int n_gt = 0;
  for (const auto& f : folds) {
    nlohmann::ordered_json rec;
    rec["type"] = "fold";
    if (!label.empty()) rec["model"] = label;
    rec["fold"] = f.fold;
    rec["ap"] = f.ap;
    rec["n_samples"] = f.n_samples;
    rec["n_gt"] = f.n_gt;
    if (f.no_ground_truth) rec["warning"] = "no ground truth in split; AP reported as 0";
    out += rec.dump() + "\n";
    n_samples += f.n_samples;
    n_gt += f.n_gt;
  }
  nlohmann::ordered_json sum;
  sum["type"] = "summary";
  if (!label.empty()) sum["model"] = label;
  sum["ap1"] = folds[0].ap;
  sum["ap2"] = folds[1].ap;
  sum["ap3"] = folds[2].ap;
  sum["avg_ap"] = avg_ap;
  sum["n_samples"] = n_samples;
  sum["n_gt"] = n_gt;
  out += sum.dump() + "\n";
  return out;
}

std::string ApReport::to_table(const std::string& model_name) const {
  char line[256];
  std::string out;
  std::snprintf(line, sizeof line, "%-28s %7s %7s %7s %7s\n", "Model", "AP1", "AP2", "AP3",
                "avgAP");
  out += line;
  std::snprintf(line, sizeof line, "%-28s %7.1f %7.1f %7.1f %7.1f\n", model_name.c_str(),
                100.0 * folds[0].ap, 100.0 * folds[1].ap, 100.0 * folds[2].ap, 100.0 * avg_ap);
  out += line;
  return out;
}

}  // namespace impgraph
