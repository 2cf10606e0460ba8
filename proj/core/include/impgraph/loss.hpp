#pragma once

#include "impgraph/tensor.hpp"

#include <span>
#include <vector>

namespace impgraph {

inline constexpr double kBceEpsilon = 1e-12;

/// -x log(p) - (1 - x) log(1 - p), with p clamped to [eps, 1 - eps].
double bce(int label, double predicted);

/// Number of hard negatives kept per sample: max(5 * n_pos, 10).
int n_neg_quota(int n_pos);

struct LossBreakdown {
  double total = 0.0;
  std::vector<double> node_losses;
  std::vector<int> positive_indices;
  std::vector<int> selected_negative_indices;  // highest loss first
  int n_pos = 0;
  int n_neg = 0;  // number of selected negatives

  /// dL/dscore per node; zero for unselected negatives.
  Vector grad_scores;
  /// dL/dlogit per node for a sigmoid head, computed as (p - x) / divisor
  /// without going through the clamp.
  Vector grad_logits;
};

/// Per-node BCE, then all positives plus the top-quota negatives by loss
/// (ties to the lower index), summed and divided by max(n_pos, 1).
LossBreakdown mined_loss(const Vector& scores, std::span<const int> labels);

}  // namespace impgraph
