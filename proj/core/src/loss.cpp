#include "impgraph/loss.hpp"

#include "impgraph/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace impgraph {

double bce(int label, double predicted) {
  const double p = std::clamp(predicted, kBceEpsilon, 1.0 - kBceEpsilon);
  return label ? -std::log(p) : -std::log1p(-p);
}

int n_neg_quota(int n_pos) { return std::max(5 * n_pos, 10); }

LossBreakdown mined_loss(const Vector& scores, std::span<const int> labels) {
  const auto n = static_cast<std::size_t>(scores.size());
  if (labels.size() != n) {
    fail(ErrorKind::kMismatch, "mined_loss: scores and labels differ in length");
  }

  LossBreakdown out;
  out.node_losses.resize(n);
  std::vector<int> negatives;
  for (std::size_t i = 0; i < n; ++i) {
    out.node_losses[i] = bce(labels[i], scores(static_cast<Eigen::Index>(i)));
    if (labels[i]) {
      out.positive_indices.push_back(static_cast<int>(i));
    } else {
      negatives.push_back(static_cast<int>(i));
    }
  }
  out.n_pos = static_cast<int>(out.positive_indices.size());

  std::stable_sort(negatives.begin(), negatives.end(), [&](int a, int b) {
    return out.node_losses[static_cast<std::size_t>(a)] > out.node_losses[static_cast<std::size_t>(b)];
  });
  const auto quota = static_cast<std::size_t>(n_neg_quota(out.n_pos));
  negatives.resize(std::min(quota, negatives.size()));
  out.selected_negative_indices = std::move(negatives);
  out.n_neg = static_cast<int>(out.selected_negative_indices.size());

  const double divisor = std::max(out.n_pos, 1);
  double sum = 0.0;
  for (int i : out.positive_indices) sum += out.node_losses[static_cast<std::size_t>(i)];
  for (int i : out.selected_negative_indices) sum += out.node_losses[static_cast<std::size_t>(i)];
  out.total = sum / divisor;

  out.grad_scores = Vector::Zero(static_cast<Eigen::Index>(n));
  out.grad_logits = Vector::Zero(static_cast<Eigen::Index>(n));
  auto add_grad = [&](int i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double p = scores(k);
    const int x = labels[static_cast<std::size_t>(i)];
    const bool inside = p > kBceEpsilon && p < 1.0 - kBceEpsilon;
    if (inside) out.grad_scores(k) = (x ? -1.0 / p : 1.0 / (1.0 - p)) / divisor;
    out.grad_logits(k) = (p - x) / divisor;
  };
  for (int i : out.positive_indices) add_grad(i);
  for (int i : out.selected_negative_indices) add_grad(i);
  return out;
}

}  // namespace impgraph
