#pragma once

#include "impgraph/geometry.hpp"
#include "impgraph/tensor.hpp"

#include <cstdint>
#include <vector>

namespace impgraph {

/// One sample: the feature grid plus two padded proposal lists. The training
/// list replaces dummies with ground-truth boxes the detector missed; the test
/// list is what the detector produced. Labels live on the proposals.
struct Scene {
  FeatureGrid grid;
  std::vector<Proposal> train_proposals;
  std::vector<Proposal> test_proposals;
  std::vector<BBox> gt_boxes;  // every important object, detected or not
  int split = 1;               // 1, 2 or 3
  std::uint64_t seed = 0;

  static std::vector<int> labels_of(const std::vector<Proposal>& props);

  bool operator==(const Scene&) const = default;
};

}  // namespace impgraph
