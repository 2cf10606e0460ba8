#pragma once

#include "impgraph/tensor.hpp"

#include <span>
#include <vector>

namespace impgraph {

/// Axis-aligned box in normalized frame coordinates, 0 <= x1 < x2 <= 1 and
/// 0 <= y1 < y2 <= 1. Construct through make() to get the invariant checked.
struct BBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 1.0;
  double y2 = 1.0;

  static BBox make(double x1, double y1, double x2, double y2);
  static bool valid(double x1, double y1, double x2, double y2);

  double area() const { return (x2 - x1) * (y2 - y1); }
  double center_x() const { return 0.5 * (x1 + x2); }

  bool operator==(const BBox&) const = default;
};

/// Hood-of-the-ego-car box used to pad every sample to a fixed node count.
inline constexpr BBox kDummyBox{0.07, 0.91, 0.97, 1.0};

struct Proposal {
  BBox box;
  bool is_dummy = false;
  int label = 0;
  double detector_score = 1.0;

  static Proposal dummy() { return Proposal{kDummyBox, true, 0, 0.0}; }

  bool operator==(const Proposal&) const = default;
};

double iou(const BBox& a, const BBox& b);

/// Appends dummy proposals until the list holds n_target entries. Throws
/// kUsage when there are more than n_target; call truncate_proposals first.
std::vector<Proposal> pad_proposals(std::vector<Proposal> props, int n_target);

/// Keeps the n_target highest detector scores, preserving the original order
/// of the survivors. Ties on score keep the earlier proposal.
std::vector<Proposal> truncate_proposals(std::vector<Proposal> props, int n_target);

/// Temporal kernel spanning the whole clip: weight(t, c_in, c_out) stored as a
/// (frames * c_in) x c_out matrix, row = t * c_in + c_in_index.
struct TemporalKernel {
  int frames = 0;
  int in_channels = 0;
  int out_channels = 0;
  Matrix weights;

  double operator()(int t, int ci, int co) const {
    return weights(t * in_channels + ci, co);
  }
};

/// One-layer convolution along time with kernel size and stride equal to the
/// clip length. Output has a single frame.
FeatureGrid temporal_aggregate(const FeatureGrid& grid, const TemporalKernel& kernel);

/// Accumulates gradients of temporal_aggregate given d(output).
/// grad_kernel must already have the kernel's shape; grad_grid may be null.
void temporal_aggregate_backward(const FeatureGrid& grid, const TemporalKernel& kernel,
                                 const FeatureGrid& grad_out, Matrix& grad_kernel,
                                 FeatureGrid* grad_grid);

/// Inclusive cell range [begin, end] covered by one pooling bin.
struct BinRange {
  int begin = 0;
  int end = 0;
};

/// Quantized bin along one axis: the box spans [lo*extent, hi*extent] in cell
/// units; bin k covers floor(lo + k*span/r) .. ceil(lo + (k+1)*span/r) - 1,
/// clamped to the grid and to at least one cell.
BinRange roi_bin(double lo, double hi, int extent, int bins, int k);

/// r x r x C max-pooled region with the winning cell (h * W + w) per output.
struct RoiPooled {
  int bins = 0;
  int channels = 0;
  std::vector<double> values;  // (by * r + bx) * C + c
  std::vector<int> argmax;     // same layout, cell index into the source grid

  double at(int by, int bx, int c) const { return values[(by * bins + bx) * channels + c]; }
};

/// Classic quantized ROI max pooling on a single-frame grid. Ties go to the
/// lowest linear cell index.
RoiPooled roi_pool(const FeatureGrid& grid, const BBox& box, int bins);

struct PooledVector {
  Vector values;
  std::vector<int> argmax;  // winning position per channel (by * r + bx)
};

/// Max over the r x r positions per channel; ties go to the lowest position.
PooledVector spatial_max_pool(const RoiPooled& pooled);

/// Mean over T x H x W per channel.
Vector global_avg_pool(const FeatureGrid& grid);

}  // namespace impgraph
