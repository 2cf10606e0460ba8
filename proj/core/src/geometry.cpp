#include "impgraph/geometry.hpp"

#include "impgraph/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace impgraph {

FeatureGrid::FeatureGrid(int t, int h, int w, int c, double fill)
    : frames(t), height(h), width(w), channels(c) {
  if (t <= 0 || h <= 0 || w <= 0 || c <= 0) {
    std::ostringstream msg;
    msg << "feature grid dims must be positive, got " << t << "x" << h << "x" << w << "x" << c;
    fail(ErrorKind::kMismatch, msg.str());
  }
  data.assign(cells() * static_cast<std::size_t>(c), fill);
}

bool FeatureGrid::all_finite() const {
  return std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v); });
}

bool BBox::valid(double x1, double y1, double x2, double y2) {
  return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2) &&
         0.0 <= x1 && x1 < x2 && x2 <= 1.0 && 0.0 <= y1 && y1 < y2 && y2 <= 1.0;
}

BBox BBox::make(double x1, double y1, double x2, double y2) {
  if (!valid(x1, y1, x2, y2)) {
    std::ostringstream msg;
    msg << "invalid box (" << x1 << ", " << y1 << ", " << x2 << ", " << y2
        << "): need 0 <= x1 < x2 <= 1 and 0 <= y1 < y2 <= 1";
    fail(ErrorKind::kUsage, msg.str());
  }
  return BBox{x1, y1, x2, y2};
}

double iou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

std::vector<Proposal> pad_proposals(std::vector<Proposal> props, int n_target) {
  if (n_target < 0) fail(ErrorKind::kUsage, "n_target must be non-negative");
  if (props.size() > static_cast<std::size_t>(n_target)) {
    std::ostringstream msg;
    msg << "got " << props.size() << " proposals for " << n_target
        << " nodes; truncate by detector score (truncate_proposals) before padding";
    fail(ErrorKind::kUsage, msg.str());
  }
  props.resize(static_cast<std::size_t>(n_target), Proposal::dummy());
  return props;
}

std::vector<Proposal> truncate_proposals(std::vector<Proposal> props, int n_target) {
  if (n_target < 0) fail(ErrorKind::kUsage, "n_target must be non-negative");
  if (props.size() <= static_cast<std::size_t>(n_target)) return props;

  std::vector<std::size_t> order(props.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return props[a].detector_score > props[b].detector_score;
  });
  order.resize(static_cast<std::size_t>(n_target));
  std::sort(order.begin(), order.end());

  std::vector<Proposal> kept;
  kept.reserve(order.size());
  for (std::size_t i : order) kept.push_back(props[i]);
  return kept;
}

namespace {

void check_kernel(const FeatureGrid& grid, const TemporalKernel& kernel) {
  if (kernel.frames != grid.frames || kernel.in_channels != grid.channels ||
      kernel.weights.rows() != static_cast<Eigen::Index>(kernel.frames) * kernel.in_channels ||
      kernel.weights.cols() != kernel.out_channels) {
    std::ostringstream msg;
    msg << "temporal kernel " << kernel.frames << "x" << kernel.in_channels << "x"
        << kernel.out_channels << " does not fit grid with T=" << grid.frames
        << " C=" << grid.channels;
    fail(ErrorKind::kMismatch, msg.str());
  }
}

}  // namespace

FeatureGrid temporal_aggregate(const FeatureGrid& grid, const TemporalKernel& kernel) {
  check_kernel(grid, kernel);
  FeatureGrid out(1, grid.height, grid.width, kernel.out_channels);
  for (int h = 0; h < grid.height; ++h) {
    for (int w = 0; w < grid.width; ++w) {
      for (int co = 0; co < kernel.out_channels; ++co) {
        double acc = 0.0;
        for (int t = 0; t < grid.frames; ++t) {
          for (int ci = 0; ci < grid.channels; ++ci) {
            acc += grid.at(t, h, w, ci) * kernel(t, ci, co);
          }
        }
        out.at(0, h, w, co) = acc;
      }
    }
  }
  return out;
}

void temporal_aggregate_backward(const FeatureGrid& grid, const TemporalKernel& kernel,
                                 const FeatureGrid& grad_out, Matrix& grad_kernel,
                                 FeatureGrid* grad_grid) {
  check_kernel(grid, kernel);
  if (grad_out.frames != 1 || grad_out.height != grid.height || grad_out.width != grid.width ||
      grad_out.channels != kernel.out_channels) {
    fail(ErrorKind::kMismatch, "temporal_aggregate_backward: gradient shape mismatch");
  }
  if (grad_kernel.rows() != kernel.weights.rows() || grad_kernel.cols() != kernel.weights.cols()) {
    fail(ErrorKind::kMismatch, "temporal_aggregate_backward: kernel gradient shape mismatch");
  }
  if (grad_grid && !grad_grid->same_shape(grid)) {
    *grad_grid = FeatureGrid(grid.frames, grid.height, grid.width, grid.channels);
  }
  for (int h = 0; h < grid.height; ++h) {
    for (int w = 0; w < grid.width; ++w) {
      for (int co = 0; co < kernel.out_channels; ++co) {
        const double g = grad_out.at(0, h, w, co);
        if (g == 0.0) continue;
        for (int t = 0; t < grid.frames; ++t) {
          for (int ci = 0; ci < grid.channels; ++ci) {
            grad_kernel(t * kernel.in_channels + ci, co) += g * grid.at(t, h, w, ci);
            if (grad_grid) grad_grid->at(t, h, w, ci) += g * kernel(t, ci, co);
          }
        }
      }
    }
  }
}

BinRange roi_bin(double lo, double hi, int extent, int bins, int k) {
  const double start = lo * extent;
  const double span = (hi - lo) * extent;
  int begin = static_cast<int>(std::floor(start + k * span / bins));
  int end = static_cast<int>(std::ceil(start + (k + 1) * span / bins)) - 1;
  begin = std::clamp(begin, 0, extent - 1);
  end = std::clamp(end, 0, extent - 1);
  if (end < begin) end = begin;
  return {begin, end};
}

RoiPooled roi_pool(const FeatureGrid& grid, const BBox& box, int bins) {
  if (bins < 1) fail(ErrorKind::kUsage, "roi_pool: bins must be >= 1");
  if (grid.frames != 1) fail(ErrorKind::kMismatch, "roi_pool: grid must have a single frame");

  RoiPooled out;
  out.bins = bins;
  out.channels = grid.channels;
  const std::size_t n = static_cast<std::size_t>(bins) * bins * grid.channels;
  out.values.assign(n, 0.0);
  out.argmax.assign(n, -1);

  for (int by = 0; by < bins; ++by) {
    const BinRange ry = roi_bin(box.y1, box.y2, grid.height, bins, by);
    for (int bx = 0; bx < bins; ++bx) {
      const BinRange rx = roi_bin(box.x1, box.x2, grid.width, bins, bx);
      const std::size_t base = (static_cast<std::size_t>(by) * bins + bx) * grid.channels;
      for (int c = 0; c < grid.channels; ++c) {
        double best = 0.0;
        int best_cell = -1;
        // Row-major scan with strict '>' keeps the lowest cell index on ties.
        for (int h = ry.begin; h <= ry.end; ++h) {
          for (int w = rx.begin; w <= rx.end; ++w) {
            const double v = grid.at(0, h, w, c);
            if (best_cell < 0 || v > best) {
              best = v;
              best_cell = h * grid.width + w;
            }
          }
        }
        out.values[base + c] = best;
        out.argmax[base + c] = best_cell;
      }
    }
  }
  return out;
}

PooledVector spatial_max_pool(const RoiPooled& pooled) {
  PooledVector out;
  out.values = Vector::Zero(pooled.channels);
  out.argmax.assign(static_cast<std::size_t>(pooled.channels), 0);
  const int positions = pooled.bins * pooled.bins;
  for (int c = 0; c < pooled.channels; ++c) {
    double best = pooled.values[static_cast<std::size_t>(c)];
    int best_pos = 0;
    for (int p = 1; p < positions; ++p) {
      const double v = pooled.values[static_cast<std::size_t>(p) * pooled.channels + c];
      if (v > best) {
        best = v;
        best_pos = p;
      }
    }
    out.values(c) = best;
    out.argmax[static_cast<std::size_t>(c)] = best_pos;
  }
  return out;
}

Vector global_avg_pool(const FeatureGrid& grid) {
  Vector sum = Vector::Zero(grid.channels);
  const std::size_t cells = grid.cells();
  for (std::size_t cell = 0; cell < cells; ++cell) {
    const double* row = grid.data.data() + cell * grid.channels;
    for (int c = 0; c < grid.channels; ++c) sum(c) += row[c];
  }
  return sum / static_cast<double>(cells);
}

}  // namespace impgraph
