#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace impgraph {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Dense T x H x W x C activation volume, channel-fastest layout.
struct FeatureGrid {
  int frames = 0;
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  FeatureGrid() = default;
  FeatureGrid(int t, int h, int w, int c, double fill = 0.0);

  std::size_t index(int t, int h, int w, int c) const {
    return ((static_cast<std::size_t>(t) * height + h) * width + w) * channels + c;
  }
  double& at(int t, int h, int w, int c) { return data[index(t, h, w, c)]; }
  double at(int t, int h, int w, int c) const { return data[index(t, h, w, c)]; }

  std::size_t cells() const {
    return static_cast<std::size_t>(frames) * height * width;
  }
  bool same_shape(const FeatureGrid& other) const {
    return frames == other.frames && height == other.height &&
           width == other.width && channels == other.channels;
  }
  bool all_finite() const;

  bool operator==(const FeatureGrid&) const = default;
};

}  // namespace impgraph
