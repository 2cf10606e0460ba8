#pragma once

#include "impgraph/geometry.hpp"
#include "impgraph/tensor.hpp"

#include <random>

namespace testing {

inline impgraph::Matrix random_matrix(int rows, int cols, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  impgraph::Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

inline impgraph::FeatureGrid random_grid(int t, int h, int w, int c, std::mt19937_64& rng) {
  impgraph::FeatureGrid g(t, h, w, c);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : g.data) v = u(rng);
  return g;
}

inline impgraph::BBox random_box(std::mt19937_64& rng, double min_size = 0.05) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double w = min_size + (1.0 - min_size) * u(rng) * 0.6;
  const double h = min_size + (1.0 - min_size) * u(rng) * 0.6;
  const double x = (1.0 - w) * u(rng);
  const double y = (1.0 - h) * u(rng);
  return impgraph::BBox::make(x, y, x + w, y + h);
}

}  // namespace testing
