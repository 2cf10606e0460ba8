#pragma once

#include "impgraph/config.hpp"
#include "impgraph/geometry.hpp"
#include "impgraph/interaction_graph.hpp"
#include "impgraph/scoring_head.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace impgraph {

/// Named view of one learnable array.
struct ParamView {
  std::string name;
  std::vector<int> shape;
  std::span<double> values;
};

struct ConstParamView {
  std::string name;
  std::vector<int> shape;
  std::span<const double> values;
};

/// Every learnable array of the model. Also used as the gradient container.
/// With no_graph the edge and GCN arrays are absent.
struct ModelParams {
  ModelConfig config;
  TemporalKernel temporal;
  EdgeParams edge;
  GcnWeights gcn;
  MlpParams mlp;

  /// Zero-filled arrays with the shapes config implies.
  static ModelParams zeros(const ModelConfig& config);
  /// Glorot-uniform matrices, zero biases.
  static ModelParams glorot(const ModelConfig& config, std::uint64_t seed);

  /// Visits arrays in a fixed order: temporal_conv, edge.gamma,
  /// edge.gamma_prime, edge.phi, gcn.w1..w3, mlp.w<l>, mlp.b<l>.
  void for_each(const std::function<void(ParamView)>& fn);
  void for_each(const std::function<void(ConstParamView)>& fn) const;

  std::vector<std::string> names() const;
  std::size_t size() const;  // total scalar count
  bool all_finite() const;
  bool operator==(const ModelParams& other) const;

  /// this += scale * other, array by array.
  void axpy(double scale, const ModelParams& other);
  void scale(double factor);
};

}  // namespace impgraph
