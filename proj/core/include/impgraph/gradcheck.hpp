#pragma once

#include "impgraph/config.hpp"
#include "impgraph/params.hpp"
#include "impgraph/scene.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace impgraph {

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  /// Denominator floor for the relative error, so analytically-zero
  /// gradients are compared against finite-difference noise sensibly.
  double abs_floor = 1e-6;
  int samples = 2;
  /// Testing hook: multiply the analytic gradient of this array by the factor.
  std::string corrupt_param;
  double corrupt_factor = 1.0;
};

struct GradCheckGroup {
  std::string name;
  std::size_t count = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GradCheckGroup> groups;
  double tolerance = 0.0;
  double seconds = 0.0;
  bool passed = true;

  std::string to_text() const;
};

/// Small config used by the acceptance gate: N=6, C=8, d=8, r=2, T=2,
/// H=W=4, MLP 16 -> 8 -> 4 -> 1.
ModelConfig gradcheck_config();

/// Random scene with strictly positive, tie-free grid values and at least one
/// positive label.
Scene random_check_scene(const ModelConfig& config, std::uint64_t seed);

/// Compares analytic gradients of the mean mined loss over a few random scenes
/// with central differences, per named parameter array.
GradCheckReport gradient_check(const ModelConfig& config, std::uint64_t seed,
                               const GradCheckOptions& options = {});

}  // namespace impgraph
