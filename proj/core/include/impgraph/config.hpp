#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace impgraph {

/// Shapes shared by scenes and models.
struct GridDims {
  int n_proposals = 40;
  int frames = 2;
  int height = 16;
  int width = 20;
  int channels = 32;

  bool operator==(const GridDims&) const = default;
};

struct ModelConfig {
  GridDims dims;
  int edge_dim = 0;  // 0 means "same as channels"
  int roi_size = 7;
  std::vector<int> mlp_hidden{128, 32};

  bool no_graph = false;
  bool no_global_descriptor = false;
  bool no_self_attention = false;

  int effective_edge_dim() const { return edge_dim > 0 ? edge_dim : dims.channels; }
  int mlp_input_dim() const { return no_global_descriptor ? dims.channels : 2 * dims.channels; }

  /// FNV-1a over a canonical rendering of every shape-affecting field.
  std::uint64_t hash() const;
  std::string canonical() const;
  void validate() const;
};

struct TrainConfig {
  double lr = 0.0003;
  double momentum = 0.9;
  double decay = 0.0001;
  double l2 = 0.0005;
  int batch_size = 8;
  int epochs = 30;
  std::uint64_t seed = 0;
  bool zero_init_head = false;  // zero MLP output layer (all scores 0.5 at step 0)

  void validate() const;
};

enum class LaneMode {
  kFixed,    // ego lane is the same for every scene
  kContext,  // ego lane varies per scene; only background channels reveal it
};

struct SceneConfig {
  int scenes = 600;
  int min_objects = 2;
  int max_objects = 8;
  int max_lane_objects = 3;
  double empty_prob = 0.5;
  double noise_sigma = 0.1;
  double clutter = 0.3;
  double miss_rate = 0.05;
  double box_jitter = 0.01;
  bool suppression = true;
  LaneMode lane_mode = LaneMode::kFixed;
  int lane_bin = 2;  // lateral bin of the ego lane in fixed mode

  void validate() const;
};

/// Everything a command needs. Stored on disk as flat "key = value" lines;
/// '#' starts a comment. Unknown keys are errors.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  SceneConfig scene;

  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  static const std::vector<std::string>& keys();
  static std::string describe(const std::string& key);

  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);
  void apply(const std::string& text);
  std::string to_text() const;
  void validate() const;
};

std::uint64_t fnv1a64(const void* data, std::size_t size,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace impgraph
