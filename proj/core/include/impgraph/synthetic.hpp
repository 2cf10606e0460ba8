#pragma once

#include "impgraph/config.hpp"
#include "impgraph/scene.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <vector>

namespace impgraph {

/// Channel layout of rendered scenes. Channels at and beyond kMinSceneChannels
/// carry background noise only.
namespace scene_channels {
inline constexpr int kCar = 0;
inline constexpr int kPedestrian = 1;
inline constexpr int kCyclist = 2;
inline constexpr int kVelocityRight = 3;
inline constexpr int kVelocityLeft = 4;
inline constexpr int kNearness = 5;
inline constexpr int kDepth = 6;         // kDepthBins channels, one-hot bottom-edge bin
inline constexpr int kLateral = 22;      // kLateralBins channels, column band of the box centre
inline constexpr int kLaneContext = 27;  // kLateralBins channels, sky rows only
}  // namespace scene_channels

inline constexpr int kDepthBins = 16;
inline constexpr int kLateralBins = 5;
inline constexpr int kMinSceneChannels = scene_channels::kLaneContext + kLateralBins;

/// Rows whose centre lies above this line form the "sky" band that carries the
/// lane context. Objects never reach it.
inline constexpr double kSkyLine = 0.15;

/// Lane-context response in the sky band.
inline constexpr double kSkyLevel = 8.0;

/// Range of object bottom edges, far to near.
inline constexpr double kFarthestBottom = 0.35;
inline constexpr double kNearestBottom = 0.85;

/// Per-scene shift of the rendered distance, drawn from [-kDepthJitter, kDepthJitter].
/// Depth order within a scene is unchanged; absolute depth carries no label signal.
inline constexpr double kDepthJitter = 0.75;

/// Depth bin of a rendered (shifted) bottom edge, 0 (far) to kDepthBins - 1 (near).
int depth_bin(double shifted_bottom);

enum class ObjectType : int { kCar = 0, kPedestrian = 1, kCyclist = 2 };

struct SceneObject {
  ObjectType type = ObjectType::kCar;
  BBox box;
  double velocity = 0.0;  // lateral, normalized units per frame
  bool detected = true;
  BBox detection;  // jittered box reported by the detector
};

/// Geometry and attributes of one scene, before rendering.
struct SceneLayout {
  std::vector<SceneObject> objects;
  int lane_bin = 2;
  double depth_offset = 0.0;
  int split = 1;
};

/// Column band [lo, hi) of a lateral bin.
double lane_lo(int lane_bin);
double lane_hi(int lane_bin);

/// True when the box overlaps the ego lane's column band.
bool in_collision_cone(const BBox& box, int lane_bin);

/// Importance labels per object: in the cone and, with suppression, the
/// nearest (largest bottom edge) of all objects in the cone.
std::vector<int> importance_labels(const SceneLayout& layout, bool suppression);

/// Samples object geometry and attributes. Labels depend only on this.
SceneLayout sample_layout(const GridDims& dims, const SceneConfig& config, std::mt19937_64& rng);

/// Rasterizes a layout into a feature grid and padded proposal lists.
Scene render_scene(const SceneLayout& layout, const GridDims& dims, const SceneConfig& config,
                   std::uint64_t noise_seed);

/// Layout + render with streams derived from the seed.
Scene generate_scene(const GridDims& dims, const SceneConfig& config, std::uint64_t seed);
SceneLayout generate_layout(const GridDims& dims, const SceneConfig& config, std::uint64_t seed);

/// config.scenes scenes; scene i goes to split (i % 3) + 1.
std::vector<Scene> generate_dataset(const GridDims& dims, const SceneConfig& config,
                                    std::uint64_t seed, int threads = 1);

struct DatasetStats {
  int scenes = 0;
  int objects = 0;
  int positives = 0;
  int all_negative_scenes = 0;
  int missed_detections = 0;
  std::array<int, 3> per_split{};

  double positives_per_scene() const { return scenes ? double(positives) / scenes : 0.0; }
};

DatasetStats dataset_stats(const std::vector<Scene>& scenes);

/// Seed for scene `index` of a dataset.
std::uint64_t scene_seed(std::uint64_t dataset_seed, std::uint64_t index);

}  // namespace impgraph
