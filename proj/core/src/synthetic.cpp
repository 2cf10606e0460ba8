#include "impgraph/synthetic.hpp"

#include "impgraph/error.hpp"
#include "impgraph/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

namespace impgraph {
namespace {

constexpr int kPlacementAttempts = 60;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct CellRect {
  int r0, r1, c0, c1;  // inclusive

  bool intersects(const CellRect& o, int margin) const {
    return r0 - margin <= o.r1 && o.r0 <= r1 + margin && c0 - margin <= o.c1 && o.c0 <= c1 + margin;
  }
};

CellRect footprint(const BBox& b, const GridDims& dims) {
  const BinRange rows = roi_bin(b.y1, b.y2, dims.height, 1, 0);
  const BinRange cols = roi_bin(b.x1, b.x2, dims.width, 1, 0);
  return {rows.begin, rows.end, cols.begin, cols.end};
}

double max_speed(ObjectType t) {
  switch (t) {
    case ObjectType::kCar: return 0.03;
    case ObjectType::kPedestrian: return 0.015;
    case ObjectType::kCyclist: return 0.025;
  }
  return 0.03;
}

// Normalized width/height for an object whose bottom edge sits at `bottom`.
std::pair<double, double> object_size(ObjectType t, double bottom, const GridDims& dims) {
  const double s = (bottom - 0.25) / (kNearestBottom - 0.25);
  const double aspect = static_cast<double>(dims.height) / dims.width;
  switch (t) {
    case ObjectType::kCar: {
      const double h = 0.06 + 0.18 * s;
      return {1.3 * h * aspect, h};
    }
    case ObjectType::kPedestrian: {
      const double h = 0.07 + 0.19 * s;
      return {0.4 * h * aspect, h};
    }
    case ObjectType::kCyclist: {
      const double h = 0.065 + 0.185 * s;
      return {0.65 * h * aspect, h};
    }
  }
  return {0.1, 0.1};
}

ObjectType sample_type(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double x = u(rng);
  if (x < 0.5) return ObjectType::kCar;
  if (x < 0.8) return ObjectType::kPedestrian;
  return ObjectType::kCyclist;
}

// bottom < 0 draws the bottom edge uniformly; otherwise it is fixed.
std::optional<SceneObject> place_object(bool in_lane, int lane_bin, double bottom_at,
                                        const GridDims& dims, std::vector<CellRect>& taken,
                                        std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double cell = 1.0 / dims.width;
  const double lo = lane_lo(lane_bin);
  const double hi = lane_hi(lane_bin);
  for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
    SceneObject obj;
    obj.type = sample_type(rng);
    const double bottom =
        bottom_at >= 0.0 ? bottom_at : kFarthestBottom + (kNearestBottom - kFarthestBottom) * u(rng);
    auto [w, h] = object_size(obj.type, bottom, dims);
    w = std::min(w, 0.3);

    double cx = 0.0;
    if (in_lane) {
      cx = lo + 0.02 + (hi - lo - 0.04) * u(rng);
    } else {
      // Entirely outside the lane band with a one-cell margin.
      const double left_max = lo - cell - w / 2;
      const double right_min = hi + cell + w / 2;
      const bool left_ok = left_max >= w / 2;
      const bool right_ok = right_min <= 1.0 - w / 2;
      if (!left_ok && !right_ok) continue;
      const bool left = left_ok && (!right_ok || u(rng) < 0.5);
      cx = left ? w / 2 + (left_max - w / 2) * u(rng) : right_min + (1.0 - w / 2 - right_min) * u(rng);
    }
    const double x1 = std::max(0.0, cx - w / 2);
    const double x2 = std::min(1.0, cx + w / 2);
    const double y1 = bottom - h;
    if (!BBox::valid(x1, y1, x2, bottom)) continue;
    obj.box = BBox{x1, y1, x2, bottom};
    if (in_collision_cone(obj.box, lane_bin) != in_lane) continue;

    const CellRect rect = footprint(obj.box, dims);
    const bool clash = std::any_of(taken.begin(), taken.end(),
                                   [&](const CellRect& r) { return rect.intersects(r, 1); });
    if (clash) continue;
    taken.push_back(rect);

    const double vmax = max_speed(obj.type);
    obj.velocity = vmax * (2.0 * u(rng) - 1.0);
    return obj;
  }
  return std::nullopt;
}

BBox jitter_box(const BBox& b, double amount, std::mt19937_64& rng) {
  if (amount <= 0.0) return b;
  std::uniform_real_distribution<double> u(-amount, amount);
  const double x1 = std::clamp(b.x1 + u(rng), 0.0, 1.0);
  const double y1 = std::clamp(b.y1 + u(rng), 0.0, 1.0);
  const double x2 = std::clamp(b.x2 + u(rng), 0.0, 1.0);
  const double y2 = std::clamp(b.y2 + u(rng), 0.0, 1.0);
  return BBox::valid(x1, y1, x2, y2) ? BBox{x1, y1, x2, y2} : b;
}

void check_feasible(const GridDims& dims, const SceneConfig& config) {
  config.validate();
  if (dims.channels < kMinSceneChannels) {
    std::ostringstream msg;
    msg << "synthetic scenes need at least " << kMinSceneChannels << " channels, got "
        << dims.channels;
    fail(ErrorKind::kUsage, msg.str());
  }
  if (config.max_objects > dims.n_proposals) {
    std::ostringstream msg;
    msg << "infeasible scene config: max_objects " << config.max_objects << " > N "
        << dims.n_proposals;
    fail(ErrorKind::kUsage, msg.str());
  }
  if (config.lane_bin < 0 || config.lane_bin >= kLateralBins) {
    fail(ErrorKind::kUsage, "lane_bin must be in [0, 4]");
  }
}

}  // namespace

int depth_bin(double shifted_bottom) {
  const double lo = kFarthestBottom - kDepthJitter;
  const double hi = kNearestBottom + kDepthJitter;
  const double t = (shifted_bottom - lo) / (hi - lo);
  return std::clamp(static_cast<int>(std::floor(t * kDepthBins)), 0, kDepthBins - 1);
}

double lane_lo(int lane_bin) { return static_cast<double>(lane_bin) / kLateralBins; }
double lane_hi(int lane_bin) { return static_cast<double>(lane_bin + 1) / kLateralBins; }

bool in_collision_cone(const BBox& box, int lane_bin) {
  return box.x1 < lane_hi(lane_bin) && box.x2 > lane_lo(lane_bin);
}

std::vector<int> importance_labels(const SceneLayout& layout, bool suppression) {
  std::vector<int> labels(layout.objects.size(), 0);
  int nearest = -1;
  for (std::size_t i = 0; i < layout.objects.size(); ++i) {
    const BBox& b = layout.objects[i].box;
    if (!in_collision_cone(b, layout.lane_bin)) continue;
    labels[i] = 1;
    if (nearest < 0 || b.y2 > layout.objects[static_cast<std::size_t>(nearest)].box.y2) {
      nearest = static_cast<int>(i);
    }
  }
  if (suppression) {
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i) == nearest;
  }
  return labels;
}

SceneLayout sample_layout(const GridDims& dims, const SceneConfig& config, std::mt19937_64& rng) {
  check_feasible(dims, config);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto uniform_int = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };

  SceneLayout layout;
  layout.lane_bin = config.lane_mode == LaneMode::kFixed ? config.lane_bin : uniform_int(1, 3);

  const bool empty = u(rng) < config.empty_prob;
  const int lane_count = empty ? 0 : uniform_int(1, config.max_lane_objects);
  const int total = uniform_int(std::max(config.min_objects, lane_count), config.max_objects);

  // Ego-lane objects form a queue: the leader anywhere in depth, each follower
  // one to two rows behind the object ahead of it.
  std::vector<CellRect> taken;
  const double row = 1.0 / dims.height;
  const double reserve = std::min(0.25 * (lane_count - 1), kNearestBottom - kFarthestBottom);
  double bottom = kFarthestBottom + reserve + (kNearestBottom - kFarthestBottom - reserve) * u(rng);
  for (int k = 0; k < lane_count; ++k) {
    if (k > 0) {
      bottom = layout.objects.back().box.y1 - row * (1.5 + u(rng));
      if (bottom < kFarthestBottom) break;
    }
    auto obj = place_object(true, layout.lane_bin, bottom, dims, taken, rng);
    if (!obj) break;
    layout.objects.push_back(*obj);
  }
  for (int k = lane_count; k < total; ++k) {
    auto obj = place_object(false, layout.lane_bin, -1.0, dims, taken, rng);
    if (obj) layout.objects.push_back(*obj);
  }
  std::shuffle(layout.objects.begin(), layout.objects.end(), rng);

  layout.depth_offset = kDepthJitter * (2.0 * u(rng) - 1.0);
  for (auto& obj : layout.objects) {
    obj.detected = !(u(rng) < config.miss_rate);
    obj.detection = jitter_box(obj.box, config.box_jitter, rng);
  }
  return layout;
}

Scene render_scene(const SceneLayout& layout, const GridDims& dims, const SceneConfig& config,
                   std::uint64_t noise_seed) {
  namespace ch = scene_channels;
  std::mt19937_64 rng(noise_seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  Scene s;
  s.seed = noise_seed;
  s.split = layout.split;
  s.grid = FeatureGrid(dims.frames, dims.height, dims.width, dims.channels);
  for (double& v : s.grid.data) v = std::max(0.0, config.noise_sigma * noise(rng));

  // Background response in the object channels, one level per channel and
  // scene, on every cell no object covers.
  std::vector<char> covered(static_cast<std::size_t>(dims.height * dims.width), 0);
  for (const auto& obj : layout.objects) {
    const CellRect r = footprint(obj.box, dims);
    for (int h = r.r0; h <= r.r1; ++h) {
      for (int w = r.c0; w <= r.c1; ++w) covered[static_cast<std::size_t>(h * dims.width + w)] = 1;
    }
  }
  std::uniform_real_distribution<double> level(0.0, config.clutter);
  for (int c = 0; c < ch::kLaneContext; ++c) {
    const double b = level(rng);
    for (int t = 0; t < dims.frames; ++t) {
      for (int cell = 0; cell < dims.height * dims.width; ++cell) {
        if (!covered[static_cast<std::size_t>(cell)]) {
          s.grid.at(t, cell / dims.width, cell % dims.width, c) += b;
        }
      }
    }
  }

  for (int t = 0; t < dims.frames; ++t) {
    for (int h = 0; h < dims.height; ++h) {
      if ((h + 0.5) / dims.height >= kSkyLine) break;
      for (int w = 0; w < dims.width; ++w) s.grid.at(t, h, w, ch::kLaneContext + layout.lane_bin) += kSkyLevel;
    }
  }

  // The hood looks the same in every frame of every scene.
  const int hood_row = roi_bin(kDummyBox.y1, kDummyBox.y2, dims.height, 1, 0).begin;
  for (int t = 0; t < dims.frames; ++t) {
    for (int h = hood_row; h < dims.height; ++h) {
      for (int w = 0; w < dims.width; ++w) {
        for (int c = 0; c < dims.channels; ++c) s.grid.at(t, h, w, c) = 0.0;
      }
    }
  }

  for (const auto& obj : layout.objects) {
    const CellRect r = footprint(obj.box, dims);
    const double speed = std::abs(obj.velocity) / max_speed(obj.type);
    const double shifted = obj.box.y2 + layout.depth_offset;
    const int depth = depth_bin(shifted);
    const int band = std::min(kLateralBins - 1, static_cast<int>(obj.box.center_x() * kLateralBins));
    for (int t = 0; t < dims.frames; ++t) {
      for (int h = r.r0; h <= r.r1; ++h) {
        for (int w = r.c0; w <= r.c1; ++w) {
          s.grid.at(t, h, w, static_cast<int>(obj.type)) += 1.0;
          s.grid.at(t, h, w, obj.velocity >= 0.0 ? ch::kVelocityRight : ch::kVelocityLeft) += speed;
          s.grid.at(t, h, w, ch::kNearness) += shifted;
          s.grid.at(t, h, w, ch::kDepth + depth) += 1.0;
          s.grid.at(t, h, w, ch::kLateral + band) += 1.0;
        }
      }
    }
  }

  const std::vector<int> labels = importance_labels(layout, config.suppression);
  std::uniform_real_distribution<double> score(0.5, 1.0);
  std::vector<Proposal> detected;
  std::vector<Proposal> missed;
  for (std::size_t i = 0; i < layout.objects.size(); ++i) {
    const SceneObject& obj = layout.objects[i];
    if (labels[i]) s.gt_boxes.push_back(obj.box);
    if (obj.detected) {
      detected.push_back(Proposal{obj.detection, false, labels[i], score(rng)});
    } else {
      missed.push_back(Proposal{obj.box, false, labels[i], 1.0});
    }
  }
  s.test_proposals = pad_proposals(detected, dims.n_proposals);
  std::vector<Proposal> train = detected;
  train.insert(train.end(), missed.begin(), missed.end());
  s.train_proposals = pad_proposals(std::move(train), dims.n_proposals);
  return s;
}

std::uint64_t scene_seed(std::uint64_t dataset_seed, std::uint64_t index) {
  return splitmix64(splitmix64(dataset_seed) ^ (index * 0x9e3779b97f4a7c15ULL + 1));
}

SceneLayout generate_layout(const GridDims& dims, const SceneConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(splitmix64(seed ^ 0x6c61796f7574ULL));
  return sample_layout(dims, config, rng);
}

Scene generate_scene(const GridDims& dims, const SceneConfig& config, std::uint64_t seed) {
  const SceneLayout layout = generate_layout(dims, config, seed);
  Scene s = render_scene(layout, dims, config, splitmix64(seed ^ 0x6e6f697365ULL));
  s.seed = seed;
  return s;
}

std::vector<Scene> generate_dataset(const GridDims& dims, const SceneConfig& config,
                                    std::uint64_t seed, int threads) {
  check_feasible(dims, config);
  std::vector<Scene> scenes(static_cast<std::size_t>(config.scenes));
  parallel_for(scenes.size(), threads, [&](std::size_t i) {
    scenes[i] = generate_scene(dims, config, scene_seed(seed, i));
    scenes[i].split = static_cast<int>(i % 3) + 1;
  });
  return scenes;
}

DatasetStats dataset_stats(const std::vector<Scene>& scenes) {
  DatasetStats st;
  st.scenes = static_cast<int>(scenes.size());
  for (const auto& s : scenes) {
    int pos = 0;
    for (const auto& p : s.train_proposals) {
      if (p.is_dummy) continue;
      ++st.objects;
      pos += p.label;
    }
    int detected = 0;
    for (const auto& p : s.test_proposals) detected += p.is_dummy ? 0 : 1;
    int objects = 0;
    for (const auto& p : s.train_proposals) objects += p.is_dummy ? 0 : 1;
    st.missed_detections += objects - detected;
    st.positives += pos;
    if (pos == 0) ++st.all_negative_scenes;
    if (s.split >= 1 && s.split <= 3) ++st.per_split[static_cast<std::size_t>(s.split - 1)];
  }
  return st;
}

}  // namespace impgraph
