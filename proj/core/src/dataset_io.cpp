#include "impgraph/dataset_io.hpp"

#include "impgraph/binary_io.hpp"
#include "impgraph/error.hpp"

#include <cstring>
#include <fstream>

namespace impgraph {
namespace {

constexpr std::uint32_t kMaxDim = 1u << 16;

void write_box(BinaryWriter& w, const BBox& b) {
  w.f64(b.x1);
  w.f64(b.y1);
  w.f64(b.x2);
  w.f64(b.y2);
}

BBox read_box(BinaryReader& r, const std::string& what) {
  const double x1 = r.f64();
  const double y1 = r.f64();
  const double x2 = r.f64();
  const double y2 = r.f64();
  if (!BBox::valid(x1, y1, x2, y2)) fail(ErrorKind::kIo, what + ": invalid box");
  return BBox{x1, y1, x2, y2};
}

void write_proposals(BinaryWriter& w, const std::vector<Proposal>& props) {
  w.u32(static_cast<std::uint32_t>(props.size()));
  for (const auto& p : props) {
    write_box(w, p.box);
    w.u8(p.is_dummy ? 1 : 0);
    w.u8(static_cast<std::uint8_t>(p.label));
    w.f64(p.detector_score);
  }
}

std::vector<Proposal> read_proposals(BinaryReader& r, std::uint32_t expected,
                                     const std::string& what) {
  const std::uint32_t n = r.u32();
  if (n != expected) fail(ErrorKind::kIo, what + ": proposal count does not match header N");
  std::vector<Proposal> props(n);
  for (auto& p : props) {
    p.box = read_box(r, what);
    const std::uint8_t dummy = r.u8();
    const std::uint8_t label = r.u8();
    if (dummy > 1 || label > 1) fail(ErrorKind::kIo, what + ": bad proposal flags");
    p.is_dummy = dummy == 1;
    p.label = label;
    p.detector_score = r.f64();
  }
  return props;
}

}  // namespace

void write_dataset(std::ostream& out, const std::vector<Scene>& scenes) {
  BinaryWriter w(out);
  w.bytes(kDatasetMagic, 4);
  w.u32(kDatasetVersion);
  w.u32(static_cast<std::uint32_t>(scenes.size()));
  for (const Scene& s : scenes) {
    const FeatureGrid& g = s.grid;
    w.u32(static_cast<std::uint32_t>(g.frames));
    w.u32(static_cast<std::uint32_t>(g.height));
    w.u32(static_cast<std::uint32_t>(g.width));
    w.u32(static_cast<std::uint32_t>(g.channels));
    w.u32(static_cast<std::uint32_t>(s.test_proposals.size()));
    w.u32(static_cast<std::uint32_t>(s.split));
    w.u64(s.seed);
    for (double v : g.data) w.f64(v);
    write_proposals(w, s.train_proposals);
    write_proposals(w, s.test_proposals);
    w.u32(static_cast<std::uint32_t>(s.gt_boxes.size()));
    for (const BBox& b : s.gt_boxes) write_box(w, b);
  }
  if (!out) fail(ErrorKind::kIo, "failed while writing dataset");
}

std::vector<Scene> read_dataset(std::istream& in, const std::string& what) {
  BinaryReader r(in, what);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kDatasetMagic, 4) != 0) fail(ErrorKind::kIo, what + ": bad magic");
  const std::uint32_t version = r.u32();
  if (version != kDatasetVersion) {
    fail(ErrorKind::kIo, what + ": unsupported version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32();
  std::vector<Scene> scenes;
  scenes.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    Scene s;
    const std::uint32_t t = r.u32();
    const std::uint32_t h = r.u32();
    const std::uint32_t w = r.u32();
    const std::uint32_t c = r.u32();
    const std::uint32_t n = r.u32();
    if (t == 0 || h == 0 || w == 0 || c == 0 || t > kMaxDim || h > kMaxDim || w > kMaxDim ||
        c > kMaxDim || n > kMaxDim) {
      fail(ErrorKind::kIo, what + ": scene header dims out of range");
    }
    s.split = static_cast<int>(r.u32());
    s.seed = r.u64();
    s.grid = FeatureGrid(static_cast<int>(t), static_cast<int>(h), static_cast<int>(w),
                         static_cast<int>(c));
    for (double& v : s.grid.data) v = r.f64();
    s.train_proposals = read_proposals(r, n, what);
    s.test_proposals = read_proposals(r, n, what);
    const std::uint32_t n_gt = r.u32();
    if (n_gt > kMaxDim) fail(ErrorKind::kIo, what + ": ground-truth count out of range");
    for (std::uint32_t g = 0; g < n_gt; ++g) s.gt_boxes.push_back(read_box(r, what));
    scenes.push_back(std::move(s));
  }
  if (!r.at_end()) fail(ErrorKind::kIo, what + ": trailing bytes after last scene");
  return scenes;
}

void write_dataset(const std::string& path, const std::vector<Scene>& scenes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write dataset file " + path);
  write_dataset(out, scenes);
}

std::vector<Scene> read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot read dataset file " + path);
  return read_dataset(in, "dataset " + path);
}

}  // namespace impgraph
