#include "impgraph/weights_io.hpp"

#include "impgraph/binary_io.hpp"
#include "impgraph/error.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace impgraph {
namespace {

constexpr const char* kModelKeys[] = {
    "n_proposals", "frames",   "height",   "width",
    "channels",    "edge_dim", "roi_size", "mlp_hidden",
    "no_graph",    "no_global_descriptor", "no_self_attention",
};

}  // namespace

std::string model_config_text(const ModelConfig& config) {
  RunConfig rc;
  rc.model = config;
  std::string out;
  for (const char* key : kModelKeys) out += std::string(key) + " = " + rc.get(key) + "\n";
  return out;
}

ModelConfig model_config_from_text(const std::string& text) {
  RunConfig rc;
  rc.apply(text);
  rc.model.validate();
  return rc.model;
}

void write_weights(const std::string& path, const ModelParams& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write weights file " + path);
  BinaryWriter w(out);
  w.bytes(kWeightsMagic, 4);
  w.u32(kWeightsVersion);
  w.u64(params.config.hash());
  w.str(model_config_text(params.config));

  std::uint32_t count = 0;
  params.for_each([&](ConstParamView) { ++count; });
  w.u32(count);
  params.for_each([&](ConstParamView v) {
    w.str(v.name);
    w.u32(static_cast<std::uint32_t>(v.shape.size()));
    for (int d : v.shape) w.u32(static_cast<std::uint32_t>(d));
    for (double x : v.values) w.f64(x);
  });
  if (!out) fail(ErrorKind::kIo, "failed while writing weights file " + path);
}

ModelParams read_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot read weights file " + path);
  BinaryReader r(in, "weights file " + path);

  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kWeightsMagic, 4) != 0) {
    fail(ErrorKind::kIo, path + " is not a weights file (bad magic)");
  }
  const std::uint32_t version = r.u32();
  if (version != kWeightsVersion) {
    fail(ErrorKind::kIo, path + ": unsupported weights version " + std::to_string(version));
  }
  const std::uint64_t hash = r.u64();
  const ModelConfig config = model_config_from_text(r.str());
  if (config.hash() != hash) {
    fail(ErrorKind::kMismatch, path + ": config hash does not match the embedded config");
  }

  ModelParams params = ModelParams::zeros(config);
  const std::uint32_t count = r.u32();
  std::uint32_t seen = 0;
  params.for_each([&](ParamView v) {
    if (seen++ >= count) fail(ErrorKind::kMismatch, path + ": missing array " + v.name);
    const std::string name = r.str(4096);
    if (name != v.name) {
      fail(ErrorKind::kMismatch, path + ": expected array " + v.name + ", found " + name);
    }
    const std::uint32_t rank = r.u32();
    if (rank != v.shape.size()) fail(ErrorKind::kMismatch, path + ": rank mismatch for " + name);
    for (int d : v.shape) {
      if (r.u32() != static_cast<std::uint32_t>(d)) {
        fail(ErrorKind::kMismatch, path + ": shape mismatch for " + name);
      }
    }
    for (double& x : v.values) x = r.f64();
  });
  if (seen != count) fail(ErrorKind::kMismatch, path + ": unexpected extra arrays");
  if (!r.at_end()) fail(ErrorKind::kIo, path + ": trailing bytes after last array");
  return params;
}

}  // namespace impgraph
