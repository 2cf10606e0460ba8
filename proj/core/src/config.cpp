#include "impgraph/config.hpp"

#include "impgraph/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace impgraph {

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string ModelConfig::canonical() const {
  std::ostringstream s;
  s << "n=" << dims.n_proposals << ";t=" << dims.frames << ";h=" << dims.height
    << ";w=" << dims.width << ";c=" << dims.channels << ";d=" << effective_edge_dim()
    << ";r=" << roi_size << ";mlp=";
  for (std::size_t i = 0; i < mlp_hidden.size(); ++i) s << (i ? "," : "") << mlp_hidden[i];
  s << ";no_graph=" << no_graph << ";no_global=" << no_global_descriptor
    << ";no_self=" << no_self_attention;
  return s.str();
}

std::uint64_t ModelConfig::hash() const {
  const std::string c = canonical();
  return fnv1a64(c.data(), c.size());
}

void ModelConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) fail(ErrorKind::kUsage, std::string(name) + " must be positive");
  };
  positive(dims.n_proposals, "n_proposals");
  positive(dims.frames, "frames");
  positive(dims.height, "height");
  positive(dims.width, "width");
  positive(dims.channels, "channels");
  positive(roi_size, "roi_size");
  if (edge_dim < 0) fail(ErrorKind::kUsage, "edge_dim must be >= 0 (0 = channels)");
  for (int h : mlp_hidden) positive(h, "mlp_hidden entries");
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) fail(ErrorKind::kUsage, "lr must be positive");
  if (momentum < 0.0 || momentum >= 1.0) fail(ErrorKind::kUsage, "momentum must be in [0, 1)");
  if (decay < 0.0) fail(ErrorKind::kUsage, "decay must be non-negative");
  if (l2 < 0.0) fail(ErrorKind::kUsage, "l2 must be non-negative");
  if (batch_size <= 0) fail(ErrorKind::kUsage, "batch_size must be positive");
  if (epochs < 0) fail(ErrorKind::kUsage, "epochs must be non-negative");
}

void SceneConfig::validate() const {
  if (scenes < 0) fail(ErrorKind::kUsage, "scenes must be non-negative");
  if (min_objects < 1 || max_objects < min_objects) {
    fail(ErrorKind::kUsage, "need 1 <= min_objects <= max_objects");
  }
  if (max_lane_objects < 1) fail(ErrorKind::kUsage, "max_lane_objects must be >= 1");
  if (empty_prob < 0.0 || empty_prob > 1.0) fail(ErrorKind::kUsage, "empty_prob must be in [0, 1]");
  if (miss_rate < 0.0 || miss_rate > 1.0) fail(ErrorKind::kUsage, "miss_rate must be in [0, 1]");
  if (noise_sigma < 0.0) fail(ErrorKind::kUsage, "noise_sigma must be non-negative");
  if (clutter < 0.0) fail(ErrorKind::kUsage, "clutter must be non-negative");
  if (box_jitter < 0.0 || box_jitter > 0.05) fail(ErrorKind::kUsage, "box_jitter must be in [0, 0.05]");
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    fail(ErrorKind::kUsage, "config key '" + key + "': cannot parse '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  fail(ErrorKind::kUsage, "config key '" + key + "': expected a boolean, got '" + value + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::stringstream s(value);
  std::string item;
  while (std::getline(s, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
    if (!item.empty()) out.push_back(parse_number<int>(key, item));
  }
  return out;
}

std::string fmt_double(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

struct Entry {
  const char* help;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define IMPGRAPH_INT(KEY, FIELD, HELP)                                                      \
  {KEY,                                                                                     \
   {HELP, [](RunConfig& c, const std::string& k, const std::string& v) {                    \
      c.FIELD = parse_number<int>(k, v);                                                    \
    },                                                                                      \
    [](const RunConfig& c) { return std::to_string(c.FIELD); }}}
#define IMPGRAPH_DOUBLE(KEY, FIELD, HELP)                                                   \
  {KEY,                                                                                     \
   {HELP, [](RunConfig& c, const std::string& k, const std::string& v) {                    \
      c.FIELD = parse_number<double>(k, v);                                                 \
    },                                                                                      \
    [](const RunConfig& c) { return fmt_double(c.FIELD); }}}
#define IMPGRAPH_BOOL(KEY, FIELD, HELP)                                                     \
  {KEY,                                                                                     \
   {HELP, [](RunConfig& c, const std::string& k, const std::string& v) {                    \
      c.FIELD = parse_bool(k, v);                                                           \
    },                                                                                      \
    [](const RunConfig& c) { return std::string(c.FIELD ? "true" : "false"); }}}

const std::map<std::string, Entry>& registry() {
  static const std::map<std::string, Entry> table = {
      IMPGRAPH_INT("n_proposals", model.dims.n_proposals, "graph nodes per sample after padding"),
      IMPGRAPH_INT("frames", model.dims.frames, "feature grid T"),
      IMPGRAPH_INT("height", model.dims.height, "feature grid H"),
      IMPGRAPH_INT("width", model.dims.width, "feature grid W"),
      IMPGRAPH_INT("channels", model.dims.channels, "feature grid C (also GCN width)"),
      IMPGRAPH_INT("edge_dim", model.edge_dim, "output dim of the edge projections (0 = C)"),
      IMPGRAPH_INT("roi_size", model.roi_size, "ROI pooling bins per side"),
      {"mlp_hidden",
       {"comma-separated hidden sizes of the scoring MLP",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.model.mlp_hidden = parse_int_list(k, v);
        },
        [](const RunConfig& c) {
          std::string s;
          for (std::size_t i = 0; i < c.model.mlp_hidden.size(); ++i) {
            s += (i ? "," : "") + std::to_string(c.model.mlp_hidden[i]);
          }
          return s;
        }}},
      IMPGRAPH_BOOL("no_graph", model.no_graph, "ablation: skip the interaction graph"),
      IMPGRAPH_BOOL("no_global_descriptor", model.no_global_descriptor,
                    "ablation: drop the global descriptor"),
      IMPGRAPH_BOOL("no_self_attention", model.no_self_attention,
                    "ablation: omit the identity in the edge matrix"),
      IMPGRAPH_DOUBLE("lr", train.lr, "initial learning rate"),
      IMPGRAPH_DOUBLE("momentum", train.momentum, "SGD momentum"),
      IMPGRAPH_DOUBLE("decay", train.decay, "inverse-time learning-rate decay"),
      IMPGRAPH_DOUBLE("l2", train.l2, "L2 regularization coefficient"),
      IMPGRAPH_INT("batch_size", train.batch_size, "samples per SGD step"),
      IMPGRAPH_INT("epochs", train.epochs, "training epochs"),
      {"seed",
       {"RNG seed",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.train.seed = parse_number<std::uint64_t>(k, v);
        },
        [](const RunConfig& c) { return std::to_string(c.train.seed); }}},
      IMPGRAPH_BOOL("zero_init_head", train.zero_init_head, "zero the output layer of the MLP"),
      IMPGRAPH_INT("scenes", scene.scenes, "number of synthetic scenes"),
      IMPGRAPH_INT("min_objects", scene.min_objects, "objects per non-trivial scene, lower bound"),
      IMPGRAPH_INT("max_objects", scene.max_objects, "objects per scene, upper bound"),
      IMPGRAPH_INT("max_lane_objects", scene.max_lane_objects, "objects placed in the ego lane"),
      IMPGRAPH_DOUBLE("empty_prob", scene.empty_prob, "probability of an all-negative scene"),
      IMPGRAPH_DOUBLE("noise_sigma", scene.noise_sigma, "background noise standard deviation"),
      IMPGRAPH_DOUBLE("clutter", scene.clutter,
                      "upper bound of the per-scene background level in object channels"),
      IMPGRAPH_DOUBLE("miss_rate", scene.miss_rate, "probability the detector misses an object"),
      IMPGRAPH_DOUBLE("box_jitter", scene.box_jitter, "detector box jitter (normalized units)"),
      IMPGRAPH_BOOL("suppression", scene.suppression, "nearer ego-lane object demotes others"),
      {"lane_mode",
       {"fixed | context",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          if (v == "fixed") {
            c.scene.lane_mode = LaneMode::kFixed;
          } else if (v == "context") {
            c.scene.lane_mode = LaneMode::kContext;
          } else {
            fail(ErrorKind::kUsage, "config key '" + k + "': expected fixed or context");
          }
        },
        [](const RunConfig& c) {
          return std::string(c.scene.lane_mode == LaneMode::kFixed ? "fixed" : "context");
        }}},
      IMPGRAPH_INT("lane_bin", scene.lane_bin, "lateral bin of the ego lane in fixed mode"),
  };
  return table;
}

#undef IMPGRAPH_INT
#undef IMPGRAPH_DOUBLE
#undef IMPGRAPH_BOOL

const Entry& lookup(const std::string& key) {
  const auto& table = registry();
  auto it = table.find(key);
  if (it == table.end()) fail(ErrorKind::kUsage, "unknown config key '" + key + "'");
  return it->second;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  lookup(key).set(*this, key, trim(value));
}

std::string RunConfig::get(const std::string& key) const { return lookup(key).get(*this); }

std::string RunConfig::describe(const std::string& key) { return lookup(key).help; }

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [k, _] : registry()) out.push_back(k);
    return out;
  }();
  return names;
}

void RunConfig::apply(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::kUsage, "config line " + std::to_string(lineno) + ": expected key = value");
    }
    set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  cfg.apply(text);
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& key : keys()) out += key + " = " + get(key) + "\n";
  return out;
}

void RunConfig::validate() const {
  model.validate();
  train.validate();
  scene.validate();
}

}  // namespace impgraph
