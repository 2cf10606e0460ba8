#include "impgraph/config.hpp"
#include "impgraph/dataset_io.hpp"
#include "impgraph/error.hpp"
#include "impgraph/gradcheck.hpp"
#include "impgraph/optimizer.hpp"
#include "impgraph/synthetic.hpp"
#include "impgraph/training.hpp"
#include "impgraph/weights_io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace impgraph;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "impgraph_unit";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ModelConfig tiny_model() {
  ModelConfig m;
  m.dims = GridDims{12, 2, 8, 10, 32};
  m.roi_size = 3;
  m.mlp_hidden = {16};
  return m;
}

std::vector<Scene> tiny_scenes(int n = 12) {
  SceneConfig cfg;
  cfg.scenes = n;
  cfg.max_objects = 6;
  return generate_dataset(tiny_model().dims, cfg, 3);
}

}  // namespace

TEST_CASE("sgd step follows the momentum update") {
  ModelConfig c = gradcheck_config();
  ModelParams p = ModelParams::glorot(c, 1);
  const ModelParams start = p;
  ModelParams g = ModelParams::glorot(c, 2);
  TrainConfig t;
  t.lr = 0.1;
  t.momentum = 0.5;
  t.decay = 0.25;
  t.l2 = 0.01;
  OptimizerState st = OptimizerState::for_params(p, t);
  sgd_step(p, g, st);
  const ModelParams after_one = p;
  sgd_step(p, g, st);
  CHECK(st.step == 2);

  // Oracle on one scalar: v1 = -lr (g + l2 th0); v2 = m v1 - lr/(1+decay) (g + l2 th1).
  const double th0 = start.gcn.layers[1](2, 3);
  const double gg = g.gcn.layers[1](2, 3);
  const double v1 = -0.1 * (gg + 0.01 * th0);
  const double th1 = th0 + v1;
  CHECK(after_one.gcn.layers[1](2, 3) == doctest::Approx(th1).epsilon(1e-14));
  const double v2 = 0.5 * v1 - (0.1 / 1.25) * (gg + 0.01 * th1);
  CHECK(p.gcn.layers[1](2, 3) == doctest::Approx(th1 + v2).epsilon(1e-14));
}

TEST_CASE("non-finite gradients stop the optimizer") {
  ModelConfig c = gradcheck_config();
  ModelParams p = ModelParams::glorot(c, 1);
  ModelParams g = ModelParams::zeros(c);
  g.edge.phi(0) = NAN;
  OptimizerState st = OptimizerState::for_params(p, TrainConfig{});
  try {
    sgd_step(p, g, st);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNumerical);
    CHECK(std::string(e.what()).find("edge.phi") != std::string::npos);
  }
}

TEST_CASE("zero_init_head starts every score at one half") {
  TrainConfig t;
  t.zero_init_head = true;
  const ModelParams p = initial_params(tiny_model(), t);
  CHECK(p.mlp.weights.back().isZero());
  CHECK_FALSE(p.mlp.weights.front().isZero());
  const auto scenes = tiny_scenes(1);
  for (double s : model_scorer(p)(scenes[0])) CHECK(s == 0.5);
}

TEST_CASE("training is deterministic and reduces the loss") {
  const auto scenes = tiny_scenes();
  TrainConfig t;
  t.epochs = 6;
  t.lr = 0.003;
  t.batch_size = 4;
  const TrainResult a = train_model(tiny_model(), t, scenes);
  const TrainResult b = train_model(tiny_model(), t, scenes, 0, 3);
  CHECK(a.params == b.params);
  CHECK(a.step_losses == b.step_losses);
  REQUIRE(a.epochs.size() == 6);
  CHECK(a.epochs.back().mean_loss < a.epochs.front().mean_loss);
  CHECK(a.epochs.front().edge_row_sum == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(a.params.all_finite());

  TrainConfig other = t;
  other.seed = 1;
  CHECK_FALSE(train_model(tiny_model(), other, scenes).params == a.params);
  CHECK(train_model(tiny_model(), t, scenes, 0, 1, {}, 2).step_losses.size() == 2);
}

TEST_CASE("weights round-trip bit for bit") {
  ModelConfig m = tiny_model();
  m.no_global_descriptor = true;
  const ModelParams p = ModelParams::glorot(m, 9);
  const fs::path path = temp_path("w.bin");
  write_weights(path.string(), p);
  const ModelParams q = read_weights(path.string());
  CHECK(q == p);
  CHECK(q.config.hash() == m.hash());
  const fs::path again = temp_path("w2.bin");
  write_weights(again.string(), q);
  CHECK(slurp(path) == slurp(again));
}

TEST_CASE("corrupt weight files are rejected") {
  const ModelParams p = ModelParams::glorot(tiny_model(), 9);
  const fs::path path = temp_path("bad.bin");
  write_weights(path.string(), p);
  std::string bytes = slurp(path);
  {
    std::ofstream out(path, std::ios::binary);
    out << bytes.substr(0, bytes.size() - 3);
  }
  CHECK_THROWS_AS(read_weights(path.string()), Error);
  bytes[0] = 'X';
  {
    std::ofstream out(path, std::ios::binary);
    out << bytes;
  }
  CHECK_THROWS_AS(read_weights(path.string()), Error);
  CHECK_THROWS_AS(read_weights(temp_path("missing.bin").string()), Error);
}

TEST_CASE("datasets round-trip bit for bit") {
  const auto scenes = tiny_scenes(9);
  std::stringstream buf;
  write_dataset(buf, scenes);
  const std::string bytes = buf.str();
  std::stringstream in(bytes);
  CHECK(read_dataset(in) == scenes);
  std::stringstream in2(bytes);
  std::stringstream again;
  write_dataset(again, read_dataset(in2));
  CHECK(again.str() == bytes);

  std::stringstream cut(bytes.substr(0, bytes.size() / 2));
  try {
    read_dataset(cut);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kIo);
  }
  std::stringstream extra(bytes + "x");
  CHECK_THROWS_AS(read_dataset(extra), Error);
}

TEST_CASE("config text round-trips and rejects unknown keys") {
  RunConfig c;
  c.set("lr", "0.01");
  c.set("no_graph", "true");
  c.set("mlp_hidden", "64,8");
  c.set("lane_mode", "context");
  const RunConfig d = RunConfig::parse(c.to_text());
  CHECK(d.train.lr == 0.01);
  CHECK(d.model.no_graph);
  CHECK(d.model.mlp_hidden == std::vector<int>{64, 8});
  CHECK(d.scene.lane_mode == LaneMode::kContext);
  CHECK(d.to_text() == c.to_text());

  const RunConfig e = RunConfig::parse("# comment\n  epochs = 4  \n\nbatch_size=2\n");
  CHECK(e.train.epochs == 4);
  CHECK(e.train.batch_size == 2);

  CHECK_THROWS_AS(RunConfig::parse("learning_rate = 0.1\n"), Error);
  CHECK_THROWS_AS(RunConfig::parse("lr = fast\n"), Error);
  CHECK_THROWS_AS(RunConfig::parse("lr = -1\n").validate(), Error);
  CHECK_THROWS_AS(RunConfig::parse("no_graph = maybe\n"), Error);
  for (const auto& key : RunConfig::keys()) CHECK_FALSE(RunConfig::describe(key).empty());
}

TEST_CASE("model config hash tracks shape fields") {
  ModelConfig a;
  ModelConfig b = a;
  CHECK(a.hash() == b.hash());
  b.edge_dim = 7;
  CHECK(a.hash() != b.hash());
  CHECK(model_config_from_text(model_config_text(b)).hash() == b.hash());
}
