#include "impgraph/params.hpp"

#include "impgraph/error.hpp"

#include <cmath>
#include <random>

namespace impgraph {
namespace {

std::span<double> span_of(Matrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
std::span<double> span_of(Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

int as_int(Eigen::Index v) { return static_cast<int>(v); }

template <typename Fn>
void visit(ModelParams& p, Fn&& fn) {
  fn("temporal_conv",
     std::vector<int>{p.temporal.frames, p.temporal.in_channels, p.temporal.out_channels},
     span_of(p.temporal.weights));
  if (!p.config.no_graph) {
    fn("edge.gamma", std::vector<int>{as_int(p.edge.gamma.rows()), as_int(p.edge.gamma.cols())},
       span_of(p.edge.gamma));
    fn("edge.gamma_prime",
       std::vector<int>{as_int(p.edge.gamma_prime.rows()), as_int(p.edge.gamma_prime.cols())},
       span_of(p.edge.gamma_prime));
    fn("edge.phi", std::vector<int>{as_int(p.edge.phi.size())}, span_of(p.edge.phi));
    for (int l = 0; l < kGcnLayers; ++l) {
      Matrix& w = p.gcn.layers[static_cast<std::size_t>(l)];
      fn("gcn.w" + std::to_string(l + 1), std::vector<int>{as_int(w.rows()), as_int(w.cols())},
         span_of(w));
    }
  }
  for (std::size_t l = 0; l < p.mlp.depth(); ++l) {
    Matrix& w = p.mlp.weights[l];
    fn("mlp.w" + std::to_string(l + 1), std::vector<int>{as_int(w.rows()), as_int(w.cols())},
       span_of(w));
  }
  for (std::size_t l = 0; l < p.mlp.depth(); ++l) {
    Vector& b = p.mlp.biases[l];
    fn("mlp.b" + std::to_string(l + 1), std::vector<int>{as_int(b.size())}, span_of(b));
  }
}

}  // namespace

ModelParams ModelParams::zeros(const ModelConfig& config) {
  config.validate();
  const int c = config.dims.channels;
  const int t = config.dims.frames;
  const int d = config.effective_edge_dim();

  ModelParams p;
  p.config = config;
  p.temporal = TemporalKernel{t, c, c, Matrix::Zero(t * c, c)};
  if (!config.no_graph) {
    p.edge.gamma = Matrix::Zero(c, d);
    p.edge.gamma_prime = Matrix::Zero(c, d);
    p.edge.phi = Vector::Zero(2 * d);
    for (auto& w : p.gcn.layers) w = Matrix::Zero(c, c);
  }
  int in = config.mlp_input_dim();
  std::vector<int> sizes = config.mlp_hidden;
  sizes.push_back(1);
  for (int out : sizes) {
    p.mlp.weights.push_back(Matrix::Zero(in, out));
    p.mlp.biases.push_back(Vector::Zero(out));
    in = out;
  }
  return p;
}

ModelParams ModelParams::glorot(const ModelConfig& config, std::uint64_t seed) {
  ModelParams p = zeros(config);
  std::mt19937_64 rng(seed);
  auto fill = [&rng](std::span<double> values, int fan_in, int fan_out) {
    const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-s, s);
    for (double& v : values) v = dist(rng);
  };
  p.for_each([&](ParamView v) {
    if (v.name.rfind("mlp.b", 0) == 0) return;
    if (v.shape.size() == 3) {
      // Conv kernel: receptive field is the T frames.
      fill(v.values, v.shape[0] * v.shape[1], v.shape[0] * v.shape[2]);
    } else if (v.shape.size() == 2) {
      fill(v.values, v.shape[0], v.shape[1]);
    } else {
      fill(v.values, v.shape[0], 1);
    }
  });
  return p;
}

void ModelParams::for_each(const std::function<void(ParamView)>& fn) {
  visit(*this, [&](const std::string& name, std::vector<int> shape, std::span<double> values) {
    fn(ParamView{name, std::move(shape), values});
  });
}

void ModelParams::for_each(const std::function<void(ConstParamView)>& fn) const {
  visit(const_cast<ModelParams&>(*this),
        [&](const std::string& name, std::vector<int> shape, std::span<double> values) {
          fn(ConstParamView{name, std::move(shape), {values.data(), values.size()}});
        });
}

std::vector<std::string> ModelParams::names() const {
  std::vector<std::string> out;
  for_each([&](ConstParamView v) { out.push_back(v.name); });
  return out;
}

std::size_t ModelParams::size() const {
  std::size_t n = 0;
  for_each([&](ConstParamView v) { n += v.values.size(); });
  return n;
}

bool ModelParams::all_finite() const {
  bool ok = true;
  for_each([&](ConstParamView v) {
    for (double x : v.values) ok = ok && std::isfinite(x);
  });
  return ok;
}

bool ModelParams::operator==(const ModelParams& other) const {
  if (config.hash() != other.config.hash()) return false;
  std::vector<ConstParamView> mine;
  std::vector<ConstParamView> theirs;
  for_each([&](ConstParamView v) { mine.push_back(v); });
  other.for_each([&](ConstParamView v) { theirs.push_back(v); });
  if (mine.size() != theirs.size()) return false;
  for (std::size_t i = 0; i < mine.size(); ++i) {
    if (mine[i].name != theirs[i].name || mine[i].shape != theirs[i].shape) return false;
    if (!std::equal(mine[i].values.begin(), mine[i].values.end(), theirs[i].values.begin())) {
      return false;
    }
  }
  return true;
}

void ModelParams::axpy(double scale_factor, const ModelParams& other) {
  std::vector<std::span<const double>> src;
  other.for_each([&](ConstParamView v) { src.push_back(v.values); });
  std::size_t i = 0;
  for_each([&](ParamView v) {
    if (i >= src.size() || src[i].size() != v.values.size()) {
      fail(ErrorKind::kMismatch, "ModelParams::axpy: parameter layouts differ at " + v.name);
    }
    for (std::size_t k = 0; k < v.values.size(); ++k) v.values[k] += scale_factor * src[i][k];
    ++i;
  });
}

void ModelParams::scale(double factor) {
  for_each([&](ParamView v) {
    for (double& x : v.values) x *= factor;
  });
}

}  // namespace impgraph
