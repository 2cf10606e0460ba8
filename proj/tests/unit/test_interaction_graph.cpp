#include "../common/helpers.hpp"

#include "impgraph/error.hpp"
#include "impgraph/interaction_graph.hpp"

#include <doctest.h>

#include <cmath>

using namespace impgraph;

namespace {

EdgeParams random_edge(int c, int d, std::mt19937_64& rng) {
  EdgeParams p;
  p.gamma = testing::random_matrix(c, d, rng);
  p.gamma_prime = testing::random_matrix(c, d, rng);
  p.phi = testing::random_matrix(2 * d, 1, rng).col(0);
  return p;
}

GcnWeights random_gcn(int c, std::mt19937_64& rng) {
  GcnWeights w;
  for (auto& m : w.layers) m = testing::random_matrix(c, c, rng, 0.6);
  return w;
}

Matrix naive_softmax_plus_identity(const Matrix& s, bool self) {
  const auto n = s.rows();
  Matrix e(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double z = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) z += std::exp(s(i, j));
    for (Eigen::Index j = 0; j < n; ++j) e(i, j) = std::exp(s(i, j)) / z + (self && i == j ? 1.0 : 0.0);
  }
  return e;
}

}  // namespace

TEST_CASE("interaction scores follow the concatenated projection") {
  std::mt19937_64 rng(10);
  const int n = 7, c = 5, d = 3;
  const Matrix v = testing::random_matrix(n, c, rng);
  const EdgeParams p = random_edge(c, d, rng);
  const Matrix is = interaction_scores(v, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Vector cat(2 * d);
      cat.head(d) = p.gamma.transpose() * v.row(i).transpose();
      cat.tail(d) = p.gamma_prime.transpose() * v.row(j).transpose();
      CHECK(is(i, j) == doctest::Approx(p.phi.dot(cat)).epsilon(1e-12));
    }
  // Directional in general.
  CHECK(std::abs(is(0, 1) - is(1, 0)) > 1e-6);

  EdgeParams bad = p;
  bad.phi = Vector::Zero(d);
  CHECK_THROWS_AS(interaction_scores(v, bad), Error);
}

TEST_CASE("edge matrix is row softmax plus identity") {
  std::mt19937_64 rng(11);
  const Matrix s = testing::random_matrix(9, 9, rng, 3.0);
  const Matrix e = edge_matrix(s, true);
  const Matrix oracle = naive_softmax_plus_identity(s, true);
  CHECK((e - oracle).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(edge_invariants_hold(e, true));
  const Matrix e0 = edge_matrix(s, false);
  CHECK((e0 - naive_softmax_plus_identity(s, false)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(edge_invariants_hold(e0, false));
  CHECK_FALSE(edge_invariants_hold(e0, true));
}

TEST_CASE("saturated scores stay finite") {
  Matrix s(3, 3);
  s << 1000, -1000, 1000, -1000, -1000, -1000, 1000, 1000, -1000;
  const Matrix e = edge_matrix(s, true);
  CHECK(e.allFinite());
  CHECK(e(0, 0) == doctest::Approx(1.5));
  CHECK(e(1, 1) == doctest::Approx(1.0 + 1.0 / 3.0));
  CHECK(e.row(2).sum() == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("rows of the attention share one profile") {
  // Source terms cancel inside each row's softmax.
  std::mt19937_64 rng(12);
  const Matrix v = testing::random_matrix(6, 4, rng);
  const EdgeParams p = random_edge(4, 3, rng);
  const Matrix soft = edge_matrix(interaction_scores(v, p), false);
  for (int i = 1; i < 6; ++i) CHECK((soft.row(i) - soft.row(0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("graph convolution layer") {
  std::mt19937_64 rng(13);
  const Matrix e = testing::random_matrix(5, 5, rng);
  const Matrix v = testing::random_matrix(5, 4, rng);
  const Matrix w = testing::random_matrix(4, 4, rng);
  const Matrix out = graph_conv_layer(e, v, w);
  for (int i = 0; i < 5; ++i)
    for (int c = 0; c < 4; ++c) {
      double acc = 0.0;
      for (int j = 0; j < 5; ++j)
        for (int k = 0; k < 4; ++k) acc += e(i, j) * v(j, k) * w(k, c);
      CHECK(out(i, c) == doctest::Approx(std::max(0.0, acc)).epsilon(1e-12));
    }
}

TEST_CASE("gcn forward builds the edge matrix once") {
  std::mt19937_64 rng(14);
  const Matrix v = testing::random_matrix(6, 4, rng).cwiseAbs();
  const EdgeParams p = random_edge(4, 2, rng);
  const GcnWeights w = random_gcn(4, rng);
  const GcnTape tape = gcn_forward(v, p, w);
  CHECK(tape.edge_evaluations == 1);
  Matrix x = v;
  const Matrix e = edge_matrix(interaction_scores(v, p));
  for (int l = 0; l < kGcnLayers; ++l) x = graph_conv_layer(e, x, w.layers[l]);
  CHECK((tape.output() - x).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((tape.edges - e).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gcn backward matches finite differences") {
  std::mt19937_64 rng(15);
  const int n = 5, c = 4, d = 3;
  const Matrix v = testing::random_matrix(n, c, rng).cwiseAbs();
  const EdgeParams p = random_edge(c, d, rng);
  const GcnWeights w = random_gcn(c, rng);
  const Matrix up = testing::random_matrix(n, c, rng);
  auto objective = [&](const Matrix& vv, const EdgeParams& pp, const GcnWeights& ww) {
    return (gcn_forward(vv, pp, ww).output().array() * up.array()).sum();
  };
  const GcnGradients g = gcn_backward(gcn_forward(v, p, w), p, w, up);
  const double h = 1e-6;
  auto check_entry = [&](double analytic, double fd) {
    CHECK(std::abs(analytic - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
  };
  for (int i = 0; i < c; ++i)
    for (int k = 0; k < d; ++k) {
      EdgeParams a = p, b = p;
      a.gamma(i, k) += h;
      b.gamma(i, k) -= h;
      check_entry(g.edge.gamma(i, k), (objective(v, a, w) - objective(v, b, w)) / (2 * h));
      a = p, b = p;
      a.gamma_prime(i, k) += h;
      b.gamma_prime(i, k) -= h;
      check_entry(g.edge.gamma_prime(i, k), (objective(v, a, w) - objective(v, b, w)) / (2 * h));
    }
  for (int k = 0; k < 2 * d; ++k) {
    EdgeParams a = p, b = p;
    a.phi(k) += h;
    b.phi(k) -= h;
    check_entry(g.edge.phi(k), (objective(v, a, w) - objective(v, b, w)) / (2 * h));
  }
  for (int l = 0; l < kGcnLayers; ++l)
    for (int i = 0; i < c; ++i)
      for (int k = 0; k < c; ++k) {
        GcnWeights a = w, b = w;
        a.layers[l](i, k) += h;
        b.layers[l](i, k) -= h;
        check_entry(g.gcn.layers[l](i, k), (objective(v, p, a) - objective(v, p, b)) / (2 * h));
      }
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < c; ++k) {
      Matrix a = v, b = v;
      a(i, k) += h;
      b(i, k) -= h;
      check_entry(g.nodes(i, k), (objective(a, p, w) - objective(b, p, w)) / (2 * h));
    }
}

TEST_CASE("gamma gradient vanishes identically") {
  // Only b_j survives the row softmax, so the source projection gets no signal.
  std::mt19937_64 rng(16);
  const Matrix v = testing::random_matrix(5, 4, rng).cwiseAbs();
  const EdgeParams p = random_edge(4, 3, rng);
  const GcnWeights w = random_gcn(4, rng);
  const GcnGradients g =
      gcn_backward(gcn_forward(v, p, w), p, w, testing::random_matrix(5, 4, rng));
  CHECK(g.edge.gamma.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(g.edge.gamma_prime.cwiseAbs().maxCoeff() > 1e-6);
}
