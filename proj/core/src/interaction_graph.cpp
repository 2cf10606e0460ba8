#include "impgraph/interaction_graph.hpp"

#include "impgraph/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace impgraph {
namespace {

void check_edge_params(const Matrix& nodes, const EdgeParams& p) {
  const auto c = nodes.cols();
  if (p.gamma.rows() != c || p.gamma_prime.rows() != c || p.gamma.cols() != p.gamma_prime.cols() ||
      p.phi.size() != 2 * p.gamma.cols() || p.gamma.cols() <= 0) {
    std::ostringstream msg;
    msg << "interaction_graph: edge params (gamma " << p.gamma.rows() << "x" << p.gamma.cols()
        << ", gamma' " << p.gamma_prime.rows() << "x" << p.gamma_prime.cols() << ", phi "
        << p.phi.size() << ") do not fit node features with C=" << c;
    fail(ErrorKind::kMismatch, msg.str());
  }
}

// Per-node projections a_i = phi_src . gamma^T v_i and b_j = phi_dst . gamma'^T v_j.
// Plain loops so each node's value depends only on its own row.
void node_projections(const Matrix& nodes, const EdgeParams& p, Vector& src, Vector& dst) {
  const int n = static_cast<int>(nodes.rows());
  const int c = static_cast<int>(nodes.cols());
  const int d = p.dim();
  src = Vector::Zero(n);
  dst = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    double a = 0.0;
    double b = 0.0;
    for (int k = 0; k < d; ++k) {
      double ga = 0.0;
      double gb = 0.0;
      for (int ch = 0; ch < c; ++ch) {
        ga += nodes(i, ch) * p.gamma(ch, k);
        gb += nodes(i, ch) * p.gamma_prime(ch, k);
      }
      a += p.phi(k) * ga;
      b += p.phi(d + k) * gb;
    }
    src(i) = a;
    dst(i) = b;
  }
}

}  // namespace

Matrix interaction_scores(const Matrix& nodes, const EdgeParams& params) {
  check_edge_params(nodes, params);
  Vector src;
  Vector dst;
  node_projections(nodes, params, src, dst);
  const auto n = nodes.rows();
  Matrix scores(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) scores(i, j) = src(i) + dst(j);
  }
  return scores;
}

Matrix edge_matrix(const Matrix& scores, bool self_attention) {
  if (scores.rows() != scores.cols()) {
    fail(ErrorKind::kMismatch, "edge_matrix: interaction scores must be square");
  }
  const auto n = scores.rows();
  Matrix edges(n, n);
  std::vector<double> sorted(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double row_max = scores.row(i).maxCoeff();
    for (Eigen::Index j = 0; j < n; ++j) edges(i, j) = std::exp(scores(i, j) - row_max);
    // Summing in sorted order makes the denominator independent of node order.
    for (Eigen::Index j = 0; j < n; ++j) sorted[static_cast<std::size_t>(j)] = edges(i, j);
    std::sort(sorted.begin(), sorted.end());
    double denom = 0.0;
    for (double v : sorted) denom += v;
    for (Eigen::Index j = 0; j < n; ++j) edges(i, j) /= denom;
    if (self_attention) edges(i, i) += 1.0;
  }
  return edges;
}

Matrix graph_conv_layer(const Matrix& edges, const Matrix& nodes, const Matrix& weights) {
  if (edges.rows() != edges.cols() || edges.cols() != nodes.rows() ||
      weights.rows() != nodes.cols()) {
    std::ostringstream msg;
    msg << "graph_conv_layer: E " << edges.rows() << "x" << edges.cols() << ", V "
        << nodes.rows() << "x" << nodes.cols() << ", W " << weights.rows() << "x"
        << weights.cols() << " are not conformable";
    fail(ErrorKind::kMismatch, msg.str());
  }
  Matrix out = (edges * nodes) * weights;
  return out.cwiseMax(0.0);
}

GcnTape gcn_forward(const Matrix& nodes, const EdgeParams& edge, const GcnWeights& gcn,
                    bool self_attention) {
  GcnTape tape;
  tape.self_attention = self_attention;
  tape.scores = interaction_scores(nodes, edge);
  tape.softmax = edge_matrix(tape.scores, false);
  tape.edges = tape.softmax;
  if (self_attention) tape.edges.diagonal().array() += 1.0;
  tape.edge_evaluations = 1;

  tape.features[0] = nodes;
  for (int l = 0; l < kGcnLayers; ++l) {
    const Matrix& w = gcn.layers[static_cast<std::size_t>(l)];
    if (w.rows() != nodes.cols() || w.cols() != nodes.cols()) {
      std::ostringstream msg;
      msg << "gcn layer " << l << " weights are " << w.rows() << "x" << w.cols()
          << ", expected " << nodes.cols() << "x" << nodes.cols();
      fail(ErrorKind::kMismatch, msg.str());
    }
    auto idx = static_cast<std::size_t>(l);
    tape.aggregated[idx] = tape.edges * tape.features[idx];
    tape.preact[idx] = tape.aggregated[idx] * w;
    tape.features[idx + 1] = tape.preact[idx].cwiseMax(0.0);
  }
  return tape;
}

GcnGradients gcn_backward(const GcnTape& tape, const EdgeParams& edge, const GcnWeights& gcn,
                          const Matrix& grad_output) {
  const Matrix& nodes = tape.features[0];
  const auto n = nodes.rows();
  const auto c = nodes.cols();
  const int d = edge.dim();
  if (grad_output.rows() != n || grad_output.cols() != c) {
    fail(ErrorKind::kMismatch, "gcn_backward: gradient shape does not match GCN output");
  }

  GcnGradients g;
  Matrix grad_edges = Matrix::Zero(n, n);
  Matrix grad_x = grad_output;
  for (int l = kGcnLayers - 1; l >= 0; --l) {
    const auto idx = static_cast<std::size_t>(l);
    // ReLU subgradient is 0 at 0.
    Matrix grad_pre = (tape.preact[idx].array() > 0.0).select(grad_x, 0.0);
    g.gcn.layers[idx] = tape.aggregated[idx].transpose() * grad_pre;
    Matrix grad_agg = grad_pre * gcn.layers[idx].transpose();
    grad_edges.noalias() += grad_agg * tape.features[idx].transpose();
    grad_x = tape.edges.transpose() * grad_agg;
  }
  g.nodes = grad_x;

  // Identity term is constant; only the softmax part carries gradient.
  Matrix grad_scores(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double dot = tape.softmax.row(i).dot(grad_edges.row(i));
    for (Eigen::Index j = 0; j < n; ++j) {
      grad_scores(i, j) = tape.softmax(i, j) * (grad_edges(i, j) - dot);
    }
  }

  // IS(i, j) = a_i + b_j.
  const Vector grad_src = grad_scores.rowwise().sum();
  const Vector grad_dst = grad_scores.colwise().sum().transpose();

  const Vector phi_src = edge.phi.head(d);
  const Vector phi_dst = edge.phi.tail(d);
  const Matrix proj_src = nodes * edge.gamma;        // n x d
  const Matrix proj_dst = nodes * edge.gamma_prime;  // n x d

  g.edge.phi = Vector::Zero(2 * d);
  g.edge.phi.head(d) = proj_src.transpose() * grad_src;
  g.edge.phi.tail(d) = proj_dst.transpose() * grad_dst;
  g.edge.gamma = nodes.transpose() * grad_src * phi_src.transpose();
  g.edge.gamma_prime = nodes.transpose() * grad_dst * phi_dst.transpose();

  g.nodes.noalias() += grad_src * (edge.gamma * phi_src).transpose();
  g.nodes.noalias() += grad_dst * (edge.gamma_prime * phi_dst).transpose();
  return g;
}

bool edge_invariants_hold(const Matrix& edges, bool self_attention, double row_tol) {
  const double target = self_attention ? 2.0 : 1.0;
  const double diag_lo = self_attention ? 1.0 : 0.0;
  const double diag_hi = self_attention ? 2.0 : 1.0;
  const auto n = edges.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(edges.row(i).sum() - target) > row_tol) return false;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double e = edges(i, j);
      if (!std::isfinite(e)) return false;
      if (i == j) {
        if (!(e > diag_lo && e <= diag_hi)) return false;
      } else if (!(e > 0.0 && e < 1.0)) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace impgraph
