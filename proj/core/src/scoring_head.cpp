#include "impgraph/scoring_head.hpp"

#include "impgraph/error.hpp"

#include <cmath>
#include <sstream>

namespace impgraph {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix fuse_global(const Matrix& updated, const Vector& descriptor) {
  const auto n = updated.rows();
  const auto c = updated.cols();
  Matrix fused(n, c + descriptor.size());
  fused.leftCols(c) = updated;
  for (Eigen::Index i = 0; i < n; ++i) fused.row(i).tail(descriptor.size()) = descriptor.transpose();
  return fused;
}

MlpTape mlp_forward(const Matrix& fused, const MlpParams& mlp) {
  if (mlp.depth() == 0 || mlp.biases.size() != mlp.depth()) {
    fail(ErrorKind::kMismatch, "scoring head: MLP needs matching weight and bias lists");
  }
  if (fused.cols() != mlp.weights.front().rows()) {
    std::ostringstream msg;
    msg << "scoring head: fused features have " << fused.cols() << " columns, MLP expects "
        << mlp.weights.front().rows();
    fail(ErrorKind::kMismatch, msg.str());
  }
  if (mlp.weights.back().cols() != 1) {
    fail(ErrorKind::kMismatch, "scoring head: final MLP layer must have one output");
  }

  MlpTape tape;
  tape.inputs.reserve(mlp.depth());
  tape.preact.reserve(mlp.depth());
  Matrix x = fused;
  for (std::size_t l = 0; l < mlp.depth(); ++l) {
    const Matrix& w = mlp.weights[l];
    const Vector& b = mlp.biases[l];
    if (w.rows() != x.cols() || b.size() != w.cols()) {
      std::ostringstream msg;
      msg << "scoring head: layer " << l << " is " << w.rows() << "x" << w.cols() << " with bias "
          << b.size() << ", input has " << x.cols() << " columns";
      fail(ErrorKind::kMismatch, msg.str());
    }
    Matrix z = x * w;
    z.rowwise() += b.transpose();
    tape.inputs.push_back(std::move(x));
    x = (l + 1 < mlp.depth()) ? Matrix(z.cwiseMax(0.0)) : z;
    tape.preact.push_back(std::move(z));
  }
  tape.logits = x.col(0);
  tape.scores = tape.logits.unaryExpr([](double v) { return sigmoid(v); });
  return tape;
}

Vector score_nodes(const Matrix& fused, const MlpParams& mlp) {
  return mlp_forward(fused, mlp).scores;
}

MlpGradients mlp_backward(const MlpTape& tape, const MlpParams& mlp, const Vector& grad_logits) {
  MlpGradients g;
  g.params.weights.resize(mlp.depth());
  g.params.biases.resize(mlp.depth());
  Matrix grad = grad_logits;  // n x 1
  for (std::size_t l = mlp.depth(); l-- > 0;) {
    if (l + 1 < mlp.depth()) {
      grad = (tape.preact[l].array() > 0.0).select(grad, 0.0);
    }
    g.params.weights[l] = tape.inputs[l].transpose() * grad;
    g.params.biases[l] = grad.colwise().sum().transpose();
    grad = grad * mlp.weights[l].transpose();
  }
  g.input = std::move(grad);
  return g;
}

}  // namespace impgraph
