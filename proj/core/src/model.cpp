#include "impgraph/model.hpp"

#include "impgraph/error.hpp"
#include "impgraph/parallel.hpp"

#include <sstream>

namespace impgraph {

std::vector<int> Scene::labels_of(const std::vector<Proposal>& props) {
  std::vector<int> out;
  out.reserve(props.size());
  for (const auto& p : props) out.push_back(p.label);
  return out;
}

namespace {

void check_inputs(const FeatureGrid& grid, std::span<const Proposal> proposals,
                  const ModelParams& params) {
  const GridDims& dims = params.config.dims;
  if (grid.frames != dims.frames || grid.height != dims.height || grid.width != dims.width ||
      grid.channels != dims.channels) {
    std::ostringstream msg;
    msg << "forward: grid " << grid.frames << "x" << grid.height << "x" << grid.width << "x"
        << grid.channels << " does not match model config " << dims.frames << "x" << dims.height
        << "x" << dims.width << "x" << dims.channels;
    fail(ErrorKind::kMismatch, msg.str());
  }
  if (proposals.size() != static_cast<std::size_t>(dims.n_proposals)) {
    std::ostringstream msg;
    msg << "forward: got " << proposals.size() << " proposals, model expects "
        << dims.n_proposals;
    fail(ErrorKind::kMismatch, msg.str());
  }
}

}  // namespace

ForwardResult forward(const FeatureGrid& grid, std::span<const Proposal> proposals,
                      const ModelParams& params) {
  check_inputs(grid, proposals, params);
  const ModelConfig& cfg = params.config;
  const int n = cfg.dims.n_proposals;
  const int c = cfg.dims.channels;

  ForwardResult out;
  ForwardTape& tape = out.tape;
  tape.aggregated = temporal_aggregate(grid, params.temporal);

  tape.nodes = Matrix::Zero(n, c);
  tape.node_cells.assign(static_cast<std::size_t>(n) * c, 0);
  for (int i = 0; i < n; ++i) {
    const RoiPooled pooled = roi_pool(tape.aggregated, proposals[static_cast<std::size_t>(i)].box,
                                      cfg.roi_size);
    const PooledVector v = spatial_max_pool(pooled);
    tape.nodes.row(i) = v.values.transpose();
    for (int ch = 0; ch < c; ++ch) {
      const std::size_t pos = static_cast<std::size_t>(v.argmax[static_cast<std::size_t>(ch)]);
      tape.node_cells[static_cast<std::size_t>(i) * c + ch] = pooled.argmax[pos * c + ch];
    }
  }

  const Matrix* updated = &tape.nodes;
  if (!cfg.no_graph) {
    tape.gcn = gcn_forward(tape.nodes, params.edge, params.gcn, !cfg.no_self_attention);
    updated = &tape.gcn->output();
    out.edges = tape.gcn->edges;
  }

  tape.descriptor = global_avg_pool(grid);
  tape.fused = cfg.no_global_descriptor ? *updated : fuse_global(*updated, tape.descriptor);
  tape.mlp = mlp_forward(tape.fused, params.mlp);
  out.scores = tape.mlp.scores;
  out.logits = tape.mlp.logits;
  return out;
}

ModelParams backward_from_logits(const ForwardResult& fwd, const FeatureGrid& grid,
                                 const ModelParams& params, const Vector& grad_logits) {
  const ModelConfig& cfg = params.config;
  const int n = cfg.dims.n_proposals;
  const int c = cfg.dims.channels;
  const ForwardTape& tape = fwd.tape;
  if (grad_logits.size() != n) fail(ErrorKind::kMismatch, "backward: gradient length != N");

  ModelParams grads = ModelParams::zeros(cfg);

  MlpGradients head = mlp_backward(tape.mlp, params.mlp, grad_logits);
  grads.mlp = std::move(head.params);
  // The descriptor comes straight from the input grid, so its gradient stops here.
  Matrix grad_updated = head.input.leftCols(c);

  Matrix grad_nodes;
  if (tape.gcn) {
    GcnGradients g = gcn_backward(*tape.gcn, params.edge, params.gcn, grad_updated);
    grads.edge = std::move(g.edge);
    grads.gcn = std::move(g.gcn);
    grad_nodes = std::move(g.nodes);
  } else {
    grad_nodes = std::move(grad_updated);
  }

  // Max pooling routes each node gradient to its winning cell.
  FeatureGrid grad_agg(1, tape.aggregated.height, tape.aggregated.width, c);
  for (int i = 0; i < n; ++i) {
    for (int ch = 0; ch < c; ++ch) {
      const int cell = tape.node_cells[static_cast<std::size_t>(i) * c + ch];
      grad_agg.data[static_cast<std::size_t>(cell) * c + ch] += grad_nodes(i, ch);
    }
  }
  temporal_aggregate_backward(grid, params.temporal, grad_agg, grads.temporal.weights, nullptr);
  return grads;
}

SampleGradients backward(const ForwardResult& fwd, const FeatureGrid& grid,
                         const ModelParams& params, std::span<const int> labels,
                         double loss_scale) {
  SampleGradients out;
  out.loss = mined_loss(fwd.scores, labels);
  out.grads = backward_from_logits(fwd, grid, params, loss_scale * out.loss.grad_logits);
  return out;
}

BatchGradients batch_gradients(std::span<const BatchItem> batch, const ModelParams& params,
                               int threads) {
  if (batch.empty()) fail(ErrorKind::kUsage, "batch_gradients: empty batch");
  const double scale = 1.0 / static_cast<double>(batch.size());
  std::vector<SampleGradients> per_sample(batch.size());
  parallel_for(batch.size(), threads, [&](std::size_t k) {
    const BatchItem& item = batch[k];
    const ForwardResult fwd = forward(*item.grid, item.proposals, params);
    const std::vector<int> labels = Scene::labels_of(
        std::vector<Proposal>(item.proposals.begin(), item.proposals.end()));
    per_sample[k] = backward(fwd, *item.grid, params, labels, scale);
  });

  BatchGradients out;
  out.grads = ModelParams::zeros(params.config);
  for (const auto& s : per_sample) {
    out.loss += scale * s.loss.total;
    out.grads.axpy(1.0, s.grads);
  }
  return out;
}

double batch_loss(std::span<const BatchItem> batch, const ModelParams& params) {
  if (batch.empty()) fail(ErrorKind::kUsage, "batch_loss: empty batch");
  const double scale = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const BatchItem& item : batch) {
    const ForwardResult fwd = forward(*item.grid, item.proposals, params);
    std::vector<int> labels;
    for (const auto& p : item.proposals) labels.push_back(p.label);
    total += scale * mined_loss(fwd.scores, labels).total;
  }
  return total;
}

}  // namespace impgraph
