#include <cmath>

#include "amlgnn/error.hpp"
#include "amlgnn/graph.hpp"
#include "amlgnn/model.hpp"

namespace amlgnn {

using ad::SparseAdj;
using ad::Tape;
using ad::Tensor;

std::vector<double> gcn_coefficients(const SparseAdj& with_loops) {
  auto off = with_loops.offsets();
  auto idx = with_loops.indices();
  std::vector<double> inv_sqrt(with_loops.num_nodes());
  for (std::size_t i = 0; i < inv_sqrt.size(); ++i) {
    inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(with_loops.segment_size(i)));
  }
  std::vector<double> c(with_loops.num_edges());
  for (std::size_t i = 0; i < inv_sqrt.size(); ++i) {
    for (auto e = off[i]; e < off[i + 1]; ++e) {
      const auto ue = static_cast<std::size_t>(e);
      c[ue] = inv_sqrt[i] * inv_sqrt[static_cast<std::size_t>(idx[ue])];
    }
  }
  return c;
}

std::vector<double> mean_coefficients(const SparseAdj& adj) {
  std::vector<double> c(adj.num_edges());
  auto off = adj.offsets();
  for (std::size_t i = 0; i < adj.num_nodes(); ++i) {
    const double w = 1.0 / static_cast<double>(std::max<std::size_t>(adj.segment_size(i), 1));
    for (auto e = off[i]; e < off[i + 1]; ++e) c[static_cast<std::size_t>(e)] = w;
  }
  return c;
}

GraphOperators GraphOperators::build(const TransactionGraph& graph) {
  GraphOperators ops;
  ops.self_loops = SparseAdj::from_graph(graph, true);
  ops.gcn = ops.self_loops.with_coefficients(gcn_coefficients(ops.self_loops));
  ops.plain = SparseAdj::from_graph(graph, false);
  ops.mean = ops.plain.with_coefficients(mean_coefficients(ops.plain));
  return ops;
}

namespace {

Tensor zero_param(std::size_t rows, std::size_t cols) {
  return Tensor::parameter(rows, cols, std::vector<double>(rows * cols, 0.0));
}

}  // namespace

LinearParams make_linear(std::size_t d_in, std::size_t d_out) {
  return {zero_param(d_in, d_out), zero_param(1, d_out)};
}

GcnParams make_gcn(std::size_t d_in, std::size_t d_out) {
  return {zero_param(d_in, d_out), zero_param(1, d_out)};
}

GatParams make_gat(std::size_t d_in, std::size_t d_out, int heads, bool concat) {
  if (heads < 1) throw Error(ErrorKind::ConfigOutOfRange, "gat_heads must be >= 1");
  GatParams p;
  for (int h = 0; h < heads; ++h) {
    p.heads.push_back({zero_param(d_in, d_out), zero_param(d_out, 1), zero_param(d_out, 1)});
  }
  p.concat = concat && heads > 1;
  p.bias = zero_param(1, p.concat ? d_out * static_cast<std::size_t>(heads) : d_out);
  return p;
}

SageParams make_sage(std::size_t d_in, std::size_t d_out) {
  return {zero_param(d_in, d_out), zero_param(d_in, d_out), zero_param(1, d_out)};
}

GraphNormParams make_graphnorm(std::size_t d) {
  GraphNormParams p{zero_param(1, d), zero_param(1, d), zero_param(1, d)};
  reset_default(p);
  return p;
}

Tensor linear_forward(Tape& tape, const LinearParams& p, const Tensor& h) {
  return tape.add_bias(tape.matmul(h, p.weight), p.bias);
}

Tensor gcn_forward(Tape& tape, const GcnParams& p, const SparseAdj& gcn_adj, const Tensor& h) {
  return tape.add_bias(tape.spmm(gcn_adj, tape.matmul(h, p.weight)), p.bias);
}

Tensor gat_attention(Tape& tape, const GatHead& head, const SparseAdj& with_loops,
                     const Tensor& projected, double negative_slope) {
  const Tensor score_self = tape.matmul(projected, head.att_src);
  const Tensor score_nbr = tape.matmul(projected, head.att_dst);
  const Tensor logits = tape.leaky_relu(
      tape.add(tape.gather_edges(score_self, with_loops, ad::Endpoint::Row),
               tape.gather_edges(score_nbr, with_loops, ad::Endpoint::Col)),
      negative_slope);
  return tape.segment_softmax(logits, with_loops);
}

Tensor gat_forward(Tape& tape, const GatParams& p, const SparseAdj& with_loops, const Tensor& h,
                   double negative_slope) {
  std::vector<Tensor> outs;
  outs.reserve(p.heads.size());
  for (const auto& head : p.heads) {
    const Tensor projected = tape.matmul(h, head.weight);
    const Tensor alpha = gat_attention(tape, head, with_loops, projected, negative_slope);
    outs.push_back(tape.spmm(with_loops, alpha, projected));
  }
  Tensor merged;
  if (outs.size() == 1) {
    merged = outs.front();
  } else if (p.concat) {
    merged = tape.concat_cols(outs);
  } else {
    merged = outs.front();
    for (std::size_t k = 1; k < outs.size(); ++k) merged = tape.add(merged, outs[k]);
    merged = tape.scale(merged, 1.0 / static_cast<double>(outs.size()));
  }
  return tape.add_bias(merged, p.bias);
}

Tensor sage_forward(Tape& tape, const SageParams& p, const GraphOperators& ops, const Tensor& h,
                    Aggregator aggregator) {
  Tensor agg;
  switch (aggregator) {
    case Aggregator::Mean: agg = tape.spmm(ops.mean, h); break;
    case Aggregator::Max: agg = tape.segment_max(ops.plain, h); break;
    default: throw Error(ErrorKind::UnknownAggregator, "aggregator must be mean or max");
  }
  return tape.add_bias(tape.add(tape.matmul(h, p.w_self), tape.matmul(agg, p.w_neigh)), p.bias);
}

Tensor graphnorm_forward(Tape& tape, const GraphNormParams& p, const Tensor& h, double eps) {
  return tape.graph_norm(h, p.alpha, p.gamma, p.beta, eps);
}

}  // namespace amlgnn
