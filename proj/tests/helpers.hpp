#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "amlgnn/graph.hpp"
#include "amlgnn/rng.hpp"
#include "amlgnn/tensor.hpp"

namespace testing {

using amlgnn::Rng;
using amlgnn::TransactionGraph;
using amlgnn::ad::Tape;
using amlgnn::ad::Tensor;
using Edge = std::pair<std::int32_t, std::int32_t>;

// Graph over n nodes with the given undirected edges; labels default licit,
// steps default 1, features default zero.
inline TransactionGraph make_graph(std::size_t n, const std::vector<Edge>& edges,
                                   std::vector<std::uint8_t> labels = {},
                                   std::vector<std::int32_t> steps = {}, std::size_t feat_dim = 1,
                                   std::vector<double> features = {}) {
  TransactionGraph g;
  g.num_nodes = n;
  g.feat_dim = feat_dim;
  g.labels = labels.empty() ? std::vector<std::uint8_t>(n, 1) : std::move(labels);
  g.time_steps = steps.empty() ? std::vector<std::int32_t>(n, 1) : std::move(steps);
  g.features = features.empty() ? std::vector<double>(n * feat_dim, 0.0) : std::move(features);
  g.original_ids.resize(n);
  for (std::size_t i = 0; i < n; ++i) g.original_ids[i] = static_cast<std::int64_t>(i);
  g.num_steps = 0;
  for (auto s : g.time_steps) g.num_steps = std::max(g.num_steps, static_cast<int>(s));
  amlgnn::build_csr(g, edges);
  return g;
}

// Erdos-Renyi graph with Gaussian features and random labels (both classes
// present whenever n >= 2).
inline TransactionGraph random_graph(std::size_t n, double p_edge, std::size_t feat_dim, Rng& rng) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.uniform() < p_edge) edges.emplace_back(static_cast<std::int32_t>(i), static_cast<std::int32_t>(j));
    }
  }
  std::vector<std::uint8_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<std::uint8_t>(rng.below(2));
  if (n >= 2) {
    labels[0] = 0;
    labels[1] = 1;
  }
  std::vector<double> feats(n * feat_dim);
  for (auto& f : feats) f = rng.normal();
  return make_graph(n, edges, labels, {}, feat_dim, feats);
}

inline std::vector<double> random_values(std::size_t count, Rng& rng, double scale = 1.0) {
  std::vector<double> v(count);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

// ||analytic - numeric|| / (||analytic|| + ||numeric||), central differences
// with step h, worst case over `params`.
inline double gradient_error(const std::function<Tensor(Tape&)>& loss_fn,
                             std::vector<Tensor> params, double h = 1e-5) {
  for (auto& p : params) p.zero_grad();
  {
    Tape tape;
    const Tensor loss = loss_fn(tape);
    tape.backward(loss);
  }
  double worst = 0.0;
  for (auto& p : params) {
    std::vector<double> analytic(p.grad().begin(), p.grad().end());
    double diff = 0.0, na = 0.0, nn = 0.0;
    for (std::size_t e = 0; e < p.size(); ++e) {
      const double saved = p.value()[e];
      p.value()[e] = saved + h;
      Tape t1;
      const double up = loss_fn(t1).item();
      p.value()[e] = saved - h;
      Tape t2;
      const double down = loss_fn(t2).item();
      p.value()[e] = saved;
      const double numeric = (up - down) / (2.0 * h);
      diff += (analytic[e] - numeric) * (analytic[e] - numeric);
      na += analytic[e] * analytic[e];
      nn += numeric * numeric;
    }
    // Floor keeps exactly-zero gradients (e.g. attention terms that cancel in
    // the softmax) from turning round-off into a relative error of 1.
    const double denom = std::max(std::sqrt(na) + std::sqrt(nn), 1e-6);
    worst = std::max(worst, std::sqrt(diff) / denom);
  }
  return worst;
}

// Permutation helpers: perm[new] = old.
inline std::vector<std::int32_t> random_permutation(std::size_t n, Rng& rng) {
  std::vector<std::int32_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<std::int32_t>(i);
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
  return p;
}

inline TransactionGraph permute_graph(const TransactionGraph& g, const std::vector<std::int32_t>& perm) {
  std::vector<std::int32_t> inv(g.num_nodes);
  for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = static_cast<std::int32_t>(i);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < g.num_nodes; ++i) {
    for (auto j : g.neighbors(i)) {
      if (static_cast<std::size_t>(j) > i) edges.emplace_back(inv[i], inv[j]);
    }
  }
  std::vector<std::uint8_t> labels(g.num_nodes);
  std::vector<std::int32_t> steps(g.num_nodes);
  std::vector<double> feats(g.features.size());
  for (std::size_t k = 0; k < g.num_nodes; ++k) {
    labels[k] = g.labels[perm[k]];
    steps[k] = g.time_steps[perm[k]];
    for (std::size_t c = 0; c < g.feat_dim; ++c) feats[k * g.feat_dim + c] = g.features[perm[k] * g.feat_dim + c];
  }
  return make_graph(g.num_nodes, edges, labels, steps, g.feat_dim, feats);
}

}  // namespace testing
