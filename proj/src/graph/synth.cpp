#include <algorithm>
#include <cmath>
#include <numeric>

#include "amlgnn/error.hpp"
#include "amlgnn/graph.hpp"
#include "amlgnn/rng.hpp"

namespace amlgnn {

namespace {

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.below(i)]);
  }
}

}  // namespace

TransactionGraph synth_graph(const SynthParams& p) {
  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in_unit(p.illicit_frac) || !in_unit(p.unknown_frac) || !in_unit(p.homophily) ||
      p.illicit_frac + p.unknown_frac > 1.0) {
    throw Error(ErrorKind::BadFraction, "fractions must lie in [0,1] with illicit+unknown <= 1");
  }
  if (p.n_steps < 1 || p.n_nodes < static_cast<std::size_t>(p.n_steps)) {
    throw Error(ErrorKind::ConfigOutOfRange, "need n_nodes >= n_steps >= 1");
  }
  if (p.mean_degree < 0.0) throw Error(ErrorKind::ConfigOutOfRange, "mean_degree must be >= 0");

  Rng root(p.seed);
  Rng label_rng = root.split(1);
  Rng feat_rng = root.split(2);
  Rng edge_rng = root.split(3);

  const std::size_t n = p.n_nodes;
  TransactionGraph g;
  g.num_nodes = n;
  g.feat_dim = p.feat_dim;
  g.num_steps = p.n_steps;
  g.time_steps.resize(n);
  g.original_ids.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.time_steps[i] = static_cast<std::int32_t>(i % static_cast<std::size_t>(p.n_steps)) + 1;
    g.original_ids[i] = static_cast<std::int64_t>(i);
  }

  // Exact label counts, placed by a seeded permutation.
  const auto n_illicit = static_cast<std::size_t>(std::llround(p.illicit_frac * static_cast<double>(n)));
  const auto n_unknown = std::min(
      n - n_illicit, static_cast<std::size_t>(std::llround(p.unknown_frac * static_cast<double>(n))));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, label_rng);
  g.labels.assign(n, static_cast<std::uint8_t>(Label::Licit));
  // Hidden class of every node; unknown nodes draw one with the labeled illicit rate.
  std::vector<std::uint8_t> latent(n, 1);
  const std::size_t n_labeled = n - n_unknown;
  const double illicit_rate =
      n_labeled ? static_cast<double>(n_illicit) / static_cast<double>(n_labeled) : p.illicit_frac;
  for (std::size_t r = 0; r < n; ++r) {
    const auto i = order[r];
    if (r < n_illicit) {
      g.labels[i] = 0;
      latent[i] = 0;
    } else if (r < n_illicit + n_unknown) {
      g.labels[i] = 2;
      latent[i] = label_rng.uniform() < illicit_rate ? 0 : 1;
    }
  }

  // Class-conditional Gaussians: N(+-(sep/2) * s, I) with s a random unit sign vector.
  std::vector<double> direction(p.feat_dim);
  const double norm = p.feat_dim ? 1.0 / std::sqrt(static_cast<double>(p.feat_dim)) : 0.0;
  for (auto& d : direction) d = (feat_rng.uniform() < 0.5 ? -norm : norm);
  g.features.resize(n * p.feat_dim);
  for (std::size_t i = 0; i < n; ++i) {
    const double sign = latent[i] == 0 ? 1.0 : -1.0;
    for (std::size_t k = 0; k < p.feat_dim; ++k) {
      g.features[i * p.feat_dim + k] =
          feat_rng.normal() + sign * 0.5 * p.class_separation * direction[k];
    }
  }

  // Edges only inside a time step; `homophily` is the probability that an
  // edge endpoint is drawn from the source's latent class.
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  for (int step = 1; step <= p.n_steps; ++step) {
    std::array<std::vector<std::int32_t>, 2> by_class;
    std::vector<std::int32_t> members;
    for (std::size_t i = static_cast<std::size_t>(step - 1); i < n;
         i += static_cast<std::size_t>(p.n_steps)) {
      members.push_back(static_cast<std::int32_t>(i));
      by_class[latent[i]].push_back(static_cast<std::int32_t>(i));
    }
    if (members.size() < 2) continue;
    const auto n_edges = static_cast<std::size_t>(
        std::llround(p.mean_degree * static_cast<double>(members.size()) / 2.0));
    for (std::size_t e = 0; e < n_edges; ++e) {
      const auto u = members[edge_rng.below(members.size())];
      const auto cu = latent[static_cast<std::size_t>(u)];
      const bool same = edge_rng.uniform() < p.homophily;
      const auto& pool = by_class[same ? cu : 1 - cu];
      if (pool.empty()) continue;
      const auto v = pool[edge_rng.below(pool.size())];
      if (u != v) edges.emplace_back(u, v);
    }
  }
  g.input_edges = edges.size();
  build_csr(g, edges);
  return g;
}

}  // namespace amlgnn
