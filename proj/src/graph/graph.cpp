#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "amlgnn/error.hpp"
#include "amlgnn/graph.hpp"
#include "../binary_io.hpp"

namespace amlgnn {

std::unordered_map<std::int64_t, std::int32_t> TransactionGraph::id_map() const {
  std::unordered_map<std::int64_t, std::int32_t> map;
  map.reserve(original_ids.size());
  for (std::size_t i = 0; i < original_ids.size(); ++i) {
    map.emplace(original_ids[i], static_cast<std::int32_t>(i));
  }
  return map;
}

void TransactionGraph::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::BadCache, what); };
  if (csr_offsets.size() != num_nodes + 1) fail("csr_offsets length");
  if (csr_offsets.front() != 0) fail("csr_offsets[0] != 0");
  if (static_cast<std::size_t>(csr_offsets.back()) != csr_neighbors.size()) {
    fail("csr_offsets[N] != len(csr_neighbors)");
  }
  if (features.size() != num_nodes * feat_dim) fail("feature matrix size");
  if (labels.size() != num_nodes || time_steps.size() != num_nodes) fail("per-node array size");
  if (original_ids.size() != num_nodes) fail("id array size");
  for (std::size_t i = 0; i < num_nodes; ++i) {
    if (csr_offsets[i + 1] < csr_offsets[i]) fail("csr_offsets decreasing");
    if (labels[i] > 2) fail("label out of range");
    if (time_steps[i] < 1 || time_steps[i] > num_steps) fail("time step out of range");
    auto nbrs = neighbors(i);
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      const auto j = nbrs[k];
      if (j < 0 || static_cast<std::size_t>(j) >= num_nodes) fail("neighbor out of range");
      if (static_cast<std::size_t>(j) == i) fail("self-loop");
      if (k > 0 && nbrs[k - 1] >= j) fail("neighbor list unsorted or duplicated");
      auto back = neighbors(static_cast<std::size_t>(j));
      if (!std::binary_search(back.begin(), back.end(), static_cast<std::int32_t>(i))) {
        fail("asymmetric adjacency");
      }
    }
  }
}

void build_csr(TransactionGraph& graph,
               std::span<const std::pair<std::int32_t, std::int32_t>> edges) {
  const std::size_t n = graph.num_nodes;
  std::vector<std::int64_t> counts(n + 1, 0);
  for (auto [u, v] : edges) {
    if (u == v) continue;
    ++counts[static_cast<std::size_t>(u) + 1];
    ++counts[static_cast<std::size_t>(v) + 1];
  }
  std::partial_sum(counts.begin(), counts.end(), counts.begin());
  std::vector<std::int32_t> slots(static_cast<std::size_t>(counts.back()));
  std::vector<std::int64_t> cursor(counts.begin(), counts.end() - 1);
  for (auto [u, v] : edges) {
    if (u == v) continue;
    slots[static_cast<std::size_t>(cursor[static_cast<std::size_t>(u)]++)] = v;
    slots[static_cast<std::size_t>(cursor[static_cast<std::size_t>(v)]++)] = u;
  }
  // Sort and dedup each list, compacting in place.
  graph.csr_offsets.assign(n + 1, 0);
  std::size_t write = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto first = slots.begin() + counts[i];
    auto last = slots.begin() + counts[i + 1];
    std::sort(first, last);
    last = std::unique(first, last);
    for (auto it = first; it != last; ++it) slots[write++] = *it;
    graph.csr_offsets[i + 1] = static_cast<std::int64_t>(write);
  }
  slots.resize(write);
  graph.csr_neighbors = std::move(slots);

  graph.cross_step_edges = 0;
  if (graph.time_steps.size() == n) {
    for (std::size_t i = 0; i < n; ++i) {
      for (auto j : graph.neighbors(i)) {
        if (static_cast<std::size_t>(j) > i &&
            graph.time_steps[i] != graph.time_steps[static_cast<std::size_t>(j)]) {
          ++graph.cross_step_edges;
        }
      }
    }
  }
}

std::vector<std::int32_t> TemporalSplit::indices(const std::vector<bool>& mask) {
  std::vector<std::int32_t> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.push_back(static_cast<std::int32_t>(i));
  }
  return out;
}

TemporalSplit temporal_split(const TransactionGraph& graph, int n_train, int n_val,
                             int n_test) {
  if (n_train < 1 || n_val < 1 || n_test < 1) {
    throw Error(ErrorKind::BadPartition, "every split needs at least one time step");
  }
  if (n_train + n_val + n_test != graph.num_steps) {
    throw Error(ErrorKind::BadPartition,
                "split counts " + std::to_string(n_train) + "+" + std::to_string(n_val) + "+" +
                    std::to_string(n_test) + " do not sum to T=" +
                    std::to_string(graph.num_steps));
  }
  TemporalSplit split;
  split.train_steps = {1, n_train};
  split.val_steps = {n_train + 1, n_train + n_val};
  split.test_steps = {n_train + n_val + 1, graph.num_steps};
  const std::size_t n = graph.num_nodes;
  split.train_mask.assign(n, false);
  split.val_mask.assign(n, false);
  split.test_mask.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_labeled(graph.labels[i])) continue;
    const int t = graph.time_steps[i];
    if (split.train_steps.contains(t)) {
      split.train_mask[i] = true;
    } else if (split.val_steps.contains(t)) {
      split.val_mask[i] = true;
    } else {
      split.test_mask[i] = true;
    }
  }
  return split;
}

std::array<int, 3> default_partition(int num_steps) {
  if (num_steps < 3) {
    throw Error(ErrorKind::BadPartition, "need at least 3 time steps for a temporal split");
  }
  if (num_steps == 49) return {29, 10, 10};
  int val = std::max(1, static_cast<int>(std::lround(num_steps * 10.0 / 49.0)));
  int test = val;
  int train = num_steps - val - test;
  while (train < 1) {
    if (val > 1) {
      --val;
    } else {
      --test;
    }
    train = num_steps - val - test;
  }
  return {train, val, test};
}

GraphStats graph_stats(const TransactionGraph& graph) {
  GraphStats s;
  s.num_nodes = graph.num_nodes;
  s.num_undirected_edges = graph.num_undirected_edges();
  s.feat_dim = graph.feat_dim;
  s.num_steps = graph.num_steps;
  s.cross_step_edges = graph.cross_step_edges;
  s.nodes_per_step.assign(static_cast<std::size_t>(std::max(graph.num_steps, 0)), 0);
  s.degree_min = graph.num_nodes ? std::numeric_limits<std::size_t>::max() : 0;
  std::size_t same = 0;
  for (std::size_t i = 0; i < graph.num_nodes; ++i) {
    ++s.label_counts[graph.labels[i]];
    ++s.nodes_per_step[static_cast<std::size_t>(graph.time_steps[i] - 1)];
    const auto d = graph.degree(i);
    s.degree_min = std::min(s.degree_min, d);
    s.degree_max = std::max(s.degree_max, d);
    for (auto j : graph.neighbors(i)) {
      const auto ju = static_cast<std::size_t>(j);
      if (ju <= i) continue;
      if (is_labeled(graph.labels[i]) && is_labeled(graph.labels[ju])) {
        ++s.labeled_edges;
        if (graph.labels[i] == graph.labels[ju]) ++same;
      }
    }
  }
  s.degree_mean = graph.num_nodes
                      ? static_cast<double>(graph.num_edge_slots()) / static_cast<double>(graph.num_nodes)
                      : 0.0;
  s.homophily = s.labeled_edges ? static_cast<double>(same) / static_cast<double>(s.labeled_edges)
                                : std::numeric_limits<double>::quiet_NaN();
  return s;
}

namespace {
constexpr char kGraphMagic[8] = {'A', 'M', 'L', 'G', 'R', 'A', 'P', 'H'};
}

void save_graph(const TransactionGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::BadCache, "cannot open " + path.string() + " for writing");
  out.write(kGraphMagic, sizeof(kGraphMagic));
  detail::write_pod<std::uint8_t>(out, kGraphCacheVersion);
  detail::write_pod<std::uint64_t>(out, graph.num_nodes);
  detail::write_pod<std::uint64_t>(out, graph.feat_dim);
  detail::write_pod<std::int32_t>(out, graph.num_steps);
  detail::write_pod<std::uint64_t>(out, graph.input_edges);
  detail::write_pod<std::uint64_t>(out, graph.cross_step_edges);
  detail::write_array(out, graph.csr_offsets);
  detail::write_array(out, graph.csr_neighbors);
  detail::write_array(out, graph.features);
  detail::write_array(out, graph.labels);
  detail::write_array(out, graph.time_steps);
  detail::write_array(out, graph.original_ids);
  if (!out) throw Error(ErrorKind::BadCache, "write failed for " + path.string());
}

TransactionGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::BadCache, "cannot open " + path.string());
  char magic[8] = {};
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(std::begin(magic), std::end(magic), std::begin(kGraphMagic))) {
    throw Error(ErrorKind::BadCache, path.string() + " is not a graph cache");
  }
  const auto version = detail::read_pod<std::uint8_t>(in);
  if (version != kGraphCacheVersion) {
    throw Error(ErrorKind::BadCache, "unsupported graph cache version " + std::to_string(version));
  }
  TransactionGraph g;
  g.num_nodes = detail::read_pod<std::uint64_t>(in);
  g.feat_dim = detail::read_pod<std::uint64_t>(in);
  g.num_steps = detail::read_pod<std::int32_t>(in);
  g.input_edges = detail::read_pod<std::uint64_t>(in);
  g.cross_step_edges = detail::read_pod<std::uint64_t>(in);
  g.csr_offsets = detail::read_array<std::int64_t>(in);
  g.csr_neighbors = detail::read_array<std::int32_t>(in);
  g.features = detail::read_array<double>(in);
  g.labels = detail::read_array<std::uint8_t>(in);
  g.time_steps = detail::read_array<std::int32_t>(in);
  g.original_ids = detail::read_array<std::int64_t>(in);
  g.validate();
  return g;
}

}  // namespace amlgnn
