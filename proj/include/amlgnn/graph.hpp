#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace amlgnn {

enum class Label : std::uint8_t { Illicit = 0, Licit = 1, Unknown = 2 };

inline bool is_labeled(std::uint8_t code) { return code <= 1; }

// Undirected transaction graph in CSR form. Every undirected edge is stored in
// both directions; neighbor lists are sorted, loop-free and duplicate-free.
struct TransactionGraph {
  std::size_t num_nodes = 0;
  std::size_t feat_dim = 0;
  std::vector<std::int64_t> csr_offsets;   // num_nodes + 1
  std::vector<std::int32_t> csr_neighbors;
  std::vector<double> features;            // row-major num_nodes x feat_dim
  std::vector<std::uint8_t> labels;        // 0 illicit, 1 licit, 2 unknown
  std::vector<std::int32_t> time_steps;    // 1..num_steps
  std::vector<std::int64_t> original_ids;  // contiguous index -> transaction ID
  int num_steps = 0;
  // Diagnostics gathered at construction.
  std::size_t input_edges = 0;         // directed rows in the source edge list
  std::size_t cross_step_edges = 0;    // undirected edges joining different steps

  std::size_t num_edge_slots() const { return csr_neighbors.size(); }
  std::size_t num_undirected_edges() const { return csr_neighbors.size() / 2; }

  std::span<const std::int32_t> neighbors(std::size_t i) const {
    return {csr_neighbors.data() + csr_offsets[i],
            static_cast<std::size_t>(csr_offsets[i + 1] - csr_offsets[i])};
  }
  std::size_t degree(std::size_t i) const {
    return static_cast<std::size_t>(csr_offsets[i + 1] - csr_offsets[i]);
  }
  std::span<const double> feature_row(std::size_t i) const {
    return {features.data() + i * feat_dim, feat_dim};
  }

  // Transaction ID -> contiguous index.
  std::unordered_map<std::int64_t, std::int32_t> id_map() const;

  // Direct CSR scan of the structural invariants (symmetry, no self-loops, no
  // duplicates, label and time-step ranges). Throws Error(BadCache) on failure.
  void validate() const;

  bool operator==(const TransactionGraph&) const = default;
};

// Builds the CSR structure from an undirected edge list over [0, n):
// symmetrises, drops self-loops and duplicates, sorts neighbor lists.
void build_csr(TransactionGraph& graph,
               std::span<const std::pair<std::int32_t, std::int32_t>> edges);

// Rows are re-indexed in ascending transaction-ID order, so permuting any of
// the input files yields the same graph. Non-fatal findings (feature arity
// other than 166, cross-step edges) are appended to `warnings` when given.
TransactionGraph load_elliptic(const std::filesystem::path& features_path,
                               const std::filesystem::path& classes_path,
                               const std::filesystem::path& edges_path,
                               std::vector<std::string>* warnings = nullptr);

struct StepRange {
  int first = 0;
  int last = 0;  // inclusive
  bool contains(int step) const { return step >= first && step <= last; }
};

struct TemporalSplit {
  std::vector<bool> train_mask;
  std::vector<bool> val_mask;
  std::vector<bool> test_mask;
  StepRange train_steps;
  StepRange val_steps;
  StepRange test_steps;

  static std::vector<std::int32_t> indices(const std::vector<bool>& mask);
};

TemporalSplit temporal_split(const TransactionGraph& graph, int n_train, int n_val,
                             int n_test);

// 29/10/10 when the graph has 49 steps; otherwise proportional to 29:10:10
// with every part at least one step.
std::array<int, 3> default_partition(int num_steps);

struct SynthParams {
  std::uint64_t seed = 42;
  std::size_t n_nodes = 500;
  int n_steps = 10;
  double illicit_frac = 0.02;
  double unknown_frac = 0.77;
  std::size_t feat_dim = 16;
  double homophily = 0.8;
  double mean_degree = 4.0;
  double class_separation = 1.5;
};

TransactionGraph synth_graph(const SynthParams& params);

struct GraphStats {
  std::size_t num_nodes = 0;
  std::size_t num_undirected_edges = 0;
  std::size_t feat_dim = 0;
  int num_steps = 0;
  std::array<std::size_t, 3> label_counts{};
  std::size_t degree_min = 0;
  double degree_mean = 0.0;
  std::size_t degree_max = 0;
  std::vector<std::size_t> nodes_per_step;  // index 0 = step 1
  double homophily = 0.0;                   // NaN when no labeled-labeled edges
  std::size_t labeled_edges = 0;
  std::size_t cross_step_edges = 0;
};

GraphStats graph_stats(const TransactionGraph& graph);

// Flat binary cache: magic "AMLGRAPH", version byte, little-endian arrays.
inline constexpr std::uint8_t kGraphCacheVersion = 1;
void save_graph(const TransactionGraph& graph, const std::filesystem::path& path);
TransactionGraph load_graph(const std::filesystem::path& path);

}  // namespace amlgnn
