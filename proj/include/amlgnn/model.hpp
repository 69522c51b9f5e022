#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "amlgnn/optim.hpp"
#include "amlgnn/rng.hpp"
#include "amlgnn/tensor.hpp"

namespace amlgnn {

struct TransactionGraph;

enum class LayerType { Gcn, Gat, Sage };
enum class NormKind { None, GraphNorm };
enum class InitScheme { Default, Xavier, XavierHeadOnly };
enum class Aggregator { Mean, Max };

std::string_view to_string(LayerType v);
std::string_view to_string(NormKind v);
std::string_view to_string(InitScheme v);
std::string_view to_string(Aggregator v);
LayerType parse_layer_type(std::string_view s);
NormKind parse_norm(std::string_view s);
InitScheme parse_init(std::string_view s);
Aggregator parse_aggregator(std::string_view s);

struct ModelConfig {
  LayerType layer_type = LayerType::Gcn;
  int num_layers = 2;
  int hidden_dim = 211;
  int embedding_dim = 90;
  double dropout = 0.2361;
  NormKind norm = NormKind::GraphNorm;
  InitScheme init = InitScheme::XavierHeadOnly;
  Aggregator sage_aggregator = Aggregator::Mean;
  int gat_heads = 1;
  int out_dim = 2;
  std::uint64_t seed = 42;

  // Tuned optima for each architecture (layers 2 everywhere; SAGE uses mean).
  static ModelConfig optimum(LayerType type);

  // Structural checks always; search-space ranges when `search_space` is set.
  // Throws ConfigOutOfRange.
  void validate(bool search_space = true) const;

  bool operator==(const ModelConfig&) const = default;
};

// Precomputed adjacency variants of one graph, shared by every layer.
struct GraphOperators {
  ad::SparseAdj gcn;         // with self-loops, 1/sqrt((deg_i+1)(deg_j+1))
  ad::SparseAdj self_loops;  // with self-loops, unit coefficients (GAT)
  ad::SparseAdj mean;        // no self-loops, 1/deg_i (SAGE mean)
  ad::SparseAdj plain;       // no self-loops, unit coefficients (SAGE max)

  static GraphOperators build(const TransactionGraph& graph);
};

std::vector<double> gcn_coefficients(const ad::SparseAdj& with_loops);
std::vector<double> mean_coefficients(const ad::SparseAdj& adj);

// --- parameter blocks -----------------------------------------------------

struct LinearParams {
  ad::Tensor weight;  // d_in x d_out
  ad::Tensor bias;    // 1 x d_out
};

struct GcnParams {
  ad::Tensor weight;
  ad::Tensor bias;
};

struct GatHead {
  ad::Tensor weight;   // d_in x d_out
  ad::Tensor att_src;  // d_out x 1, scores the aggregating node
  ad::Tensor att_dst;  // d_out x 1, scores the neighbor
};

struct GatParams {
  std::vector<GatHead> heads;
  ad::Tensor bias;  // 1 x (heads * d_out) when concatenating, else 1 x d_out
  bool concat = false;
};

struct SageParams {
  ad::Tensor w_self;
  ad::Tensor w_neigh;
  ad::Tensor bias;
};

struct GraphNormParams {
  ad::Tensor alpha;
  ad::Tensor gamma;
  ad::Tensor beta;
};

LinearParams make_linear(std::size_t d_in, std::size_t d_out);
GcnParams make_gcn(std::size_t d_in, std::size_t d_out);
GatParams make_gat(std::size_t d_in, std::size_t d_out, int heads, bool concat);
SageParams make_sage(std::size_t d_in, std::size_t d_out);
GraphNormParams make_graphnorm(std::size_t d);

// --- forward rules --------------------------------------------------------

ad::Tensor linear_forward(ad::Tape& tape, const LinearParams& p, const ad::Tensor& h);
ad::Tensor gcn_forward(ad::Tape& tape, const GcnParams& p, const ad::SparseAdj& gcn_adj,
                       const ad::Tensor& h);
ad::Tensor gat_forward(ad::Tape& tape, const GatParams& p, const ad::SparseAdj& with_loops,
                       const ad::Tensor& h, double negative_slope = 0.2);
// Attention weights of one head (E x 1 over `with_loops` slots).
ad::Tensor gat_attention(ad::Tape& tape, const GatHead& head, const ad::SparseAdj& with_loops,
                         const ad::Tensor& projected, double negative_slope = 0.2);
ad::Tensor sage_forward(ad::Tape& tape, const SageParams& p, const GraphOperators& ops,
                        const ad::Tensor& h, Aggregator aggregator);
ad::Tensor graphnorm_forward(ad::Tape& tape, const GraphNormParams& p, const ad::Tensor& h,
                             double eps = 1e-5);

// --- initialisation -------------------------------------------------------

// U(-a, a) with a = gain * sqrt(6 / (rows + cols)); rows is fan-in.
std::vector<double> xavier_uniform(std::size_t rows, std::size_t cols, double gain, Rng& rng);
// U(-a, a) with a = sqrt(6 / rows).
std::vector<double> kaiming_uniform(std::size_t rows, std::size_t cols, Rng& rng);
// U(-1/sqrt(rows), 1/sqrt(rows)).
std::vector<double> fan_in_uniform(std::size_t rows, std::size_t cols, Rng& rng);

void reset_default(GcnParams& p, Rng& rng);
void reset_default(GatParams& p, Rng& rng);
void reset_default(SageParams& p, Rng& rng);
void reset_default(GraphNormParams& p);
void reset_default(LinearParams& p, Rng& rng);
void reset_xavier(GcnParams& p, Rng& rng);
void reset_xavier(GatParams& p, Rng& rng);
void reset_xavier(SageParams& p, Rng& rng);
void reset_xavier(LinearParams& p, Rng& rng);

// --- model ----------------------------------------------------------------

struct NamedParam {
  std::string name;
  ad::Tensor tensor;
};

struct GnnBlock {
  std::optional<GcnParams> gcn;
  std::optional<GatParams> gat;
  std::optional<SageParams> sage;
  std::optional<GraphNormParams> norm;
};

// [GNN -> ReLU -> GraphNorm? -> dropout] x num_layers -> embedding -> head.
class Model {
 public:
  Model() = default;

  const ModelConfig& config() const { return config_; }
  std::size_t input_dim() const { return input_dim_; }
  const std::vector<GnnBlock>& blocks() const { return blocks_; }
  const LinearParams& embedding() const { return embedding_; }
  const LinearParams& head() const { return head_; }

  // Raw logits N x out_dim. `dropout_stream` seeds the per-layer masks and is
  // ignored when not training.
  ad::Tensor forward(ad::Tape& tape, const GraphOperators& ops, const ad::Tensor& features,
                     bool training, const Rng& dropout_stream) const;

  std::vector<NamedParam> named_parameters() const;
  std::vector<ad::Tensor> parameters() const;
  std::size_t parameter_count() const;

  // Independent copy of every parameter buffer.
  Model deep_copy() const;

  friend Model build_model(const ModelConfig& config, std::size_t input_dim, bool search_space);

 private:
  ModelConfig config_;
  std::size_t input_dim_ = 0;
  std::vector<GnnBlock> blocks_;
  LinearParams embedding_;
  LinearParams head_;
};

Model build_model(const ModelConfig& config, std::size_t input_dim, bool search_space = true);

// Versioned binary container: magic "AMLCKPT1", version byte, config, named
// parameter buffers, optional optimizer state. Round trips bit-exactly.
inline constexpr std::uint8_t kCheckpointVersion = 1;

struct Checkpoint {
  Model model;
  std::optional<AdamState> optimizer;
  std::int64_t epochs_completed = 0;
};

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const AdamState* optimizer = nullptr, std::int64_t epochs_completed = 0);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace amlgnn
