#include <algorithm>
#include <cmath>

#include "amlgnn/error.hpp"
#include "amlgnn/model.hpp"

namespace amlgnn {

std::string_view to_string(LayerType v) {
  switch (v) {
    case LayerType::Gcn: return "gcn";
    case LayerType::Gat: return "gat";
    case LayerType::Sage: return "sage";
  }
  return "?";
}

std::string_view to_string(NormKind v) { return v == NormKind::None ? "none" : "graphnorm"; }

std::string_view to_string(InitScheme v) {
  switch (v) {
    case InitScheme::Default: return "default";
    case InitScheme::Xavier: return "xavier";
    case InitScheme::XavierHeadOnly: return "xavier_head_only";
  }
  return "?";
}

std::string_view to_string(Aggregator v) { return v == Aggregator::Mean ? "mean" : "max"; }

LayerType parse_layer_type(std::string_view s) {
  if (s == "gcn") return LayerType::Gcn;
  if (s == "gat") return LayerType::Gat;
  if (s == "sage" || s == "graphsage") return LayerType::Sage;
  throw Error(ErrorKind::ConfigOutOfRange, "unknown layer_type '" + std::string(s) + "'");
}

NormKind parse_norm(std::string_view s) {
  if (s == "none") return NormKind::None;
  if (s == "graphnorm") return NormKind::GraphNorm;
  throw Error(ErrorKind::ConfigOutOfRange, "unknown norm '" + std::string(s) + "'");
}

InitScheme parse_init(std::string_view s) {
  if (s == "default") return InitScheme::Default;
  if (s == "xavier") return InitScheme::Xavier;
  if (s == "xavier_head_only") return InitScheme::XavierHeadOnly;
  throw Error(ErrorKind::ConfigOutOfRange, "unknown init '" + std::string(s) + "'");
}

Aggregator parse_aggregator(std::string_view s) {
  if (s == "mean") return Aggregator::Mean;
  if (s == "max") return Aggregator::Max;
  throw Error(ErrorKind::UnknownAggregator, "aggregator must be mean or max, got '" +
                                                std::string(s) + "'");
}

ModelConfig ModelConfig::optimum(LayerType type) {
  ModelConfig c;
  c.layer_type = type;
  c.num_layers = 2;
  switch (type) {
    case LayerType::Gat:
      c.hidden_dim = 148;
      c.embedding_dim = 89;
      c.dropout = 0.2522;
      break;
    case LayerType::Gcn:
      c.hidden_dim = 211;
      c.embedding_dim = 90;
      c.dropout = 0.2361;
      break;
    case LayerType::Sage:
      c.hidden_dim = 140;
      c.embedding_dim = 103;
      c.dropout = 0.1135;
      c.sage_aggregator = Aggregator::Mean;
      break;
  }
  return c;
}

void ModelConfig::validate(bool search_space) const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::ConfigOutOfRange, what); };
  if (num_layers < 1) fail("num_layers must be >= 1");
  if (hidden_dim < 1 || embedding_dim < 1) fail("dimensions must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must lie in [0, 1)");
  if (gat_heads < 1) fail("gat_heads must be >= 1");
  if (out_dim != 2) fail("out_dim is fixed at 2");
  if (!search_space) return;
  if (num_layers > 3) fail("num_layers must be in {1,2,3}");
  if (hidden_dim < 128 || hidden_dim > 256) fail("hidden_dim must be in [128, 256]");
  if (embedding_dim < 64 || embedding_dim > 128) fail("embedding_dim must be in [64, 128]");
  // Tolerate decimal round-off at the published bounds.
  if (dropout < 0.08 - 1e-12 || dropout > 0.64 + 1e-12) fail("dropout must be in [0.08, 0.64]");
}

Model build_model(const ModelConfig& config, std::size_t input_dim, bool search_space) {
  config.validate(search_space);
  if (input_dim == 0) throw Error(ErrorKind::ConfigOutOfRange, "input dimension must be positive");
  Model model;
  model.config_ = config;
  model.input_dim_ = input_dim;

  Rng root = Rng(config.seed).split(0x494E4954);  // "INIT"
  std::uint64_t stream = 0;
  auto next_rng = [&] { return root.split(stream++); };

  const auto hidden = static_cast<std::size_t>(config.hidden_dim);
  std::size_t d_in = input_dim;
  const bool gnn_xavier = config.init == InitScheme::Xavier;
  for (int l = 0; l < config.num_layers; ++l) {
    const bool last = l + 1 == config.num_layers;
    GnnBlock block;
    Rng rng = next_rng();
    switch (config.layer_type) {
      case LayerType::Gcn:
        block.gcn = make_gcn(d_in, hidden);
        gnn_xavier ? reset_xavier(*block.gcn, rng) : reset_default(*block.gcn, rng);
        d_in = hidden;
        break;
      case LayerType::Gat:
        block.gat = make_gat(d_in, hidden, config.gat_heads, !last);
        gnn_xavier ? reset_xavier(*block.gat, rng) : reset_default(*block.gat, rng);
        d_in = block.gat->bias.cols();
        break;
      case LayerType::Sage:
        block.sage = make_sage(d_in, hidden);
        gnn_xavier ? reset_xavier(*block.sage, rng) : reset_default(*block.sage, rng);
        d_in = hidden;
        break;
    }
    if (config.norm == NormKind::GraphNorm) block.norm = make_graphnorm(d_in);
    model.blocks_.push_back(std::move(block));
  }

  const auto embed = static_cast<std::size_t>(config.embedding_dim);
  model.embedding_ = make_linear(d_in, embed);
  model.head_ = make_linear(embed, static_cast<std::size_t>(config.out_dim));
  Rng embed_rng = next_rng();
  Rng head_rng = next_rng();
  if (config.init == InitScheme::Default) {
    reset_default(model.embedding_, embed_rng);
    reset_default(model.head_, head_rng);
  } else {
    reset_xavier(model.embedding_, embed_rng);
    reset_xavier(model.head_, head_rng);
  }
  return model;
}

ad::Tensor Model::forward(ad::Tape& tape, const GraphOperators& ops, const ad::Tensor& features,
                          bool training, const Rng& dropout_stream) const {
  if (features.cols() != input_dim_) {
    throw Error(ErrorKind::ShapeMismatch, "model expects " + std::to_string(input_dim_) +
                                              " input features, got " +
                                              std::to_string(features.cols()));
  }
  ad::Tensor h = features;
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const auto& b = blocks_[l];
    if (b.gcn) {
      h = gcn_forward(tape, *b.gcn, ops.gcn, h);
    } else if (b.gat) {
      h = gat_forward(tape, *b.gat, ops.self_loops, h);
    } else {
      h = sage_forward(tape, *b.sage, ops, h, config_.sage_aggregator);
    }
    h = tape.relu(h);
    if (b.norm) h = graphnorm_forward(tape, *b.norm, h);
    h = tape.dropout(h, config_.dropout, dropout_stream.split(l), training);
  }
  h = linear_forward(tape, embedding_, h);
  return linear_forward(tape, head_, h);
}

std::vector<NamedParam> Model::named_parameters() const {
  std::vector<NamedParam> out;
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const auto& b = blocks_[l];
    const std::string prefix = "gnn." + std::to_string(l) + ".";
    if (b.gcn) {
      out.push_back({prefix + "weight", b.gcn->weight});
      out.push_back({prefix + "bias", b.gcn->bias});
    } else if (b.gat) {
      for (std::size_t h = 0; h < b.gat->heads.size(); ++h) {
        const std::string hp = prefix + "head" + std::to_string(h) + ".";
        out.push_back({hp + "weight", b.gat->heads[h].weight});
        out.push_back({hp + "att_src", b.gat->heads[h].att_src});
        out.push_back({hp + "att_dst", b.gat->heads[h].att_dst});
      }
      out.push_back({prefix + "bias", b.gat->bias});
    } else if (b.sage) {
      out.push_back({prefix + "w_self", b.sage->w_self});
      out.push_back({prefix + "w_neigh", b.sage->w_neigh});
      out.push_back({prefix + "bias", b.sage->bias});
    }
    if (b.norm) {
      const std::string np = "norm." + std::to_string(l) + ".";
      out.push_back({np + "alpha", b.norm->alpha});
      out.push_back({np + "gamma", b.norm->gamma});
      out.push_back({np + "beta", b.norm->beta});
    }
  }
  out.push_back({"embedding.weight", embedding_.weight});
  out.push_back({"embedding.bias", embedding_.bias});
  out.push_back({"head.weight", head_.weight});
  out.push_back({"head.bias", head_.bias});
  return out;
}

std::vector<ad::Tensor> Model::parameters() const {
  std::vector<ad::Tensor> out;
  for (auto& np : named_parameters()) out.push_back(np.tensor);
  return out;
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.size();
  return n;
}

Model Model::deep_copy() const {
  // Same structure from the same config, then copy every buffer across.
  Model copy = build_model(config_, input_dim_, false);
  auto dst = copy.parameters();
  auto src = parameters();
  for (std::size_t i = 0; i < src.size(); ++i) {
    std::copy(src[i].value().begin(), src[i].value().end(), dst[i].value().begin());
  }
  return copy;
}

}  // namespace amlgnn
