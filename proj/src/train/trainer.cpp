#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "amlgnn/error.hpp"
#include "amlgnn/evaluator.hpp"
#include "amlgnn/trainer.hpp"

namespace amlgnn {

TrainConfig TrainConfig::optimum(LayerType type) {
  TrainConfig c;
  switch (type) {
    case LayerType::Gat:
      c.learning_rate = 6.999e-4;
      c.epochs = 508;
      break;
    case LayerType::Gcn:
      c.learning_rate = 8.475e-4;
      c.epochs = 497;
      break;
    case LayerType::Sage:
      c.learning_rate = 5.302e-4;
      c.epochs = 397;
      break;
  }
  return c;
}

void TrainConfig::validate(bool search_space) const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::ConfigOutOfRange, what); };
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be >= 0");
  if (!(weight_decay >= 0.0)) fail("weight_decay must be >= 0");
  if (epochs < 0) fail("epochs must be >= 0");
  if (eval_every < 1) fail("eval_every must be >= 1");
  if (class_weight_mode == ClassWeightMode::Manual &&
      !(manual_weights[0] > 0.0 && manual_weights[1] > 0.0)) {
    fail("manual class weights must be positive");
  }
  if (split) {
    for (int c : *split) {
      if (c < 1) throw Error(ErrorKind::BadPartition, "split counts must be >= 1");
    }
  }
  if (!search_space) return;
  if (learning_rate < 2e-6 || learning_rate > 1e-3) fail("learning_rate must be in [2e-6, 1e-3]");
  if (epochs < 128 || epochs > 512) fail("epochs must be in [128, 512]");
  if (weight_decay != 5e-4) fail("weight_decay is fixed at 5e-4");
}

std::string TrainLog::to_csv() const {
  std::ostringstream os;
  os << "epoch,train_loss,val_auprc,val_auc,wall_ms\n";
  os << std::setprecision(17);
  for (const auto& r : records) {
    os << r.epoch << ',' << r.train_loss << ',';
    if (r.val_auprc) os << *r.val_auprc;
    os << ',';
    if (r.val_auc) os << *r.val_auc;
    os << ',' << std::fixed << std::setprecision(3) << r.wall_ms << std::defaultfloat
       << std::setprecision(17) << '\n';
  }
  return os.str();
}

std::array<double, 2> class_weights(std::span<const std::uint8_t> labels,
                                    const std::vector<bool>& mask, ClassWeightMode mode,
                                    std::array<double, 2> manual) {
  if (mode == ClassWeightMode::Manual) return manual;
  std::array<std::size_t, 2> count{};
  std::size_t total = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    if (!is_labeled(labels[i])) throw Error(ErrorKind::UnlabeledInMask, "mask selects an unlabeled node");
    ++count[labels[i]];
    ++total;
  }
  if (total == 0) throw Error(ErrorKind::EmptyMask, "class weights need a non-empty mask");
  if (count[0] == 0 || count[1] == 0) {
    throw Error(ErrorKind::SingleClassMask, "inverse-frequency weights need both classes");
  }
  const double n = static_cast<double>(total);
  return {n / (2.0 * static_cast<double>(count[0])), n / (2.0 * static_cast<double>(count[1]))};
}

ad::Tensor weighted_ce_loss(ad::Tape& tape, const ad::Tensor& logits,
                            std::span<const std::uint8_t> labels, const std::vector<bool>& mask,
                            std::array<double, 2> weights) {
  if (logits.cols() != 2 || logits.rows() != labels.size() || mask.size() != labels.size()) {
    throw Error(ErrorKind::ShapeMismatch, "loss expects N x 2 logits with N labels and mask entries");
  }
  if (!(weights[0] > 0.0 && weights[1] > 0.0)) {
    throw Error(ErrorKind::ConfigOutOfRange, "class weights must be positive");
  }
  std::vector<std::int32_t> rows, cols;
  std::vector<double> coeff;
  double total = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    if (!is_labeled(labels[i])) throw Error(ErrorKind::UnlabeledInMask, "loss mask selects an unlabeled node");
    rows.push_back(static_cast<std::int32_t>(i));
    cols.push_back(labels[i]);
    coeff.push_back(weights[labels[i]]);
    total += weights[labels[i]];
  }
  if (rows.empty()) throw Error(ErrorKind::EmptyMask, "loss mask is empty");
  for (auto& c : coeff) c = -c / total;
  std::vector<std::int32_t> local(rows.size());
  for (std::size_t k = 0; k < local.size(); ++k) local[k] = static_cast<std::int32_t>(k);
  const auto logp = tape.log_softmax(tape.row_select(logits, rows));
  return tape.weighted_sum(tape.pick(logp, local, cols), coeff);
}

namespace {

constexpr std::uint64_t kDropoutStream = 0x44524F50;  // "DROP"

}  // namespace

Trainer::Trainer(const TransactionGraph& graph, SupervisionMasks masks,
                 const ModelConfig& model_config, const TrainConfig& train_config,
                 bool search_space)
    : graph_(graph),
      masks_(std::move(masks)),
      model_config_(model_config),
      train_config_(train_config) {
  train_config_.validate(search_space);
  if (masks_.train.size() != graph.num_nodes || masks_.val.size() != graph.num_nodes) {
    throw Error(ErrorKind::ShapeMismatch, "supervision masks do not cover the graph");
  }
  model_ = build_model(model_config_, graph.feat_dim, search_space);
  params_ = model_.parameters();
  adam_.init(params_);
  weights_ = class_weights(graph.labels, masks_.train, train_config_.class_weight_mode,
                           train_config_.manual_weights);
  ops_ = GraphOperators::build(graph);
  features_ = ad::Tensor::from(graph.num_nodes, graph.feat_dim, graph.features);
  best_model_ = model_.deep_copy();
}

void Trainer::restore(const Checkpoint& checkpoint) {
  if (!(checkpoint.model.config() == model_config_) ||
      checkpoint.model.input_dim() != model_.input_dim()) {
    throw Error(ErrorKind::ConfigOutOfRange, "checkpoint does not match the trainer's model");
  }
  auto src = checkpoint.model.parameters();
  for (std::size_t i = 0; i < src.size(); ++i) {
    std::copy(src[i].value().begin(), src[i].value().end(), params_[i].value().begin());
  }
  if (checkpoint.optimizer) adam_ = *checkpoint.optimizer;
  epoch_ = static_cast<int>(checkpoint.epochs_completed);
}

double Trainer::loss_at(int epoch) const {
  ad::Tape tape;
  const Rng stream = Rng(train_config_.seed).split(kDropoutStream).split(static_cast<std::uint64_t>(epoch));
  const auto logits = model_.forward(tape, ops_, features_, true, stream);
  return weighted_ce_loss(tape, logits, graph_.labels, masks_.train, weights_).item();
}

void Trainer::evaluate_val(EpochRecord& record) {
  bool any = false;
  for (bool b : masks_.val) any = any || b;
  if (!any) return;
  const auto prob = illicit_probability(model_, ops_, features_);
  const auto scored = scored_from_mask(graph_, prob, masks_.val);
  const auto pos = scored.num_positive();
  if (pos == 0) return;
  record.val_auprc = auprc(scored);
  if (pos < scored.size()) record.val_auc = auc_roc(scored);
  if (!best_val_auprc_ || *record.val_auprc > *best_val_auprc_) {
    best_val_auprc_ = record.val_auprc;
    best_epoch_ = record.epoch;
    best_model_ = model_.deep_copy();
  }
}

void Trainer::run(int epochs) {
  const Rng dropout_root = Rng(train_config_.seed).split(kDropoutStream);
  for (int e = 0; e < epochs; ++e) {
    const auto start = std::chrono::steady_clock::now();
    ++epoch_;
    ad::Tape tape;
    const auto logits = model_.forward(tape, ops_, features_, true,
                                       dropout_root.split(static_cast<std::uint64_t>(epoch_)));
    const auto loss = weighted_ce_loss(tape, logits, graph_.labels, masks_.train, weights_);
    if (!std::isfinite(loss.item())) {
      throw Error(ErrorKind::NonFinite, "training loss became non-finite at epoch " +
                                            std::to_string(epoch_));
    }
    for (auto& p : params_) p.zero_grad();
    tape.backward(loss);
    tape.clear();
    adam_step(params_, adam_, train_config_.learning_rate, train_config_.weight_decay);

    EpochRecord record;
    record.epoch = epoch_;
    record.train_loss = loss.item();
    if (epoch_ % train_config_.eval_every == 0 || e + 1 == epochs) evaluate_val(record);
    if (train_config_.record_wall_time) {
      record.wall_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();
    }
    log_.records.push_back(record);
  }
}

TemporalSplit split_for(const TransactionGraph& graph, const TrainConfig& config) {
  const auto parts = config.split ? *config.split : default_partition(graph.num_steps);
  return temporal_split(graph, parts[0], parts[1], parts[2]);
}

TrainResult train(const TransactionGraph& graph, const TemporalSplit& split,
                  const ModelConfig& model_config, const TrainConfig& train_config,
                  bool search_space) {
  Trainer trainer(graph, SupervisionMasks::from(split), model_config, train_config, search_space);
  trainer.run(train_config.epochs);
  return {trainer.model().deep_copy(), trainer.best_model().deep_copy(), trainer.best_epoch(),
          trainer.best_val_auprc(), trainer.log(), trainer.optimizer()};
}

}  // namespace amlgnn
