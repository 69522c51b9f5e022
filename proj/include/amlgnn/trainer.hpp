#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amlgnn/graph.hpp"
#include "amlgnn/model.hpp"
#include "amlgnn/optim.hpp"

namespace amlgnn {

enum class ClassWeightMode { InverseFrequency, Manual };

struct TrainConfig {
  double learning_rate = 8.475e-4;
  double weight_decay = 5e-4;
  int epochs = 497;
  std::uint64_t seed = 42;
  ClassWeightMode class_weight_mode = ClassWeightMode::InverseFrequency;
  std::array<double, 2> manual_weights{1.0, 1.0};  // (illicit, licit)
  int eval_every = 1;
  // Time-step partition; derived from the graph when absent.
  std::optional<std::array<int, 3>> split;
  // When false, wall_ms is written as 0 so logs are byte-reproducible.
  bool record_wall_time = true;

  static TrainConfig optimum(LayerType type);
  // Structural checks always; search-space ranges when `search_space` is set.
  void validate(bool search_space = true) const;
  bool operator==(const TrainConfig&) const = default;
};

// Train/validation masks only; the test mask never reaches training or search.
struct SupervisionMasks {
  std::vector<bool> train;
  std::vector<bool> val;

  static SupervisionMasks from(const TemporalSplit& split) {
    return {split.train_mask, split.val_mask};
  }
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  std::optional<double> val_auprc;
  std::optional<double> val_auc;
  double wall_ms = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> records;

  std::string to_csv() const;
};

// (w_illicit, w_licit). Inverse frequency: w_c = |mask| / (2 * count_c).
std::array<double, 2> class_weights(std::span<const std::uint8_t> labels,
                                    const std::vector<bool>& mask, ClassWeightMode mode,
                                    std::array<double, 2> manual = {1.0, 1.0});

// -(sum_i w_{y_i} log_softmax(logits_i)[y_i]) / sum_i w_{y_i} over the mask.
ad::Tensor weighted_ce_loss(ad::Tape& tape, const ad::Tensor& logits,
                            std::span<const std::uint8_t> labels, const std::vector<bool>& mask,
                            std::array<double, 2> weights);

// Resumable full-graph training run over one graph.
class Trainer {
 public:
  Trainer(const TransactionGraph& graph, SupervisionMasks masks, const ModelConfig& model_config,
          const TrainConfig& train_config, bool search_space = true);

  // Runs `epochs` more epochs.
  void run(int epochs);

  // Continues from a saved model + optimizer state.
  void restore(const Checkpoint& checkpoint);

  const Model& model() const { return model_; }
  // Best-validation-AUPRC snapshot; the current model when no validation
  // positives were ever scored.
  const Model& best_model() const { return best_val_auprc_ ? best_model_ : model_; }
  int epochs_completed() const { return epoch_; }
  int best_epoch() const { return best_epoch_; }
  std::optional<double> best_val_auprc() const { return best_val_auprc_; }
  const TrainLog& log() const { return log_; }
  const AdamState& optimizer() const { return adam_; }
  std::array<double, 2> weights() const { return weights_; }
  const GraphOperators& operators() const { return ops_; }
  const ad::Tensor& features() const { return features_; }

  // Training-mode loss of the current parameters at `epoch`'s dropout masks.
  double loss_at(int epoch) const;

 private:
  void evaluate_val(EpochRecord& record);

  const TransactionGraph& graph_;
  SupervisionMasks masks_;
  ModelConfig model_config_;
  TrainConfig train_config_;
  GraphOperators ops_;
  ad::Tensor features_;
  Model model_;
  Model best_model_;
  AdamState adam_;
  std::array<double, 2> weights_{};
  std::vector<ad::Tensor> params_;
  TrainLog log_;
  int epoch_ = 0;
  int best_epoch_ = 0;
  std::optional<double> best_val_auprc_;
};

struct TrainResult {
  Model final_model;
  Model best_model;
  int best_epoch = 0;
  std::optional<double> best_val_auprc;
  TrainLog log;
  AdamState optimizer;
};

TrainResult train(const TransactionGraph& graph, const TemporalSplit& split,
                  const ModelConfig& model_config, const TrainConfig& train_config,
                  bool search_space = true);

// Resolves the time-step partition of `config` against `graph`.
TemporalSplit split_for(const TransactionGraph& graph, const TrainConfig& config);

}  // namespace amlgnn
