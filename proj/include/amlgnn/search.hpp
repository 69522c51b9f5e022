#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amlgnn/config.hpp"
#include "amlgnn/evaluator.hpp"
#include "amlgnn/model.hpp"
#include "amlgnn/trainer.hpp"

namespace amlgnn {

// Runs fn(0..n-1) on up to `workers` threads; the first exception (lowest
// index) is rethrown after all tasks finish.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

// --- ablation grid --------------------------------------------------------

enum class Arm { Baseline, Xavier, GraphNormXavier };

std::string_view to_string(Arm arm);
Arm parse_arm(std::string_view s);
// (init, norm) of an arm: baseline = default/none, xavier = xavier/none,
// graphnorm_xavier = xavier/graphnorm.
void apply_arm(Arm arm, ModelConfig& config);

struct AblationCell {
  LayerType arch = LayerType::Gcn;
  Arm arm = Arm::Baseline;
  ModelConfig model;
  TrainConfig train;
};

struct AblationGrid {
  std::vector<AblationCell> cells;
  EvalOptions eval;

  // 3 architectures x 3 arms at the tuned optima.
  static AblationGrid standard();
  // Keys: architectures, arms, model_overrides, train_overrides (objects
  // keyed by architecture name or "all"), eval.
  static AblationGrid from_json(const Json& j);
  Json to_json() const;
  void validate(bool search_space = true) const;
};

struct AblationRun {
  LayerType arch = LayerType::Gcn;
  Arm arm = Arm::Baseline;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::optional<double> val_auprc;
  int best_epoch = 0;
  EvalReport report;  // test split, best-validation snapshot
};

struct AblationResult {
  std::vector<AblationRun> runs;  // cell-major, then seed

  // Rows = architectures, column pairs = AUC/AUPRC per arm (means over seeds).
  std::string table_csv() const;
  // One row per cell: seed count, mean and population std of AUC and AUPRC.
  std::string summary_csv() const;
  std::string runs_csv() const;
};

AblationResult run_ablation(const TransactionGraph& graph, const TemporalSplit& split,
                            const AblationGrid& grid, std::span<const std::uint64_t> seeds,
                            int workers = 1, bool search_space = true);

// --- hyperparameter search ------------------------------------------------

enum class ParamKind { LogUniform, LinearInt, Categorical };

struct ParamSpec {
  std::string name;
  ParamKind kind = ParamKind::LinearInt;
  double low = 0.0;
  double high = 0.0;
  std::vector<Json> choices;  // categorical only
};

struct SearchSpace {
  LayerType layer_type = LayerType::Sage;
  std::vector<ParamSpec> params;
  ModelConfig base_model;
  TrainConfig base_train;

  static SearchSpace table1(LayerType type);
  // {"layer_type": ..., "params": [{"name", "kind", "low", "high" | "choices"}],
  //  "model": {...}, "train": {...}}; absent params default to the full table.
  static SearchSpace from_json(const Json& j);
  Json to_json() const;
  void validate() const;
};

struct SampledConfig {
  ModelConfig model;
  TrainConfig train;
};

// Draws every parameter in declaration order from `rng`.
SampledConfig sample_config(const SearchSpace& space, Rng& rng);

struct Trial {
  int id = 0;
  ModelConfig model;
  TrainConfig train;
  double objective = -std::numeric_limits<double>::infinity();  // validation AUPRC
  bool ok = false;
  std::string error;
  double wall_ms = 0.0;
  int rung = 0;  // last rung reached (successive halving)
  int epochs_trained = 0;
};

std::vector<Trial> random_search(const TransactionGraph& graph, const SupervisionMasks& masks,
                                 const SearchSpace& space, int n_trials, std::uint64_t seed,
                                 int workers = 1);

struct HalvingSchedule {
  int n_initial = 8;
  double keep_frac = 0.5;
  std::vector<int> budgets{128, 256, 512};  // cumulative epochs per rung
  void validate() const;
};

// Survivor count after a rung: ceil(keep_frac * n), at least 1.
int survivors_after(int n, double keep_frac);

std::vector<Trial> successive_halving(const TransactionGraph& graph, const SupervisionMasks& masks,
                                      const SearchSpace& space, const HalvingSchedule& schedule,
                                      std::uint64_t seed, int workers = 1,
                                      const std::optional<std::filesystem::path>& checkpoint_dir = {});

std::string trials_csv(const std::vector<Trial>& trials);

}  // namespace amlgnn
