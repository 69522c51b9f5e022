#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amlgnn/model.hpp"

namespace amlgnn {

struct TransactionGraph;

// Parallel score/label arrays. `positive` is 1 for illicit nodes (graph label
// code 0) and 0 for licit ones; `score` is the predicted illicit probability.
struct ScoredSet {
  std::vector<double> score;
  std::vector<std::uint8_t> positive;
  std::vector<std::int64_t> node_id;  // optional, for score dumps

  std::size_t size() const { return score.size(); }
  std::size_t num_positive() const;
};

// Step-wise average precision; tied scores form a single cut point.
double auprc(const ScoredSet& scored);
// Mann-Whitney AUC with ties counted as one half.
double auc_roc(const ScoredSet& scored);

struct BootstrapStats {
  double mean_auprc = 0.0;
  double std_auprc = 0.0;
  double mean_auc = 0.0;
  double std_auc = 0.0;
  int n_rounds = 0;
  double frac = 0.0;
  std::uint64_t seed = 0;
};

inline constexpr int kBootstrapRetryCap = 1000;

// n_rounds draws of floor(frac * n) items without replacement; single-class
// draws are redrawn (up to kBootstrapRetryCap per round). Population std.
BootstrapStats bootstrap_eval(const ScoredSet& scored, int n_rounds, double frac,
                              std::uint64_t seed);

struct ThresholdMetrics {
  double percentile = 0.0;
  double threshold_value = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // actual positives in the set
  std::size_t flagged = 0;  // items with score >= threshold
  bool degenerate = false;  // a zero division occurred
};

// Linear interpolation between order statistics (position p/100 * (n-1)).
double percentile(std::span<const double> values, double p);

inline constexpr double kDefaultPercentileValues[] = {90.0, 99.0, 99.9};
inline constexpr std::span<const double> kDefaultPercentiles{kDefaultPercentileValues};

ThresholdMetrics metrics_at_threshold(const ScoredSet& scored, double threshold);

// Predict positive where score >= the p-th percentile of all scores.
std::vector<ThresholdMetrics> percentile_thresholds(
    const ScoredSet& scored, std::span<const double> percentiles = kDefaultPercentiles);

struct EvalOptions {
  int bootstrap_rounds = 100;
  double bootstrap_frac = 0.5;
  std::uint64_t seed = 42;
  std::vector<double> percentiles{90.0, 99.0, 99.9};
};

struct EvalReport {
  std::optional<double> auc;  // absent when the set has a single class
  double auprc = 0.0;
  std::size_t n = 0;
  std::size_t n_positive = 0;
  std::optional<BootstrapStats> bootstrap;
  std::string bootstrap_error;
  std::vector<ThresholdMetrics> thresholds;
  std::string split;
  std::string model_selection;
};

// Illicit-class probability per node from one eval-mode forward pass.
std::vector<double> illicit_probability(const Model& model, const GraphOperators& ops,
                                        const ad::Tensor& features);

ScoredSet scored_from_mask(const TransactionGraph& graph, std::span<const double> prob,
                           const std::vector<bool>& mask);

EvalReport evaluate_scores(const ScoredSet& scored, const EvalOptions& options = {});

EvalReport evaluate(const Model& model, const TransactionGraph& graph,
                    const std::vector<bool>& mask, const EvalOptions& options = {},
                    ScoredSet* scored_out = nullptr);

std::string report_to_json(const EvalReport& report);
std::string report_csv_header(const EvalReport& report);
std::string report_csv_row(const EvalReport& report);
void write_score_dump(const std::filesystem::path& path, const ScoredSet& scored);

}  // namespace amlgnn
