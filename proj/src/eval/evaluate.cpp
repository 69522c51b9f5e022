#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "amlgnn/error.hpp"
#include "amlgnn/evaluator.hpp"
#include "amlgnn/graph.hpp"

namespace amlgnn {

std::vector<double> illicit_probability(const Model& model, const GraphOperators& ops,
                                        const ad::Tensor& features) {
  ad::Tape tape;
  const ad::Tensor logits = model.forward(tape, ops, features, false, Rng(0));
  std::vector<double> prob(logits.rows());
  for (std::size_t i = 0; i < prob.size(); ++i) {
    // Two-class softmax of the illicit logit (column 0).
    prob[i] = 1.0 / (1.0 + std::exp(logits.at(i, 1) - logits.at(i, 0)));
  }
  return prob;
}

ScoredSet scored_from_mask(const TransactionGraph& graph, std::span<const double> prob,
                           const std::vector<bool>& mask) {
  if (mask.size() != graph.num_nodes || prob.size() != graph.num_nodes) {
    throw Error(ErrorKind::ShapeMismatch, "mask/probabilities do not cover the graph");
  }
  ScoredSet s;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    if (!is_labeled(graph.labels[i])) {
      throw Error(ErrorKind::UnlabeledInMask, "evaluation mask selects an unlabeled node");
    }
    s.score.push_back(prob[i]);
    s.positive.push_back(graph.labels[i] == static_cast<std::uint8_t>(Label::Illicit) ? 1 : 0);
    s.node_id.push_back(graph.original_ids[i]);
  }
  if (s.score.empty()) throw Error(ErrorKind::EmptyMask, "evaluation mask is empty");
  return s;
}

EvalReport evaluate_scores(const ScoredSet& scored, const EvalOptions& options) {
  EvalReport r;
  r.n = scored.size();
  r.n_positive = scored.num_positive();
  r.auprc = auprc(scored);
  if (r.n_positive > 0 && r.n_positive < r.n) r.auc = auc_roc(scored);
  if (options.bootstrap_rounds > 0) {
    try {
      r.bootstrap = bootstrap_eval(scored, options.bootstrap_rounds, options.bootstrap_frac,
                                   options.seed);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateSet) throw;
      r.bootstrap_error = e.what();
    }
  }
  r.thresholds = percentile_thresholds(scored, options.percentiles);
  return r;
}

EvalReport evaluate(const Model& model, const TransactionGraph& graph,
                    const std::vector<bool>& mask, const EvalOptions& options,
                    ScoredSet* scored_out) {
  const auto ops = GraphOperators::build(graph);
  const auto features = ad::Tensor::from(graph.num_nodes, graph.feat_dim, graph.features);
  const auto prob = illicit_probability(model, ops, features);
  auto scored = scored_from_mask(graph, prob, mask);
  auto report = evaluate_scores(scored, options);
  if (scored_out) *scored_out = std::move(scored);
  return report;
}

std::string report_to_json(const EvalReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["split"] = r.split;
  j["model_selection"] = r.model_selection;
  j["n"] = r.n;
  j["n_positive"] = r.n_positive;
  j["auc"] = r.auc ? ordered_json(*r.auc) : ordered_json(nullptr);
  j["auprc"] = r.auprc;
  if (r.bootstrap) {
    const auto& b = *r.bootstrap;
    j["bootstrap"] = {{"mean_auprc", b.mean_auprc}, {"std_auprc", b.std_auprc},
                      {"mean_auc", b.mean_auc},     {"std_auc", b.std_auc},
                      {"n_rounds", b.n_rounds},     {"frac", b.frac},
                      {"seed", b.seed}};
  } else {
    j["bootstrap"] = nullptr;
    if (!r.bootstrap_error.empty()) j["bootstrap_error"] = r.bootstrap_error;
  }
  j["thresholds"] = ordered_json::array();
  for (const auto& t : r.thresholds) {
    j["thresholds"].push_back({{"percentile", t.percentile},
                               {"threshold_value", t.threshold_value},
                               {"precision", t.precision},
                               {"recall", t.recall},
                               {"f1", t.f1},
                               {"support", t.support},
                               {"flagged", t.flagged},
                               {"degenerate", t.degenerate}});
  }
  return j.dump(2) + "\n";
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string percentile_tag(double p) {
  std::string s = fmt(p);
  std::erase(s, '.');
  return "p" + s;
}

}  // namespace

std::string report_csv_header(const EvalReport& r) {
  std::string h = "split,model_selection,n,n_positive,auc,auprc,mean_auc,std_auc,mean_auprc,std_auprc";
  for (const auto& t : r.thresholds) {
    const auto tag = percentile_tag(t.percentile);
    h += "," + tag + "_threshold," + tag + "_precision," + tag + "_recall," + tag + "_f1";
  }
  return h;
}

std::string report_csv_row(const EvalReport& r) {
  std::string row = r.split + "," + r.model_selection + "," + std::to_string(r.n) + "," +
                    std::to_string(r.n_positive) + "," + (r.auc ? fmt(*r.auc) : "") + "," +
                    fmt(r.auprc);
  if (r.bootstrap) {
    row += "," + fmt(r.bootstrap->mean_auc) + "," + fmt(r.bootstrap->std_auc) + "," +
           fmt(r.bootstrap->mean_auprc) + "," + fmt(r.bootstrap->std_auprc);
  } else {
    row += ",,,,";
  }
  for (const auto& t : r.thresholds) {
    row += "," + fmt(t.threshold_value) + "," + fmt(t.precision) + "," + fmt(t.recall) + "," +
           fmt(t.f1);
  }
  return row;
}

void write_score_dump(const std::filesystem::path& path, const ScoredSet& scored) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::BadCache, "cannot write " + path.string());
  out << "node_id,score,label\n";
  for (std::size_t i = 0; i < scored.size(); ++i) {
    out << (i < scored.node_id.size() ? scored.node_id[i] : static_cast<std::int64_t>(i)) << ','
        << fmt(scored.score[i]) << ',' << static_cast<int>(scored.positive[i]) << '\n';
  }
}

}  // namespace amlgnn
