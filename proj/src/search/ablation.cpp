#include <cmath>
#include <iomanip>
#include <algorithm>
#include <sstream>

#include "amlgnn/error.hpp"
#include "amlgnn/search.hpp"

namespace amlgnn {

namespace {

constexpr LayerType kArchOrder[] = {LayerType::Gcn, LayerType::Gat, LayerType::Sage};
constexpr Arm kArmOrder[] = {Arm::Baseline, Arm::Xavier, Arm::GraphNormXavier};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  for (double x : xs) m.std += (x - m.mean) * (x - m.mean);
  m.std = std::sqrt(m.std / static_cast<double>(xs.size()));
  return m;
}

}  // namespace

std::string_view to_string(Arm arm) {
  switch (arm) {
    case Arm::Baseline: return "baseline";
    case Arm::Xavier: return "xavier";
    case Arm::GraphNormXavier: return "graphnorm_xavier";
  }
  return "?";
}

Arm parse_arm(std::string_view s) {
  if (s == "baseline") return Arm::Baseline;
  if (s == "xavier") return Arm::Xavier;
  if (s == "graphnorm_xavier") return Arm::GraphNormXavier;
  throw Error(ErrorKind::ConfigOutOfRange, "unknown arm '" + std::string(s) + "'");
}

void apply_arm(Arm arm, ModelConfig& config) {
  switch (arm) {
    case Arm::Baseline:
      config.init = InitScheme::Default;
      config.norm = NormKind::None;
      break;
    case Arm::Xavier:
      config.init = InitScheme::Xavier;
      config.norm = NormKind::None;
      break;
    case Arm::GraphNormXavier:
      config.init = InitScheme::Xavier;
      config.norm = NormKind::GraphNorm;
      break;
  }
}

AblationGrid AblationGrid::standard() { return from_json(Json::object()); }

AblationGrid AblationGrid::from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigOutOfRange, "grid document must be an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "architectures" && key != "arms" && key != "model_overrides" &&
        key != "train_overrides" && key != "eval") {
      throw Error(ErrorKind::ConfigOutOfRange, "unknown grid key '" + key + "'");
    }
  }
  std::vector<LayerType> archs(std::begin(kArchOrder), std::end(kArchOrder));
  std::vector<Arm> arms(std::begin(kArmOrder), std::end(kArmOrder));
  if (j.contains("architectures")) {
    archs.clear();
    for (const auto& a : j.at("architectures")) archs.push_back(parse_layer_type(a.get<std::string>()));
  }
  if (j.contains("arms")) {
    arms.clear();
    for (const auto& a : j.at("arms")) arms.push_back(parse_arm(a.get<std::string>()));
  }
  AblationGrid grid;
  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    grid.eval.bootstrap_rounds = e.value("bootstrap_rounds", grid.eval.bootstrap_rounds);
    grid.eval.bootstrap_frac = e.value("bootstrap_frac", grid.eval.bootstrap_frac);
    grid.eval.seed = e.value("seed", grid.eval.seed);
    if (e.contains("percentiles")) grid.eval.percentiles = e.at("percentiles").get<std::vector<double>>();
  }
  for (auto arch : archs) {
    for (auto arm : arms) {
      AblationCell cell;
      cell.arch = arch;
      cell.arm = arm;
      cell.model = ModelConfig::optimum(arch);
      cell.train = TrainConfig::optimum(arch);
      for (const char* scope : {"all", ""}) {
        const std::string name = *scope ? scope : std::string(to_string(arch));
        if (j.contains("model_overrides") && j.at("model_overrides").contains(name)) {
          cell.model = model_config_from_json(j.at("model_overrides").at(name), cell.model);
        }
        if (j.contains("train_overrides") && j.at("train_overrides").contains(name)) {
          cell.train = train_config_from_json(j.at("train_overrides").at(name), cell.train);
        }
      }
      cell.model.layer_type = arch;
      apply_arm(arm, cell.model);
      grid.cells.push_back(cell);
    }
  }
  return grid;
}

Json AblationGrid::to_json() const {
  Json j;
  j["cells"] = Json::array();
  for (const auto& c : cells) {
    j["cells"].push_back({{"architecture", amlgnn::to_string(c.arch)},
                          {"arm", amlgnn::to_string(c.arm)},
                          {"model", amlgnn::to_json(c.model)},
                          {"train", amlgnn::to_json(c.train)}});
  }
  j["eval"] = {{"bootstrap_rounds", eval.bootstrap_rounds},
               {"bootstrap_frac", eval.bootstrap_frac},
               {"seed", eval.seed},
               {"percentiles", eval.percentiles}};
  return j;
}

void AblationGrid::validate(bool search_space) const {
  if (cells.empty()) throw Error(ErrorKind::ConfigOutOfRange, "ablation grid has no cells");
  for (const auto& c : cells) {
    c.model.validate(search_space);
    c.train.validate(search_space);
  }
}

AblationResult run_ablation(const TransactionGraph& graph, const TemporalSplit& split,
                            const AblationGrid& grid, std::span<const std::uint64_t> seeds,
                            int workers, bool search_space) {
  if (seeds.empty()) throw Error(ErrorKind::ConfigOutOfRange, "ablation needs at least one seed");
  grid.validate(search_space);
  AblationResult result;
  result.runs.resize(grid.cells.size() * seeds.size());
  parallel_for(result.runs.size(), workers, [&](std::size_t k) {
    const auto& cell = grid.cells[k / seeds.size()];
    auto& run = result.runs[k];
    run.arch = cell.arch;
    run.arm = cell.arm;
    run.seed = seeds[k % seeds.size()];
    try {
      ModelConfig mc = cell.model;
      TrainConfig tc = cell.train;
      mc.seed = run.seed;
      tc.seed = run.seed;
      const auto trained = train(graph, split, mc, tc, search_space);
      run.val_auprc = trained.best_val_auprc;
      run.best_epoch = trained.best_epoch;
      run.report = evaluate(trained.best_model, graph, split.test_mask, grid.eval);
      run.report.split = "test";
      run.report.model_selection = trained.best_val_auprc ? "best_val" : "final";
      run.ok = true;
    } catch (const std::exception& e) {
      run.ok = false;
      run.error = e.what();
    }
  });
  return result;
}

std::string AblationResult::table_csv() const {
  std::ostringstream os;
  os << "architecture";
  for (auto arm : kArmOrder) os << ',' << to_string(arm) << "_auc," << to_string(arm) << "_auprc";
  os << '\n';
  for (auto arch : kArchOrder) {
    bool present = false;
    for (const auto& r : runs) present = present || r.arch == arch;
    if (!present) continue;
    os << to_string(arch);
    for (auto arm : kArmOrder) {
      std::vector<double> aucs, aps;
      for (const auto& r : runs) {
        if (r.arch != arch || r.arm != arm || !r.ok) continue;
        if (r.report.auc) aucs.push_back(*r.report.auc);
        aps.push_back(r.report.auprc);
      }
      os << ',' << (aucs.empty() ? "" : fmt(mean_std(aucs).mean)) << ','
         << (aps.empty() ? "" : fmt(mean_std(aps).mean));
    }
    os << '\n';
  }
  return os.str();
}

std::string AblationResult::summary_csv() const {
  std::ostringstream os;
  os << "architecture,arm,n_seeds,n_failed,mean_auc,std_auc,mean_auprc,std_auprc\n";
  for (auto arch : kArchOrder) {
    for (auto arm : kArmOrder) {
      std::vector<double> aucs, aps;
      int n = 0, failed = 0;
      for (const auto& r : runs) {
        if (r.arch != arch || r.arm != arm) continue;
        ++n;
        if (!r.ok) {
          ++failed;
          continue;
        }
        if (r.report.auc) aucs.push_back(*r.report.auc);
        aps.push_back(r.report.auprc);
      }
      if (n == 0) continue;
      os << to_string(arch) << ',' << to_string(arm) << ',' << n << ',' << failed << ',';
      if (!aucs.empty()) {
        const auto m = mean_std(aucs);
        os << fmt(m.mean) << ',' << fmt(m.std);
      } else {
        os << ',';
      }
      os << ',';
      if (!aps.empty()) {
        const auto m = mean_std(aps);
        os << fmt(m.mean) << ',' << fmt(m.std);
      } else {
        os << ',';
      }
      os << '\n';
    }
  }
  return os.str();
}

std::string AblationResult::runs_csv() const {
  std::ostringstream os;
  os << "architecture,arm,seed,status,val_auprc,best_epoch,test_auc,test_auprc,"
        "boot_mean_auc,boot_std_auc,boot_mean_auprc,boot_std_auprc,error\n";
  for (const auto& r : runs) {
    os << to_string(r.arch) << ',' << to_string(r.arm) << ',' << r.seed << ','
       << (r.ok ? "ok" : "failed") << ',' << (r.val_auprc ? fmt(*r.val_auprc) : "") << ','
       << r.best_epoch << ',';
    if (r.ok) {
      os << (r.report.auc ? fmt(*r.report.auc) : "") << ',' << fmt(r.report.auprc) << ',';
      if (r.report.bootstrap) {
        const auto& b = *r.report.bootstrap;
        os << fmt(b.mean_auc) << ',' << fmt(b.std_auc) << ',' << fmt(b.mean_auprc) << ','
           << fmt(b.std_auprc);
      } else {
        os << ",,,";
      }
    } else {
      os << ",,,,,";
    }
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    os << ',' << err << '\n';
  }
  return os.str();
}

}  // namespace amlgnn
