// amlgnn: command-line entry point.
//
// Exit codes: 0 success, 2 usage/configuration error, 3 data error,
// 4 numeric failure. Failures print one JSON object on stderr:
//   {"error": {"category": "...", "kind": "...", "message": "..."}}

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "amlgnn/config.hpp"
#include "amlgnn/error.hpp"
#include "amlgnn/evaluator.hpp"
#include "amlgnn/graph.hpp"
#include "amlgnn/model.hpp"
#include "amlgnn/search.hpp"
#include "amlgnn/trainer.hpp"
#include "amlgnn/version.hpp"

namespace fs = std::filesystem;
using namespace amlgnn;

namespace {

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::BadCache, "cannot open '" + path.string() + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  }
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorKind::BadCache, "cannot write '" + path.string() + "'");
}

std::vector<int> parse_int_list(const std::string& s, const char* what) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::ConfigOutOfRange, std::string("bad ") + what + " list '" + s + "'");
    }
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw Error(ErrorKind::ConfigOutOfRange, "bad number list '" + s + "'");
    }
  }
  return out;
}

std::optional<std::array<int, 3>> parse_partition(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const auto v = parse_int_list(s, "partition");
  if (v.size() != 3) throw Error(ErrorKind::BadPartition, "partition needs three step counts");
  return std::array<int, 3>{v[0], v[1], v[2]};
}

// Manifest shared by every subcommand. Written before any heavy work.
struct Manifest {
  Json j;

  Manifest(const std::string& subcommand, const std::vector<std::string>& argv) {
    j["tool"] = kToolName;
    j["version"] = kVersion;
    j["command"] = subcommand;
    j["argv"] = argv;
    j["inputs"] = Json::object();
    j["artifacts"] = Json::object();
  }
  void input(const std::string& role, const fs::path& path) {
    j["inputs"][role] = {{"path", path.string()}, {"sha256", sha256_file(path)}};
  }
  void artifact(const std::string& role, const fs::path& path) {
    j["artifacts"][role] = path.string();
  }
  void write(const fs::path& path) const { write_text(path, j.dump(2) + "\n"); }
};

std::vector<std::string> g_argv;


TransactionGraph load_input_graph(const std::string& path) { return load_graph(path); }

Json split_json(const TemporalSplit& s) {
  return {{"train_steps", {s.train_steps.first, s.train_steps.last}},
          {"val_steps", {s.val_steps.first, s.val_steps.last}},
          {"test_steps", {s.test_steps.first, s.test_steps.last}}};
}

bool parse_on_off(const std::string& v) { return v == "on"; }

// --- ingest ---------------------------------------------------------------

struct IngestOpts {
  std::string features, classes, edges, out;
};

int run_ingest(const IngestOpts& o) {
  Manifest m("ingest", g_argv);
  m.input("features", o.features);
  m.input("classes", o.classes);
  m.input("edges", o.edges);
  m.artifact("graph", o.out);
  m.write(o.out + ".manifest.json");
  std::vector<std::string> warnings;
  const auto graph = load_elliptic(o.features, o.classes, o.edges, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  save_graph(graph, o.out);
  std::cout << "wrote " << o.out << " (" << graph.num_nodes << " nodes, " << graph.num_steps
            << " steps)\n";
  return 0;
}

// --- synth ----------------------------------------------------------------

struct SynthOpts {
  SynthParams p;
  std::string out;
};

int run_synth(const SynthOpts& o) {
  Manifest m("synth", g_argv);
  m.j["config"] = {{"seed", o.p.seed},
                   {"nodes", o.p.n_nodes},
                   {"steps", o.p.n_steps},
                   {"illicit", o.p.illicit_frac},
                   {"unknown", o.p.unknown_frac},
                   {"dim", o.p.feat_dim},
                   {"homophily", o.p.homophily},
                   {"mean_degree", o.p.mean_degree},
                   {"class_separation", o.p.class_separation}};
  m.j["seed"] = o.p.seed;
  m.artifact("graph", o.out);
  m.write(o.out + ".manifest.json");
  const auto graph = synth_graph(o.p);
  save_graph(graph, o.out);
  std::cout << "wrote " << o.out << " (" << graph.num_nodes << " nodes, " << graph.num_steps
            << " steps)\n";
  return 0;
}

// --- train ----------------------------------------------------------------

struct TrainOpts {
  std::string graph, config, train_config, out_dir, arch, partition, resume, timing = "on";
  int epochs = 0;
  int checkpoint_every = 0;
  bool allow_out_of_range = false;
};

int run_train(const TrainOpts& o) {
  const bool search_space = !o.allow_out_of_range;
  Json model_json = o.config.empty() ? Json::object() : read_json_file(o.config);
  LayerType arch = LayerType::Sage;
  if (!o.arch.empty()) {
    arch = parse_layer_type(o.arch);
  } else if (model_json.contains("layer_type")) {
    arch = parse_layer_type(model_json.at("layer_type").get<std::string>());
  }
  ModelConfig mc = model_config_from_json(model_json, ModelConfig::optimum(arch));
  mc.layer_type = arch;
  TrainConfig tc = TrainConfig::optimum(arch);
  if (!o.train_config.empty()) tc = train_config_from_json(read_json_file(o.train_config), tc);
  if (o.epochs > 0) tc.epochs = o.epochs;
  if (auto p = parse_partition(o.partition)) tc.split = p;
  tc.record_wall_time = parse_on_off(o.timing);
  mc.validate(search_space);
  tc.validate(search_space);

  const auto graph = load_input_graph(o.graph);
  const auto split = split_for(graph, tc);
  if (!tc.split) {
    tc.split = std::array<int, 3>{split.train_steps.last - split.train_steps.first + 1,
                                  split.val_steps.last - split.val_steps.first + 1,
                                  split.test_steps.last - split.test_steps.first + 1};
  }

  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  Manifest m("train", g_argv);
  m.j["seed"] = tc.seed;
  m.j["config"] = {{"model", to_json(mc)}, {"train", to_json(tc)}, {"split", split_json(split)},
                   {"search_space_checks", search_space}};
  m.input("graph", o.graph);
  if (!o.config.empty()) m.input("config", o.config);
  if (!o.train_config.empty()) m.input("train_config", o.train_config);
  if (!o.resume.empty()) m.input("resume", o.resume);
  m.artifact("train_log", dir / "train_log.csv");
  m.artifact("checkpoint_final", dir / "model_final.ckpt");
  m.artifact("checkpoint_best", dir / "model_best.ckpt");
  m.artifact("summary", dir / "train_summary.json");
  m.write(dir / "manifest.json");

  Trainer trainer(graph, SupervisionMasks::from(split), mc, tc, search_space);
  if (!o.resume.empty()) trainer.restore(load_checkpoint(o.resume));
  while (trainer.epochs_completed() < tc.epochs) {
    int chunk = tc.epochs - trainer.epochs_completed();
    if (o.checkpoint_every > 0) chunk = std::min(chunk, o.checkpoint_every);
    trainer.run(chunk);
    if (o.checkpoint_every > 0 && trainer.epochs_completed() < tc.epochs) {
      std::ostringstream name;
      name << "model_epoch" << std::setw(4) << std::setfill('0') << trainer.epochs_completed()
           << ".ckpt";
      save_checkpoint(dir / name.str(), trainer.model(), &trainer.optimizer(),
                      trainer.epochs_completed());
    }
  }
  write_text(dir / "train_log.csv", trainer.log().to_csv());
  save_checkpoint(dir / "model_final.ckpt", trainer.model(), &trainer.optimizer(),
                  trainer.epochs_completed());
  save_checkpoint(dir / "model_best.ckpt", trainer.best_model(), nullptr, trainer.best_epoch());
  Json summary;
  summary["manifest"] = "manifest.json";
  summary["epochs_completed"] = trainer.epochs_completed();
  summary["best_epoch"] = trainer.best_epoch();
  summary["best_val_auprc"] =
      trainer.best_val_auprc() ? Json(*trainer.best_val_auprc()) : Json(nullptr);
  summary["final_train_loss"] =
      trainer.log().records.empty() ? Json(nullptr) : Json(trainer.log().records.back().train_loss);
  summary["parameter_count"] = trainer.model().parameter_count();
  write_text(dir / "train_summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump() << "\n";
  return 0;
}

// --- evaluate -------------------------------------------------------------

struct EvaluateOpts {
  std::string graph, checkpoint, split = "test", out, dump_scores, partition, percentiles;
  EvalOptions eval;
};

int run_evaluate(const EvaluateOpts& o) {
  EvalOptions eval = o.eval;
  if (!o.percentiles.empty()) eval.percentiles = parse_double_list(o.percentiles);
  if (o.split != "train" && o.split != "val" && o.split != "test") {
    throw Error(ErrorKind::ConfigOutOfRange, "--split must be train, val or test");
  }
  const fs::path manifest_path = o.out + ".manifest.json";
  Manifest m("evaluate", g_argv);
  m.j["seed"] = eval.seed;
  m.input("graph", o.graph);
  m.input("checkpoint", o.checkpoint);
  m.artifact("report", o.out);
  if (!o.dump_scores.empty()) m.artifact("scores", o.dump_scores);

  const auto graph = load_input_graph(o.graph);
  const auto ckpt = load_checkpoint(o.checkpoint);
  const auto parts = parse_partition(o.partition).value_or(default_partition(graph.num_steps));
  const auto split = temporal_split(graph, parts[0], parts[1], parts[2]);
  m.j["config"] = {{"split", o.split},
                   {"partition", parts},
                   {"bootstrap_rounds", eval.bootstrap_rounds},
                   {"bootstrap_frac", eval.bootstrap_frac},
                   {"percentiles", eval.percentiles},
                   {"model", to_json(ckpt.model.config())}};
  m.write(manifest_path);

  const auto& mask = o.split == "train" ? split.train_mask
                     : o.split == "val" ? split.val_mask
                                        : split.test_mask;
  ScoredSet scored;
  auto report = evaluate(ckpt.model, graph, mask, eval, &scored);
  report.split = o.split;
  report.model_selection = fs::path(o.checkpoint).filename().string();
  auto j = Json::parse(report_to_json(report));
  j["manifest"] = fs::path(manifest_path).filename().string();
  write_text(o.out, j.dump(2) + "\n");
  if (!o.dump_scores.empty()) write_score_dump(o.dump_scores, scored);
  std::cout << "auc=" << (report.auc ? std::to_string(*report.auc) : "null")
            << " auprc=" << report.auprc << " n=" << report.n << "\n";
  return 0;
}

// --- ablate ---------------------------------------------------------------

struct AblateOpts {
  std::string graph, grid, seeds = "42", out_dir, partition;
  int workers = 1;
  bool allow_out_of_range = false;
};

int run_ablate(const AblateOpts& o) {
  const bool search_space = !o.allow_out_of_range;
  const auto grid = o.grid.empty() ? AblationGrid::standard() : AblationGrid::from_json(read_json_file(o.grid));
  grid.validate(search_space);
  std::vector<std::uint64_t> seeds;
  for (int s : parse_int_list(o.seeds, "seed")) {
    if (s < 0) throw Error(ErrorKind::ConfigOutOfRange, "seeds must be non-negative");
    seeds.push_back(static_cast<std::uint64_t>(s));
  }
  if (seeds.empty()) throw Error(ErrorKind::ConfigOutOfRange, "--seeds is empty");
  const auto graph = load_input_graph(o.graph);
  const auto parts = parse_partition(o.partition).value_or(default_partition(graph.num_steps));
  const auto split = temporal_split(graph, parts[0], parts[1], parts[2]);

  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  Manifest m("ablate", g_argv);
  m.j["seed"] = seeds;
  m.j["config"] = {{"grid", grid.to_json()}, {"partition", parts}, {"split", split_json(split)},
                   {"search_space_checks", search_space}};
  m.input("graph", o.graph);
  if (!o.grid.empty()) m.input("grid", o.grid);
  m.artifact("table", dir / "ablation_table.csv");
  m.artifact("summary", dir / "ablation_summary.csv");
  m.artifact("runs", dir / "ablation_runs.csv");
  m.artifact("reports", dir / "reports.json");
  m.write(dir / "manifest.json");

  const auto result = run_ablation(graph, split, grid, seeds, o.workers, search_space);
  write_text(dir / "ablation_table.csv", result.table_csv());
  write_text(dir / "ablation_summary.csv", result.summary_csv());
  write_text(dir / "ablation_runs.csv", result.runs_csv());
  Json reports = Json::array();
  for (const auto& r : result.runs) {
    Json entry = {{"architecture", to_string(r.arch)}, {"arm", to_string(r.arm)},
                  {"seed", r.seed}, {"ok", r.ok}};
    if (r.ok) {
      entry["report"] = Json::parse(report_to_json(r.report));
    } else {
      entry["error"] = r.error;
    }
    reports.push_back(entry);
  }
  write_text(dir / "reports.json", Json{{"manifest", "manifest.json"}, {"runs", reports}}.dump(2) + "\n");
  std::cout << result.table_csv();
  std::size_t failed = 0;
  for (const auto& r : result.runs) failed += r.ok ? 0 : 1;
  if (failed) std::cerr << "warning: " << failed << " run(s) failed; see ablation_runs.csv\n";
  return 0;
}

// --- hpo ------------------------------------------------------------------

struct HpoOpts {
  std::string graph, space, out_dir, mode = "random", arch, budgets = "128,256,512", partition,
                                     timing = "on";
  int trials = 100;
  std::uint64_t seed = 42;
  int workers = 1;
  double keep_frac = 0.5;
};

int run_hpo(const HpoOpts& o) {
  if (o.mode != "random" && o.mode != "halving") {
    throw Error(ErrorKind::ConfigOutOfRange, "--mode must be random or halving");
  }
  Json space_json = o.space.empty() ? Json::object() : read_json_file(o.space);
  if (!o.arch.empty()) space_json["layer_type"] = o.arch;
  auto space = SearchSpace::from_json(space_json);
  space.base_train.record_wall_time = parse_on_off(o.timing);
  HalvingSchedule schedule;
  schedule.n_initial = o.trials;
  schedule.keep_frac = o.keep_frac;
  schedule.budgets = parse_int_list(o.budgets, "budget");
  if (o.mode == "halving") schedule.validate();
  if (o.trials < 1) throw Error(ErrorKind::ConfigOutOfRange, "--trials must be >= 1");

  const auto graph = load_input_graph(o.graph);
  const auto parts = parse_partition(o.partition)
                         .value_or(space.base_train.split.value_or(default_partition(graph.num_steps)));
  space.base_train.split = parts;
  const auto split = temporal_split(graph, parts[0], parts[1], parts[2]);

  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  Manifest m("hpo", g_argv);
  m.j["seed"] = o.seed;
  m.j["config"] = {{"space", space.to_json()}, {"mode", o.mode}, {"trials", o.trials},
                   {"split", split_json(split)}};
  if (o.mode == "halving") {
    m.j["config"]["schedule"] = {{"n_initial", schedule.n_initial},
                                 {"keep_frac", schedule.keep_frac},
                                 {"budgets", schedule.budgets}};
  }
  m.input("graph", o.graph);
  if (!o.space.empty()) m.input("space", o.space);
  m.artifact("trials", dir / "trials.csv");
  m.artifact("best_config", dir / "best_config.json");
  if (o.mode == "halving") m.artifact("checkpoints", dir / "checkpoints");
  m.write(dir / "manifest.json");

  // Only train/val masks reach the search.
  const auto masks = SupervisionMasks::from(split);
  const auto trials = o.mode == "random"
                          ? random_search(graph, masks, space, o.trials, o.seed, o.workers)
                          : successive_halving(graph, masks, space, schedule, o.seed, o.workers,
                                               dir / "checkpoints");
  write_text(dir / "trials.csv", trials_csv(trials));
  const auto& best = trials.front();
  Json best_json = {{"manifest", "manifest.json"},
                    {"trial", best.id},
                    {"objective", std::isfinite(best.objective) ? Json(best.objective) : Json(nullptr)},
                    {"model", to_json(best.model)},
                    {"train", to_json(best.train)}};
  write_text(dir / "best_config.json", best_json.dump(2) + "\n");
  std::cout << best_json.dump() << "\n";
  return 0;
}

// --- stats ----------------------------------------------------------------

int run_stats(const std::string& path, bool as_json) {
  const auto s = graph_stats(load_input_graph(path));
  Json j;
  j["num_nodes"] = s.num_nodes;
  j["num_undirected_edges"] = s.num_undirected_edges;
  j["feat_dim"] = s.feat_dim;
  j["num_steps"] = s.num_steps;
  j["label_counts"] = {{"illicit", s.label_counts[0]},
                       {"licit", s.label_counts[1]},
                       {"unknown", s.label_counts[2]}};
  const double n = static_cast<double>(std::max<std::size_t>(1, s.num_nodes));
  j["label_shares"] = {{"illicit", s.label_counts[0] / n},
                       {"licit", s.label_counts[1] / n},
                       {"unknown", s.label_counts[2] / n}};
  j["degree"] = {{"min", s.degree_min}, {"mean", s.degree_mean}, {"max", s.degree_max}};
  j["nodes_per_step"] = s.nodes_per_step;
  j["homophily"] = std::isfinite(s.homophily) ? Json(s.homophily) : Json(nullptr);
  j["labeled_edges"] = s.labeled_edges;
  j["cross_step_edges"] = s.cross_step_edges;
  if (as_json) {
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  std::cout << "nodes            " << s.num_nodes << "\n"
            << "edges            " << s.num_undirected_edges << " (cross-step " << s.cross_step_edges
            << ")\n"
            << "features         " << s.feat_dim << "\n"
            << "time steps       " << s.num_steps << "\n"
            << "illicit          " << s.label_counts[0] << " (" << 100.0 * s.label_counts[0] / n
            << "%)\n"
            << "licit            " << s.label_counts[1] << " (" << 100.0 * s.label_counts[1] / n
            << "%)\n"
            << "unknown          " << s.label_counts[2] << " (" << 100.0 * s.label_counts[2] / n
            << "%)\n"
            << "degree min/mean/max " << s.degree_min << " / " << s.degree_mean << " / "
            << s.degree_max << "\n"
            << "homophily        "
            << (std::isfinite(s.homophily) ? std::to_string(s.homophily) : std::string("n/a"))
            << " over " << s.labeled_edges << " labeled edges\n";
  return 0;
}

std::string_view category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Usage: return "usage";
    case ErrorCategory::Data: return "data";
    case ErrorCategory::Numeric: return "numeric";
  }
  return "?";
}

int fail(std::string_view category, std::string_view kind, const std::string& message, int code) {
  Json j = {{"error", {{"category", category}, {"kind", kind}, {"message", message}}}};
  std::cerr << j.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  g_argv.assign(argv, argv + argc);
  CLI::App app{"Graph neural network training and evaluation for transaction graphs"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  IngestOpts ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Build a graph cache from the three Elliptic CSVs");
  c_ingest->add_option("--features", ingest.features, "features CSV (id, step, features...)")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--classes", ingest.classes, "classes CSV (txId,class)")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--edges", ingest.edges, "edge list CSV (txId1,txId2)")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--out", ingest.out, "output graph cache")->required();

  SynthOpts synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic labelled transaction graph");
  c_synth->add_option("--seed", synth.p.seed, "random seed")->capture_default_str();
  c_synth->add_option("--nodes", synth.p.n_nodes, "number of nodes")->capture_default_str();
  c_synth->add_option("--steps", synth.p.n_steps, "number of time steps")->capture_default_str();
  c_synth->add_option("--illicit", synth.p.illicit_frac, "illicit share of all nodes")->capture_default_str();
  c_synth->add_option("--unknown", synth.p.unknown_frac, "unlabelled share of all nodes")->capture_default_str();
  c_synth->add_option("--dim", synth.p.feat_dim, "feature dimension")->capture_default_str();
  c_synth->add_option("--homophily", synth.p.homophily, "probability an edge joins same-class nodes")->capture_default_str();
  c_synth->add_option("--mean-degree", synth.p.mean_degree, "mean node degree")->capture_default_str();
  c_synth->add_option("--separation", synth.p.class_separation, "distance between class means")->capture_default_str();
  c_synth->add_option("--out", synth.out, "output graph cache")->required();

  TrainOpts train_o;
  auto* c_train = app.add_subcommand("train", "Train one model; writes checkpoints, log and manifest");
  c_train->add_option("--graph", train_o.graph, "graph cache")->required()->check(CLI::ExistingFile);
  c_train->add_option("--arch", train_o.arch, "gcn, gat or sage (default: config layer_type, else sage)");
  c_train->add_option("--config", train_o.config, "model config JSON; unset keys take the tuned optimum")->check(CLI::ExistingFile);
  c_train->add_option("--train-config", train_o.train_config, "training config JSON")->check(CLI::ExistingFile);
  c_train->add_option("--epochs", train_o.epochs, "override epoch count (0 keeps config)")->capture_default_str();
  c_train->add_option("--partition", train_o.partition, "train,val,test step counts (default 29,10,10 on 49 steps)");
  c_train->add_option("--checkpoint-every", train_o.checkpoint_every, "also checkpoint every N epochs (0 = off)")->capture_default_str();
  c_train->add_option("--resume", train_o.resume, "continue from a checkpoint with optimizer state")->check(CLI::ExistingFile);
  c_train->add_option("--timing", train_o.timing, "record wall time in the log (off = reproducible bytes)")
      ->check(CLI::IsMember({"on", "off"}))->capture_default_str();
  c_train->add_flag("--allow-out-of-range", train_o.allow_out_of_range, "skip search-space range checks");
  c_train->add_option("--out-dir", train_o.out_dir, "run directory")->required();

  EvaluateOpts eval_o;
  auto* c_eval = app.add_subcommand("evaluate", "Score a checkpoint on one split");
  c_eval->add_option("--graph", eval_o.graph, "graph cache")->required()->check(CLI::ExistingFile);
  c_eval->add_option("--checkpoint", eval_o.checkpoint, "model checkpoint")->required()->check(CLI::ExistingFile);
  c_eval->add_option("--split", eval_o.split, "train, val or test")->capture_default_str();
  c_eval->add_option("--partition", eval_o.partition, "train,val,test step counts (default 29,10,10 on 49 steps)");
  c_eval->add_option("--bootstrap-rounds", eval_o.eval.bootstrap_rounds, "bootstrap rounds (0 = off)")->capture_default_str();
  c_eval->add_option("--bootstrap-frac", eval_o.eval.bootstrap_frac, "bootstrap subsample fraction")->capture_default_str();
  c_eval->add_option("--seed", eval_o.eval.seed, "bootstrap seed")->capture_default_str();
  c_eval->add_option("--percentiles", eval_o.percentiles, "score percentiles for thresholds (default 90,99,99.9)");
  c_eval->add_option("--out", eval_o.out, "report JSON")->required();
  c_eval->add_option("--dump-scores", eval_o.dump_scores, "optional per-node score CSV");

  AblateOpts abl;
  auto* c_abl = app.add_subcommand("ablate", "Run the initialisation / GraphNorm ablation grid");
  c_abl->add_option("--graph", abl.graph, "graph cache")->required()->check(CLI::ExistingFile);
  c_abl->add_option("--grid", abl.grid, "grid JSON (default: 3 architectures x 3 arms at tuned optima)")->check(CLI::ExistingFile);
  c_abl->add_option("--seeds", abl.seeds, "comma-separated seeds")->capture_default_str();
  c_abl->add_option("--partition", abl.partition, "train,val,test step counts (default 29,10,10 on 49 steps)");
  c_abl->add_option("--workers", abl.workers, "concurrent runs")->capture_default_str()->check(CLI::PositiveNumber);
  c_abl->add_flag("--allow-out-of-range", abl.allow_out_of_range, "skip search-space range checks");
  c_abl->add_option("--out-dir", abl.out_dir, "output directory")->required();

  HpoOpts hpo;
  auto* c_hpo = app.add_subcommand("hpo", "Random or successive-halving hyperparameter search");
  c_hpo->add_option("--graph", hpo.graph, "graph cache")->required()->check(CLI::ExistingFile);
  c_hpo->add_option("--space", hpo.space, "search space JSON (default: full table for --arch)")->check(CLI::ExistingFile);
  c_hpo->add_option("--arch", hpo.arch, "gcn, gat or sage (overrides the space's layer_type; default sage)");
  c_hpo->add_option("--trials", hpo.trials, "trials (halving: initial population)")->capture_default_str();
  c_hpo->add_option("--mode", hpo.mode, "random or halving")->capture_default_str();
  c_hpo->add_option("--seed", hpo.seed, "sampler seed")->capture_default_str();
  c_hpo->add_option("--keep-frac", hpo.keep_frac, "halving: fraction kept per rung")->capture_default_str();
  c_hpo->add_option("--budgets", hpo.budgets, "halving: cumulative epochs per rung")->capture_default_str();
  c_hpo->add_option("--partition", hpo.partition, "train,val,test step counts (default 29,10,10 on 49 steps)");
  c_hpo->add_option("--workers", hpo.workers, "concurrent trials")->capture_default_str()->check(CLI::PositiveNumber);
  c_hpo->add_option("--timing", hpo.timing, "record wall time per trial")
      ->check(CLI::IsMember({"on", "off"}))->capture_default_str();
  c_hpo->add_option("--out-dir", hpo.out_dir, "output directory")->required();

  std::string stats_graph;
  bool stats_json = false;
  auto* c_stats = app.add_subcommand("stats", "Print graph statistics");
  c_stats->add_option("--graph", stats_graph, "graph cache")->required()->check(CLI::ExistingFile);
  c_stats->add_flag("--json", stats_json, "emit JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return fail("usage", "BadArguments", e.what(), 2);
  }

  try {
    if (*c_ingest) return run_ingest(ingest);
    if (*c_synth) return run_synth(synth);
    if (*c_train) return run_train(train_o);
    if (*c_eval) return run_evaluate(eval_o);
    if (*c_abl) return run_ablate(abl);
    if (*c_hpo) return run_hpo(hpo);
    if (*c_stats) return run_stats(stats_graph, stats_json);
  } catch (const Error& e) {
    const int code = e.category() == ErrorCategory::Usage ? 2 : e.category() == ErrorCategory::Data ? 3 : 4;
    return fail(category_name(e.category()), to_string(e.kind()), e.what(), code);
  } catch (const Json::exception& e) {
    return fail("usage", "BadJson", e.what(), 2);
  } catch (const std::exception& e) {
    return fail("data", "IoError", e.what(), 3);
  }
  return 0;
}
