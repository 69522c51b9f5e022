#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <memory>
#include <sstream>

#include "amlgnn/error.hpp"
#include "amlgnn/search.hpp"

namespace amlgnn {

namespace {

std::string_view kind_name(ParamKind k) {
  switch (k) {
    case ParamKind::LogUniform: return "log_uniform";
    case ParamKind::LinearInt: return "linear_int";
    case ParamKind::Categorical: return "categorical";
  }
  return "?";
}

ParamKind parse_kind(std::string_view s) {
  if (s == "log_uniform") return ParamKind::LogUniform;
  if (s == "linear_int") return ParamKind::LinearInt;
  if (s == "categorical") return ParamKind::Categorical;
  throw Error(ErrorKind::ConfigOutOfRange, "unknown parameter kind '" + std::string(s) + "'");
}

ParamSpec log_param(std::string name, double lo, double hi) {
  return {std::move(name), ParamKind::LogUniform, lo, hi, {}};
}
ParamSpec int_param(std::string name, double lo, double hi) {
  return {std::move(name), ParamKind::LinearInt, lo, hi, {}};
}

void assign(SampledConfig& out, const std::string& name, const Json& v) {
  if (name == "learning_rate") out.train.learning_rate = v.get<double>();
  else if (name == "weight_decay") out.train.weight_decay = v.get<double>();
  else if (name == "epochs") out.train.epochs = v.get<int>();
  else if (name == "hidden_dim") out.model.hidden_dim = v.get<int>();
  else if (name == "embedding_dim") out.model.embedding_dim = v.get<int>();
  else if (name == "num_layers") out.model.num_layers = v.get<int>();
  else if (name == "dropout") out.model.dropout = v.get<double>();
  else if (name == "gat_heads") out.model.gat_heads = v.get<int>();
  else if (name == "sage_aggregator") out.model.sage_aggregator = parse_aggregator(v.get<std::string>());
  else if (name == "norm") out.model.norm = parse_norm(v.get<std::string>());
  else if (name == "init") out.model.init = parse_init(v.get<std::string>());
  else throw Error(ErrorKind::ConfigOutOfRange, "unknown search parameter '" + name + "'");
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// Objective descending, ties by id.
void rank(std::vector<Trial>& trials) {
  std::stable_sort(trials.begin(), trials.end(), [](const Trial& a, const Trial& b) {
    if (a.rung != b.rung) return a.rung > b.rung;
    if (a.objective != b.objective) return a.objective > b.objective;
    return a.id < b.id;
  });
}

double objective_of(const Trainer& t) {
  return t.best_val_auprc() ? *t.best_val_auprc() : -std::numeric_limits<double>::infinity();
}

}  // namespace

SearchSpace SearchSpace::table1(LayerType type) {
  SearchSpace s;
  s.layer_type = type;
  s.base_model = ModelConfig::optimum(type);
  s.base_train = TrainConfig::optimum(type);
  s.params = {log_param("learning_rate", 2e-6, 1e-3), int_param("hidden_dim", 128, 256),
              int_param("embedding_dim", 64, 128),    int_param("num_layers", 1, 3),
              log_param("dropout", 0.08, 0.64),       int_param("epochs", 128, 512)};
  if (type == LayerType::Sage) {
    s.params.push_back({"sage_aggregator", ParamKind::Categorical, 0, 0, {"mean", "max"}});
  }
  return s;
}

SearchSpace SearchSpace::from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigOutOfRange, "search space must be an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "layer_type" && key != "params" && key != "model" && key != "train") {
      throw Error(ErrorKind::ConfigOutOfRange, "unknown search space key '" + key + "'");
    }
  }
  const auto type = parse_layer_type(j.value("layer_type", std::string("sage")));
  SearchSpace s = table1(type);
  if (j.contains("model")) s.base_model = model_config_from_json(j.at("model"), s.base_model);
  if (j.contains("train")) s.base_train = train_config_from_json(j.at("train"), s.base_train);
  s.base_model.layer_type = type;
  if (j.contains("params")) {
    for (const auto& p : j.at("params")) {
      ParamSpec spec;
      spec.name = p.at("name").get<std::string>();
      spec.kind = parse_kind(p.at("kind").get<std::string>());
      if (spec.kind == ParamKind::Categorical) {
        for (const auto& c : p.at("choices")) spec.choices.push_back(c);
      } else {
        spec.low = p.at("low").get<double>();
        spec.high = p.at("high").get<double>();
      }
      auto it = std::find_if(s.params.begin(), s.params.end(),
                             [&](const ParamSpec& q) { return q.name == spec.name; });
      if (it != s.params.end()) {
        *it = spec;
      } else {
        s.params.push_back(spec);
      }
    }
  }
  s.validate();
  return s;
}

Json SearchSpace::to_json() const {
  Json j;
  j["layer_type"] = amlgnn::to_string(layer_type);
  j["params"] = Json::array();
  for (const auto& p : params) {
    Json q = {{"name", p.name}, {"kind", kind_name(p.kind)}};
    if (p.kind == ParamKind::Categorical) {
      q["choices"] = p.choices;
    } else {
      q["low"] = p.low;
      q["high"] = p.high;
    }
    j["params"].push_back(q);
  }
  j["model"] = amlgnn::to_json(base_model);
  j["train"] = amlgnn::to_json(base_train);
  return j;
}

void SearchSpace::validate() const {
  for (const auto& p : params) {
    switch (p.kind) {
      case ParamKind::LogUniform:
        if (!(p.low > 0.0) || !(p.low <= p.high)) {
          throw Error(ErrorKind::ConfigOutOfRange,
                      "log-scaled parameter '" + p.name + "' needs 0 < low <= high");
        }
        break;
      case ParamKind::LinearInt:
        if (!(p.low <= p.high) || p.low != std::floor(p.low) || p.high != std::floor(p.high)) {
          throw Error(ErrorKind::ConfigOutOfRange,
                      "integer parameter '" + p.name + "' needs integral low <= high");
        }
        break;
      case ParamKind::Categorical:
        if (p.choices.empty()) {
          throw Error(ErrorKind::ConfigOutOfRange, "categorical parameter '" + p.name + "' has no choices");
        }
        break;
    }
    SampledConfig probe{base_model, base_train};
    assign(probe, p.name, p.kind == ParamKind::Categorical ? p.choices.front()
                          : p.kind == ParamKind::LinearInt ? Json(static_cast<int>(p.low))
                                                           : Json(p.low));
  }
}

SampledConfig sample_config(const SearchSpace& space, Rng& rng) {
  SampledConfig out{space.base_model, space.base_train};
  out.model.layer_type = space.layer_type;
  for (const auto& p : space.params) {
    if (p.name == "sage_aggregator" && space.layer_type != LayerType::Sage) continue;
    switch (p.kind) {
      case ParamKind::LogUniform: {
        const double v = std::exp(rng.uniform(std::log(p.low), std::log(p.high)));
        assign(out, p.name, Json(std::clamp(v, p.low, p.high)));
        break;
      }
      case ParamKind::LinearInt: {
        const auto lo = static_cast<std::int64_t>(p.low);
        const auto span = static_cast<std::uint64_t>(static_cast<std::int64_t>(p.high) - lo + 1);
        assign(out, p.name, Json(static_cast<int>(lo + static_cast<std::int64_t>(rng.below(span)))));
        break;
      }
      case ParamKind::Categorical:
        assign(out, p.name, p.choices[rng.below(p.choices.size())]);
        break;
    }
  }
  return out;
}

std::vector<Trial> random_search(const TransactionGraph& graph, const SupervisionMasks& masks,
                                 const SearchSpace& space, int n_trials, std::uint64_t seed,
                                 int workers) {
  if (n_trials < 1) throw Error(ErrorKind::ConfigOutOfRange, "n_trials must be >= 1");
  space.validate();
  std::vector<Trial> trials(static_cast<std::size_t>(n_trials));
  const Rng root(seed);
  for (int i = 0; i < n_trials; ++i) {
    Rng rng = root.split(static_cast<std::uint64_t>(i));
    auto sampled = sample_config(space, rng);
    trials[i].id = i;
    trials[i].model = sampled.model;
    trials[i].train = sampled.train;
  }
  parallel_for(trials.size(), workers, [&](std::size_t i) {
    auto& t = trials[i];
    const auto start = std::chrono::steady_clock::now();
    try {
      Trainer trainer(graph, masks, t.model, t.train, false);
      trainer.run(t.train.epochs);
      t.objective = objective_of(trainer);
      t.epochs_trained = trainer.epochs_completed();
      t.ok = true;
    } catch (const std::exception& e) {
      t.error = e.what();
    }
    if (t.train.record_wall_time) {
      t.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                      .count();
    }
  });
  rank(trials);
  return trials;
}

void HalvingSchedule::validate() const {
  if (n_initial < 2) throw Error(ErrorKind::BadSchedule, "n_initial must be >= 2");
  if (!(keep_frac > 0.0 && keep_frac < 1.0)) {
    throw Error(ErrorKind::BadSchedule, "keep_frac must lie in (0, 1)");
  }
  if (budgets.empty()) throw Error(ErrorKind::BadSchedule, "budget schedule is empty");
  if (budgets.front() < 1) throw Error(ErrorKind::BadSchedule, "budgets must be positive");
  for (std::size_t r = 1; r < budgets.size(); ++r) {
    if (budgets[r] <= budgets[r - 1]) {
      throw Error(ErrorKind::BadSchedule, "budget schedule must be strictly increasing");
    }
  }
}

int survivors_after(int n, double keep_frac) {
  // Guard against 0.5 * 8 landing a hair above 4 in floating point.
  const double x = keep_frac * n;
  const double r = std::round(x);
  const int kept = std::abs(x - r) < 1e-9 ? static_cast<int>(r) : static_cast<int>(std::ceil(x));
  return std::max(1, kept);
}

std::vector<Trial> successive_halving(const TransactionGraph& graph, const SupervisionMasks& masks,
                                      const SearchSpace& space, const HalvingSchedule& schedule,
                                      std::uint64_t seed, int workers,
                                      const std::optional<std::filesystem::path>& checkpoint_dir) {
  schedule.validate();
  space.validate();
  const auto n = static_cast<std::size_t>(schedule.n_initial);
  std::vector<Trial> trials(n);
  std::vector<std::unique_ptr<Trainer>> trainers(n);
  const Rng root(seed);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = root.split(i);
    auto sampled = sample_config(space, rng);
    trials[i].id = static_cast<int>(i);
    trials[i].model = sampled.model;
    trials[i].train = sampled.train;
    trials[i].train.epochs = schedule.budgets.back();
  }
  if (checkpoint_dir) std::filesystem::create_directories(*checkpoint_dir);

  std::vector<std::size_t> alive(n);
  for (std::size_t i = 0; i < n; ++i) alive[i] = i;
  for (std::size_t r = 0; r < schedule.budgets.size() && !alive.empty(); ++r) {
    const int budget = schedule.budgets[r];
    parallel_for(alive.size(), workers, [&](std::size_t k) {
      const auto i = alive[k];
      auto& t = trials[i];
      const auto start = std::chrono::steady_clock::now();
      try {
        auto& trainer = trainers[i];
        if (!trainer) {
          trainer = std::make_unique<Trainer>(graph, masks, t.model, t.train, false);
        }
        if (checkpoint_dir && r > 0) {
          trainer->restore(load_checkpoint(*checkpoint_dir / ("trial" + std::to_string(i) + ".ckpt")));
        }
        trainer->run(budget - trainer->epochs_completed());
        if (checkpoint_dir) {
          save_checkpoint(*checkpoint_dir / ("trial" + std::to_string(i) + ".ckpt"), trainer->model(),
                          &trainer->optimizer(), trainer->epochs_completed());
        }
        t.objective = objective_of(*trainer);
        t.epochs_trained = trainer->epochs_completed();
        t.ok = true;
      } catch (const std::exception& e) {
        t.ok = false;
        t.error = e.what();
        t.objective = -std::numeric_limits<double>::infinity();
        trainers[i].reset();
      }
      t.rung = static_cast<int>(r);
      if (t.train.record_wall_time) {
        t.wall_ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                         .count();
      }
    });
    std::stable_sort(alive.begin(), alive.end(), [&](std::size_t a, std::size_t b) {
      if (trials[a].objective != trials[b].objective) return trials[a].objective > trials[b].objective;
      return a < b;
    });
    const auto keep = static_cast<std::size_t>(survivors_after(static_cast<int>(alive.size()),
                                                               schedule.keep_frac));
    for (std::size_t k = keep; k < alive.size(); ++k) trainers[alive[k]].reset();
    if (r + 1 < schedule.budgets.size()) alive.resize(std::min(keep, alive.size()));
  }
  rank(trials);
  return trials;
}

std::string trials_csv(const std::vector<Trial>& trials) {
  std::ostringstream os;
  os << "rank,trial,status,objective,rung,epochs_trained,learning_rate,hidden_dim,embedding_dim,"
        "num_layers,dropout,epochs,sage_aggregator,wall_ms,error\n";
  for (std::size_t k = 0; k < trials.size(); ++k) {
    const auto& t = trials[k];
    std::string err = t.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    os << k + 1 << ',' << t.id << ',' << (t.ok ? "ok" : "failed") << ','
       << (std::isfinite(t.objective) ? fmt(t.objective) : std::string()) << ',' << t.rung << ','
       << t.epochs_trained << ',' << fmt(t.train.learning_rate) << ',' << t.model.hidden_dim << ','
       << t.model.embedding_dim << ',' << t.model.num_layers << ',' << fmt(t.model.dropout) << ','
       << t.train.epochs << ',' << to_string(t.model.sage_aggregator) << ',' << std::fixed
       << std::setprecision(3) << t.wall_ms << std::defaultfloat << ',' << err << '\n';
  }
  return os.str();
}

}  // namespace amlgnn
