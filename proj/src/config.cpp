#include <fstream>
#include <set>

#include "amlgnn/config.hpp"
#include "amlgnn/error.hpp"

namespace amlgnn {

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& known, const char* what) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigOutOfRange, std::string(what) + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) {
      throw Error(ErrorKind::ConfigOutOfRange, std::string("unknown ") + what + " key '" + key + "'");
    }
  }
}

template <typename T>
void read(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigOutOfRange, std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

Json to_json(const ModelConfig& c) {
  Json j;
  j["layer_type"] = to_string(c.layer_type);
  j["num_layers"] = c.num_layers;
  j["hidden_dim"] = c.hidden_dim;
  j["embedding_dim"] = c.embedding_dim;
  j["dropout"] = c.dropout;
  j["norm"] = to_string(c.norm);
  j["init"] = to_string(c.init);
  j["sage_aggregator"] = to_string(c.sage_aggregator);
  j["gat_heads"] = c.gat_heads;
  j["out_dim"] = c.out_dim;
  j["seed"] = c.seed;
  return j;
}

ModelConfig model_config_from_json(const Json& j, ModelConfig c) {
  reject_unknown(j,
                 {"layer_type", "num_layers", "hidden_dim", "embedding_dim", "dropout", "norm",
                  "init", "sage_aggregator", "gat_heads", "out_dim", "seed"},
                 "model config");
  std::string s;
  if (j.contains("layer_type")) c.layer_type = parse_layer_type(j.at("layer_type").get<std::string>());
  read(j, "num_layers", c.num_layers);
  read(j, "hidden_dim", c.hidden_dim);
  read(j, "embedding_dim", c.embedding_dim);
  read(j, "dropout", c.dropout);
  if (j.contains("norm")) c.norm = parse_norm(j.at("norm").get<std::string>());
  if (j.contains("init")) c.init = parse_init(j.at("init").get<std::string>());
  if (j.contains("sage_aggregator")) {
    c.sage_aggregator = parse_aggregator(j.at("sage_aggregator").get<std::string>());
  }
  read(j, "gat_heads", c.gat_heads);
  read(j, "out_dim", c.out_dim);
  read(j, "seed", c.seed);
  return c;
}

ModelConfig model_config_from_json(const Json& j) {
  LayerType type = LayerType::Gcn;
  if (j.is_object() && j.contains("layer_type")) {
    type = parse_layer_type(j.at("layer_type").get<std::string>());
  }
  return model_config_from_json(j, ModelConfig::optimum(type));
}

Json to_json(const TrainConfig& c) {
  Json j;
  j["learning_rate"] = c.learning_rate;
  j["weight_decay"] = c.weight_decay;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  if (c.class_weight_mode == ClassWeightMode::InverseFrequency) {
    j["class_weight_mode"] = "inverse_frequency";
  } else {
    j["class_weight_mode"] = {{"manual", {c.manual_weights[0], c.manual_weights[1]}}};
  }
  j["eval_every"] = c.eval_every;
  j["split"] = c.split ? Json(*c.split) : Json(nullptr);
  j["record_wall_time"] = c.record_wall_time;
  return j;
}

TrainConfig train_config_from_json(const Json& j, TrainConfig c) {
  reject_unknown(j,
                 {"learning_rate", "weight_decay", "epochs", "seed", "class_weight_mode",
                  "eval_every", "split", "record_wall_time"},
                 "train config");
  read(j, "learning_rate", c.learning_rate);
  read(j, "weight_decay", c.weight_decay);
  read(j, "epochs", c.epochs);
  read(j, "seed", c.seed);
  read(j, "eval_every", c.eval_every);
  read(j, "record_wall_time", c.record_wall_time);
  if (j.contains("class_weight_mode")) {
    const auto& m = j.at("class_weight_mode");
    if (m.is_string() && m.get<std::string>() == "inverse_frequency") {
      c.class_weight_mode = ClassWeightMode::InverseFrequency;
    } else if (m.is_object() && m.contains("manual") && m.at("manual").is_array() &&
               m.at("manual").size() == 2) {
      c.class_weight_mode = ClassWeightMode::Manual;
      c.manual_weights = {m.at("manual")[0].get<double>(), m.at("manual")[1].get<double>()};
    } else {
      throw Error(ErrorKind::ConfigOutOfRange,
                  "class_weight_mode must be \"inverse_frequency\" or {\"manual\": [w0, w1]}");
    }
  }
  if (j.contains("split")) {
    const auto& s = j.at("split");
    if (s.is_null()) {
      c.split.reset();
    } else if (s.is_array() && s.size() == 3) {
      c.split = std::array<int, 3>{s[0].get<int>(), s[1].get<int>(), s[2].get<int>()};
    } else {
      throw Error(ErrorKind::BadPartition, "split must be [train, val, test] step counts");
    }
  }
  return c;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigOutOfRange, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigOutOfRange, path.string() + ": " + e.what());
  }
}

}  // namespace amlgnn
