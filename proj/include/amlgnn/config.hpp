#pragma once

#include <json.hpp>

#include "amlgnn/model.hpp"
#include "amlgnn/trainer.hpp"

namespace amlgnn {

using Json = nlohmann::ordered_json;

// Config documents. Missing keys keep the value already in `base`, so callers
// start from the architecture optimum and overlay user settings.
Json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const Json& j, ModelConfig base);
ModelConfig model_config_from_json(const Json& j);  // base: optimum of j["layer_type"]

Json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const Json& j, TrainConfig base);

Json read_json_file(const std::filesystem::path& path);

}  // namespace amlgnn
