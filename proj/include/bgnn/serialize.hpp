#pragma once

#include <json.hpp>

#include "bgnn/model.hpp"

namespace bgnn {

nlohmann::ordered_json config_to_json(const ModelConfig& cfg);
// Missing keys keep their defaults; unknown keys are rejected.
ModelConfig config_from_json(const nlohmann::json& j);

}  // namespace bgnn
