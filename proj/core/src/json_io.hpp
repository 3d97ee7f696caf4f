#pragma once

#include <json.hpp>

#include "kgeeg/network.hpp"

namespace kgeeg::detail {

nlohmann::json model_to_json(const ModelConfig& cfg);
// Throws ConfigError with a path below `path` on malformed input.
ModelConfig model_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json head_to_json(const HeadConfig& cfg);
HeadConfig head_from_json(const nlohmann::json& j, const std::string& path);

}  // namespace kgeeg::detail
