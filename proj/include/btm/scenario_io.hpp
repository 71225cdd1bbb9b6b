#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "btm/simnet.hpp"

namespace btm {

/// Builds a config from JSON. Omitted fields keep their defaults; unknown
/// keys and ill-typed values raise InvalidConfig. The result is validated.
ScenarioConfig scenario_from_json(const nlohmann::json& j);

/// Full JSON form of a config, with every field spelled out.
nlohmann::json scenario_to_json(const ScenarioConfig& config);

ScenarioConfig load_scenario(const std::filesystem::path& path);

}  // namespace btm
