#pragma once

#include <filesystem>

#include <json.hpp>

#include "xaip/plant/plant.hpp"

namespace xaip::plant {

inline constexpr const char* kPlantConfigSchema = "xaip.plant_config/1";

// Config documents carry {"schema": kPlantConfigSchema, ...}; the schema key
// may be omitted when embedded in another document. Absent keys keep their
// defaults, unknown keys are rejected.
nlohmann::ordered_json config_to_json(const PlantConfig& config);
PlantConfig config_from_json(const nlohmann::json& doc);
PlantConfig load_plant_config(const std::filesystem::path& path);

// State snapshot with fixed field order:
// step, temperature, pressure, water_level, power, rods{security, fuel,
// sustain, regulatory}, damaged, energy_total.
nlohmann::ordered_json state_to_json(const PlantState& state);
PlantState state_from_json(const nlohmann::json& doc);

std::string_view rod_level_name(RodLevel level);

}  // namespace xaip::plant
