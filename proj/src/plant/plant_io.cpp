#include "xaip/plant/plant_io.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <string>

#include "xaip/errors.hpp"

namespace xaip::plant {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// One table drives both directions so keys cannot drift apart.
template <typename Fn>
void for_each_field(PlantConfig& c, Fn&& fn) {
  fn("initial_temperature", c.initial_temperature);
  fn("initial_pressure", c.initial_pressure);
  fn("initial_water_level", c.initial_water_level);
  fn("max_temperature", c.max_temperature);
  fn("max_pressure", c.max_pressure);
  fn("temperature_increment", c.temperature_increment);
  fn("pressure_increment", c.pressure_increment);
  fn("water_consumption", c.water_consumption);
  fn("power_increment", c.power_increment);
  fn("rate_up", c.rate_up);
  fn("rate_medium", c.rate_medium);
  fn("rate_down", c.rate_down);
  fn("depletion_up", c.depletion_up);
  fn("depletion_medium", c.depletion_medium);
  fn("depletion_down", c.depletion_down);
  fn("critical_temperature", c.critical_temperature);
  fn("critical_pressure", c.critical_pressure);
  fn("refill_amount", c.refill_amount);
  fn("cooling_factor", c.cooling_factor);
  fn("step_seconds", c.step_seconds);
  fn("episode_steps", c.episode_steps);
  fn("low_water_threshold", c.low_water_threshold);
}

RodLevel rod_level_from_name(const std::string& name) {
  if (name == "up") return RodLevel::Up;
  if (name == "medium") return RodLevel::Medium;
  if (name == "down") return RodLevel::Down;
  throw FormatError("unknown rod level '" + name + "'");
}

}  // namespace

std::string_view rod_level_name(RodLevel level) {
  switch (level) {
    case RodLevel::Up: return "up";
    case RodLevel::Medium: return "medium";
    case RodLevel::Down: return "down";
  }
  return "?";
}

ordered_json config_to_json(const PlantConfig& config) {
  ordered_json doc;
  doc["schema"] = kPlantConfigSchema;
  PlantConfig copy = config;
  for_each_field(copy, [&](const char* key, auto& value) { doc[key] = value; });
  return doc;
}

PlantConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw FormatError("plant config must be a JSON object");
  if (doc.contains("schema") && doc["schema"] != kPlantConfigSchema) {
    throw FormatError(std::string("plant config schema must be ") + kPlantConfigSchema);
  }
  PlantConfig config;
  std::map<std::string, bool> known{{"schema", true}};
  for_each_field(config, [&](const char* key, auto& value) {
    known[key] = true;
    if (auto it = doc.find(key); it != doc.end()) {
      if (!it->is_number()) throw FormatError(std::string("plant config key '") + key + "' must be numeric");
      it->get_to(value);
    }
  });
  for (const auto& [key, _] : doc.items()) {
    if (!known.count(key)) throw FormatError("unknown plant config key '" + key + "'");
  }
  config.validate();
  return config;
}

PlantConfig load_plant_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open plant config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("plant config " + path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

ordered_json state_to_json(const PlantState& s) {
  ordered_json doc;
  doc["step"] = s.step_index;
  doc["temperature"] = s.temperature;
  doc["pressure"] = s.pressure;
  doc["water_level"] = s.water_level;
  doc["power"] = s.power;
  ordered_json rods;
  rods["security"] = rod_level_name(s.rods.security);
  rods["fuel"] = rod_level_name(s.rods.fuel);
  rods["sustain"] = rod_level_name(s.rods.sustain);
  rods["regulatory"] = rod_level_name(s.rods.regulatory);
  doc["rods"] = std::move(rods);
  doc["damaged"] = s.damaged;
  doc["energy_total"] = s.energy_total;
  return doc;
}

PlantState state_from_json(const json& doc) {
  try {
    PlantState s;
    s.step_index = doc.at("step").get<int>();
    s.temperature = doc.at("temperature").get<double>();
    s.pressure = doc.at("pressure").get<double>();
    s.water_level = doc.at("water_level").get<double>();
    s.power = doc.at("power").get<double>();
    const auto& rods = doc.at("rods");
    s.rods.security = rod_level_from_name(rods.at("security").get<std::string>());
    s.rods.fuel = rod_level_from_name(rods.at("fuel").get<std::string>());
    s.rods.sustain = rod_level_from_name(rods.at("sustain").get<std::string>());
    s.rods.regulatory = rod_level_from_name(rods.at("regulatory").get<std::string>());
    s.damaged = doc.at("damaged").get<bool>();
    s.energy_total = doc.at("energy_total").get<double>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed state snapshot: ") + e.what());
  }
}

}  // namespace xaip::plant
