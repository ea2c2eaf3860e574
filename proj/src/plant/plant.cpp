#include "xaip/plant/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "xaip/errors.hpp"

namespace xaip::plant {
namespace {

constexpr std::array<std::string_view, kActionCount> kActionNames = {
    "SecurityUp",   "SecurityDown",     "FuelUp",        "FuelDown",
    "SustainUp",    "SustainMedium",    "SustainDown",   "RegulatoryUp",
    "RegulatoryMedium", "RegulatoryDown", "AddWater",    "Skip",
};

constexpr std::array<std::string_view, kFeatureCount> kFeatureKeys = {
    "temperature", "pressure", "water_level", "power",
    "security",    "fuel",     "sustain",     "regulatory",
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid plant config: " + what);
}

RodLevel rod_from_code(double code, bool two_level) {
  if (code == 0.0) return RodLevel::Up;
  if (code == 2.0) return RodLevel::Down;
  if (code == 1.0 && !two_level) return RodLevel::Medium;
  throw std::invalid_argument(fmt::format("invalid rod level code {}", code));
}

void apply_rod_or_water(PlantState& s, Action action, const PlantConfig& config) {
  auto& r = s.rods;
  switch (action) {
    case Action::SecurityUp: r.security = RodLevel::Up; break;
    case Action::SecurityDown: r.security = RodLevel::Down; break;
    case Action::FuelUp: r.fuel = RodLevel::Up; break;
    case Action::FuelDown: r.fuel = RodLevel::Down; break;
    case Action::SustainUp: r.sustain = RodLevel::Up; break;
    case Action::SustainMedium: r.sustain = RodLevel::Medium; break;
    case Action::SustainDown: r.sustain = RodLevel::Down; break;
    case Action::RegulatoryUp: r.regulatory = RodLevel::Up; break;
    case Action::RegulatoryMedium: r.regulatory = RodLevel::Medium; break;
    case Action::RegulatoryDown: r.regulatory = RodLevel::Down; break;
    case Action::AddWater:
      s.water_level = std::min(kMaxWaterLevel, s.water_level + config.refill_amount);
      break;
    case Action::Skip: break;
  }
}

// Rods configured for fission, regardless of water.
bool fission_demanded(const RodBank& rods) {
  return rods.security == RodLevel::Up && rods.fuel == RodLevel::Down;
}

}  // namespace

Action action_from_id(int id) {
  if (id < 0 || id >= static_cast<int>(kActionCount)) {
    throw std::out_of_range(fmt::format("action id {} outside 0..11", id));
  }
  return static_cast<Action>(id);
}

std::string_view action_name(Action a) { return kActionNames.at(static_cast<std::size_t>(a)); }

std::optional<Action> action_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kActionCount; ++i) {
    if (kActionNames[i] == name) return static_cast<Action>(i);
  }
  return std::nullopt;
}

std::string_view event_name(PlantEvent e) {
  switch (e) {
    case PlantEvent::FissionStarted: return "FissionStarted";
    case PlantEvent::FissionStopped: return "FissionStopped";
    case PlantEvent::DamageOccurred: return "DamageOccurred";
    case PlantEvent::LowWaterWarning: return "LowWaterWarning";
  }
  return "?";
}

std::string_view damage_cause_name(DamageCause c) {
  switch (c) {
    case DamageCause::Temperature: return "temperature";
    case DamageCause::Pressure: return "pressure";
    case DamageCause::DryGenerator: return "dry_generator";
  }
  return "?";
}

void PlantConfig::validate() const {
  require(std::isfinite(initial_temperature) && initial_temperature < critical_temperature &&
              critical_temperature < max_temperature,
          "initial_temperature < critical_temperature < max_temperature");
  require(std::isfinite(initial_pressure) && initial_pressure < critical_pressure &&
              critical_pressure < max_pressure,
          "initial_pressure < critical_pressure < max_pressure");
  require(initial_water_level > 0.0 && initial_water_level <= kMaxWaterLevel,
          "initial_water_level in (0, 100]");
  require(low_water_threshold > 0.0 && low_water_threshold < kMaxWaterLevel,
          "low_water_threshold in (0, 100)");
  require(rate_up > 0.0, "rate_up > 0");
  require(rate_medium > rate_up, "rate_medium > rate_up");
  require(rate_down > rate_medium, "rate_down > rate_medium");
  require(temperature_increment > 0.0, "temperature_increment > 0");
  require(pressure_increment > 0.0, "pressure_increment > 0");
  require(water_consumption > 0.0, "water_consumption > 0");
  require(power_increment > 0.0, "power_increment > 0");
  require(depletion_up >= 0.0 && depletion_medium >= 0.0 && depletion_down >= 0.0,
          "fuel depletion rates >= 0");
  require(refill_amount > 0.0, "refill_amount > 0");
  require(cooling_factor > 0.0 && cooling_factor <= 1.0, "cooling_factor in (0, 1]");
  require(step_seconds > 0.0, "step_seconds > 0");
  require(episode_steps >= 1, "episode_steps >= 1");
}

double PlantConfig::rate_for(RodLevel regulatory) const {
  switch (regulatory) {
    case RodLevel::Up: return rate_up;
    case RodLevel::Medium: return rate_medium;
    case RodLevel::Down: return rate_down;
  }
  return rate_medium;
}

double PlantConfig::depletion_for(RodLevel sustain) const {
  switch (sustain) {
    case RodLevel::Up: return depletion_up;
    case RodLevel::Medium: return depletion_medium;
    case RodLevel::Down: return depletion_down;
  }
  return depletion_up;
}

PlantState new_plant(const PlantConfig& config) {
  config.validate();
  PlantState s;
  s.temperature = config.initial_temperature;
  s.pressure = config.initial_pressure;
  s.water_level = config.initial_water_level;
  s.power = 0.0;
  return s;
}

bool fission_active(const PlantState& state) {
  return !state.damaged && fission_demanded(state.rods) && state.water_level > 0.0;
}

bool is_terminal(const PlantState& state, const PlantConfig& config) {
  return state.damaged || state.step_index >= config.episode_steps;
}

StepOutcome apply_action(const PlantState& state, Action action, const PlantConfig& config) {
  if (state.damaged) throw TerminalStateError("plant is damaged; episode is over");
  if (state.step_index >= config.episode_steps) {
    throw TerminalStateError(
        fmt::format("episode finished after {} steps", config.episode_steps));
  }

  StepOutcome out;
  PlantState& s = out.next_state;
  s = state;
  const bool was_active = fission_active(state);

  apply_rod_or_water(s, action, config);
  const bool active = fission_active(s);
  const double depletion = config.depletion_for(s.rods.sustain);

  // Running dry: rods still demand fission but the generator is empty.
  const bool dry = fission_demanded(s.rods) && s.water_level <= 0.0;

  if (active) {
    const double rate = config.rate_for(s.rods.regulatory);
    s.temperature += rate * config.temperature_increment;
    s.pressure += rate * config.pressure_increment;
    s.water_level -= rate * config.water_consumption;
    s.power += rate * config.power_increment - depletion;
  } else {
    const double keep = 1.0 - config.cooling_factor;
    s.temperature = config.initial_temperature + (s.temperature - config.initial_temperature) * keep;
    s.pressure = config.initial_pressure + (s.pressure - config.initial_pressure) * keep;
    s.power -= depletion;
  }
  s.temperature = std::clamp(s.temperature, config.initial_temperature, config.max_temperature);
  s.pressure = std::clamp(s.pressure, config.initial_pressure, config.max_pressure);
  s.water_level = std::clamp(s.water_level, 0.0, kMaxWaterLevel);
  s.power = std::clamp(s.power, 0.0, kMaxPower);

  if (s.temperature > config.critical_temperature) out.damage_causes.push_back(DamageCause::Temperature);
  if (s.pressure > config.critical_pressure) out.damage_causes.push_back(DamageCause::Pressure);
  if (dry) out.damage_causes.push_back(DamageCause::DryGenerator);

  if (active && !was_active) out.events.push_back(PlantEvent::FissionStarted);
  if (!out.damage_causes.empty()) {
    if (active || was_active) out.events.push_back(PlantEvent::FissionStopped);
    out.events.push_back(PlantEvent::DamageOccurred);
    s.damaged = true;
    s.power = 0.0;
  } else {
    if (was_active && !active) out.events.push_back(PlantEvent::FissionStopped);
    if (fission_demanded(s.rods) && s.water_level <= config.low_water_threshold) {
      out.events.push_back(PlantEvent::LowWaterWarning);
    }
    if (active) out.energy_produced = s.power / kEnergyDivisor;
  }

  s.step_index += 1;
  s.energy_total += out.energy_produced;
  return out;
}

std::string_view feature_key(std::size_t index) { return kFeatureKeys.at(index); }

FeatureVector feature_vector(const PlantState& state) {
  auto code = [](RodLevel l) { return static_cast<double>(static_cast<int>(l)); };
  return {state.temperature, state.pressure, state.water_level, state.power,
          code(state.rods.security), code(state.rods.fuel), code(state.rods.sustain),
          code(state.rods.regulatory)};
}

PlantState state_from_features(const FeatureVector& f) {
  PlantState s;
  s.temperature = f[0];
  s.pressure = f[1];
  s.water_level = f[2];
  s.power = f[3];
  s.rods.security = rod_from_code(f[4], true);
  s.rods.fuel = rod_from_code(f[5], true);
  s.rods.sustain = rod_from_code(f[6], false);
  s.rods.regulatory = rod_from_code(f[7], false);
  return s;
}

bool FeatureBox::contains(const FeatureVector& x) const {
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (!(x[i] >= lo[i] && x[i] <= hi[i])) return false;
  }
  return true;
}

FeatureBox feature_box(const PlantConfig& config) {
  FeatureBox box;
  box.lo = {config.initial_temperature, config.initial_pressure, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  box.hi = {config.max_temperature, config.max_pressure, kMaxWaterLevel, kMaxPower, 2.0, 2.0, 2.0, 2.0};
  return box;
}

bool is_discrete_feature(std::size_t index) { return index >= feature_index(Feature::Security); }

std::vector<double> feature_levels(std::size_t index) {
  switch (static_cast<Feature>(index)) {
    case Feature::Security:
    case Feature::Fuel: return {0.0, 2.0};
    case Feature::Sustain:
    case Feature::Regulatory: return {0.0, 1.0, 2.0};
    default: return {};
  }
}

}  // namespace xaip::plant
