#pragma once

// Step-based simulation of the pressurized-water-reactor management task.
//
// Each step applies the user's action (rod move, water refill or skip) and
// then updates temperature, pressure, water level and power according to the
// rod settings. Damage is absorbing and ends the episode.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace xaip::plant {

enum class RodLevel : std::uint8_t { Up = 0, Medium = 1, Down = 2 };

struct RodBank {
  RodLevel security = RodLevel::Up;  // two-level
  RodLevel fuel = RodLevel::Up;      // two-level
  RodLevel sustain = RodLevel::Up;
  RodLevel regulatory = RodLevel::Up;

  bool operator==(const RodBank&) const = default;
};

enum class Action : std::uint8_t {
  SecurityUp = 0,
  SecurityDown,
  FuelUp,
  FuelDown,
  SustainUp,
  SustainMedium,
  SustainDown,
  RegulatoryUp,
  RegulatoryMedium,
  RegulatoryDown,
  AddWater,
  Skip,
};

inline constexpr std::size_t kActionCount = 12;

constexpr int action_id(Action a) { return static_cast<int>(a); }
/// Throws std::out_of_range for ids outside 0..11.
Action action_from_id(int id);
std::string_view action_name(Action a);
std::optional<Action> action_from_name(std::string_view name);

inline constexpr double kMaxPower = 1000.0;  // MW
inline constexpr double kMaxWaterLevel = 100.0;
// Energy per step is power / 360: a 1000 MW plant over 10 s.
inline constexpr double kEnergyDivisor = 360.0;

struct PlantState {
  double temperature = 0.0;  // °C
  double pressure = 0.0;     // bar
  double water_level = 0.0;  // %
  double power = 0.0;        // MW
  RodBank rods;
  int step_index = 0;
  bool damaged = false;
  double energy_total = 0.0;

  bool operator==(const PlantState&) const = default;
};

enum class PlantEvent : std::uint8_t { FissionStarted, FissionStopped, DamageOccurred, LowWaterWarning };
enum class DamageCause : std::uint8_t { Temperature, Pressure, DryGenerator };

std::string_view event_name(PlantEvent e);
std::string_view damage_cause_name(DamageCause c);

struct StepOutcome {
  PlantState next_state;
  double energy_produced = 0.0;
  std::vector<PlantEvent> events;
  // All causes that fired this step, in check order (temperature first).
  std::vector<DamageCause> damage_causes;

  std::optional<DamageCause> primary_cause() const {
    if (damage_causes.empty()) return std::nullopt;
    return damage_causes.front();
  }
};

struct PlantConfig {
  double initial_temperature = 25.0;
  double initial_pressure = 1.0;
  double initial_water_level = 100.0;
  double max_temperature = 1000.0;  // clamping cap
  double max_pressure = 500.0;      // clamping cap

  double temperature_increment = 30.0;  // k_T
  double pressure_increment = 10.0;     // k_P
  double water_consumption = 8.0;       // k_L
  double power_increment = 100.0;       // k_pow

  // Fission-rate multipliers by regulatory rod level; lower rods run faster.
  double rate_up = 0.5;
  double rate_medium = 1.0;
  double rate_down = 1.5;

  // Fuel de-potentiation per step by sustain rod level (MW/step).
  double depletion_up = 10.0;
  double depletion_medium = 6.0;
  double depletion_down = 3.0;

  double critical_temperature = 900.0;
  double critical_pressure = 450.0;
  double refill_amount = 20.0;
  // Fraction of the excess over the initial value lost per idle step.
  double cooling_factor = 0.2;
  double step_seconds = 10.0;
  int episode_steps = 60;
  double low_water_threshold = 25.0;

  /// Throws ConfigError naming the first violated bound.
  void validate() const;

  double rate_for(RodLevel regulatory) const;
  double depletion_for(RodLevel sustain) const;

  bool operator==(const PlantConfig&) const = default;
};

/// Initial state: all rods up, full steam generator, zero power.
PlantState new_plant(const PlantConfig& config);

/// Fission runs iff security rods are up, fuel rods are down, the steam
/// generator holds water and the plant is intact.
bool fission_active(const PlantState& state);

/// True when no further action may be applied.
bool is_terminal(const PlantState& state, const PlantConfig& config);

/// Pure transition function. Throws TerminalStateError on damaged or
/// finished episodes.
StepOutcome apply_action(const PlantState& state, Action action, const PlantConfig& config);

// Feature encoding, version 1:
//   [temperature, pressure, water_level, power, security, fuel, sustain, regulatory]
// with rod levels Up=0, Medium=1, Down=2.
inline constexpr int kFeatureEncodingVersion = 1;
inline constexpr std::size_t kFeatureCount = 8;
using FeatureVector = std::array<double, kFeatureCount>;

enum class Feature : std::uint8_t {
  Temperature = 0,
  Pressure,
  WaterLevel,
  Power,
  Security,
  Fuel,
  Sustain,
  Regulatory,
};

constexpr std::size_t feature_index(Feature f) { return static_cast<std::size_t>(f); }
std::string_view feature_key(std::size_t index);

FeatureVector feature_vector(const PlantState& state);
/// Inverse of feature_vector for the encoded fields; lifecycle fields are
/// left at their defaults. Throws std::invalid_argument on non-level rod codes.
PlantState state_from_features(const FeatureVector& features);

/// Closed per-feature ranges reachable under a config.
struct FeatureBox {
  FeatureVector lo{};
  FeatureVector hi{};

  bool contains(const FeatureVector& x) const;
};

FeatureBox feature_box(const PlantConfig& config);

/// True for the rod features, whose values are discrete levels.
bool is_discrete_feature(std::size_t index);
/// Levels a discrete feature may hold (security/fuel: {0,2}).
std::vector<double> feature_levels(std::size_t index);

}  // namespace xaip::plant
