#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "support/oracles.hpp"
#include "xaip/errors.hpp"
#include "xaip/plant/plant.hpp"
#include "xaip/plant/plant_io.hpp"

namespace {

using namespace xaip;
using namespace xaip::plant;

PlantState active_state(double water = 50.0) {
  PlantState s = new_plant(PlantConfig{});
  s.rods.fuel = RodLevel::Down;
  s.water_level = water;
  return s;
}

PlantState random_state(Rng& rng, const PlantConfig& c) {
  PlantState s;
  s.temperature = rng.uniform(c.initial_temperature, c.critical_temperature);
  s.pressure = rng.uniform(c.initial_pressure, c.critical_pressure);
  s.water_level = rng.uniform(0.0, 100.0);
  s.power = rng.uniform(0.0, 1000.0);
  s.rods.security = rng.bernoulli(0.5) ? RodLevel::Up : RodLevel::Down;
  s.rods.fuel = rng.bernoulli(0.5) ? RodLevel::Up : RodLevel::Down;
  s.rods.sustain = static_cast<RodLevel>(rng.below(3));
  s.rods.regulatory = static_cast<RodLevel>(rng.below(3));
  s.step_index = static_cast<int>(rng.below(static_cast<std::uint64_t>(c.episode_steps)));
  return s;
}

TEST(Actions, TwelveStableIds) {
  EXPECT_EQ(kActionCount, 12u);
  std::set<std::string_view> names;
  for (int id = 0; id < 12; ++id) {
    const Action a = action_from_id(id);
    EXPECT_EQ(action_id(a), id);
    EXPECT_EQ(action_from_name(action_name(a)), a);
    names.insert(action_name(a));
  }
  EXPECT_EQ(names.size(), 12u);
  EXPECT_EQ(action_id(Action::SecurityUp), 0);
  EXPECT_EQ(action_id(Action::Skip), 11);
  EXPECT_THROW(action_from_id(12), std::out_of_range);
  EXPECT_THROW(action_from_id(-1), std::out_of_range);
  EXPECT_FALSE(action_from_name("Scram").has_value());
}

TEST(NewPlant, DefaultInitialState) {
  const PlantConfig c;
  const auto s = new_plant(c);
  EXPECT_EQ(s.water_level, 100.0);
  EXPECT_EQ(s.power, 0.0);
  EXPECT_FALSE(s.damaged);
  EXPECT_EQ(s.temperature, 25.0);
  EXPECT_EQ(s.pressure, 1.0);
  EXPECT_EQ(s.step_index, 0);
  EXPECT_EQ(s.energy_total, 0.0);
  EXPECT_EQ(s.rods.security, RodLevel::Up);
  EXPECT_EQ(s.rods.fuel, RodLevel::Up);
  EXPECT_EQ(s.rods.sustain, RodLevel::Up);
  EXPECT_EQ(s.rods.regulatory, RodLevel::Up);
}

TEST(NewPlant, RateOrderingIsValidated) {
  PlantConfig c;
  c.rate_up = c.rate_medium;
  try {
    new_plant(c);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("rate_medium > rate_up"), std::string::npos);
  }
}

TEST(NewPlant, ThresholdsMustSitInsideClampRanges) {
  PlantConfig c;
  c.critical_temperature = c.max_temperature;
  EXPECT_THROW(new_plant(c), ConfigError);
  c = PlantConfig{};
  c.critical_pressure = c.initial_pressure;
  EXPECT_THROW(new_plant(c), ConfigError);
  c = PlantConfig{};
  c.episode_steps = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(FissionActive, PreconditionTable) {
  // Oracle: security Up, fuel Down, water above zero, not damaged.
  Rng rng(11);
  const PlantConfig c;
  for (int i = 0; i < 2000; ++i) {
    auto s = random_state(rng, c);
    if (rng.bernoulli(0.1)) s.water_level = 0.0;
    s.damaged = rng.bernoulli(0.1);
    const bool expected = s.rods.security == RodLevel::Up && s.rods.fuel == RodLevel::Down &&
                          s.water_level > 0.0 && !s.damaged;
    ASSERT_EQ(fission_active(s), expected);
  }
}

TEST(FissionActive, InitialPlantIsIdle) { EXPECT_FALSE(fission_active(new_plant(PlantConfig{}))); }

TEST(FissionActive, LoweredSecurityRodsStopFission) {
  auto s = active_state();
  s.rods.security = RodLevel::Down;
  EXPECT_FALSE(fission_active(s));
}

TEST(FissionActive, ActiveStateProducesEnergy) {
  auto s = active_state();
  s.power = 500.0;
  ASSERT_TRUE(fission_active(s));
  EXPECT_GT(apply_action(s, Action::Skip, PlantConfig{}).energy_produced, 0.0);
}

TEST(FissionActive, DamagedPlantIsIdle) {
  auto s = active_state();
  s.damaged = true;
  EXPECT_FALSE(fission_active(s));
}

TEST(ApplyAction, EnergyIsPowerOver360AtFullPower) {
  auto s = active_state();
  s.power = 1000.0;
  const auto out = apply_action(s, Action::Skip, PlantConfig{});
  EXPECT_NEAR(out.energy_produced, 1000.0 / 360.0, 1e-9);
  EXPECT_NEAR(out.energy_produced, 2.7777777777, 1e-9);
  EXPECT_NEAR(out.next_state.energy_total, out.energy_produced, 1e-12);
}

TEST(ApplyAction, LoweredSecurityRodsCool) {
  Rng rng(3);
  const PlantConfig c;
  for (int i = 0; i < 200; ++i) {
    auto s = random_state(rng, c);
    s.rods.security = RodLevel::Down;
    const auto out = apply_action(s, Action::Skip, c);
    EXPECT_EQ(out.energy_produced, 0.0);
    EXPECT_LE(out.next_state.temperature, s.temperature);
    EXPECT_LE(out.next_state.pressure, s.pressure);
    EXPECT_GE(out.next_state.temperature, c.initial_temperature);
    EXPECT_GE(out.next_state.pressure, c.initial_pressure);
    EXPECT_EQ(out.next_state.water_level, s.water_level);
  }
}

TEST(ApplyAction, LowerRegulatoryRodsAccelerateFission) {
  const PlantConfig c;
  auto s = active_state(60.0);
  s.rods.regulatory = RodLevel::Medium;
  s.temperature = 300.0;
  s.pressure = 100.0;
  s.power = 400.0;
  const auto down = apply_action(s, Action::RegulatoryDown, c).next_state;
  const auto up = apply_action(s, Action::RegulatoryUp, c).next_state;
  EXPECT_GT(down.temperature - s.temperature, up.temperature - s.temperature);
  EXPECT_GT(down.pressure - s.pressure, up.pressure - s.pressure);
  EXPECT_LT(down.water_level - s.water_level, up.water_level - s.water_level);
}

TEST(ApplyAction, AddWaterClampsAtFull) {
  auto s = new_plant(PlantConfig{});
  s.water_level = 95.0;
  EXPECT_EQ(apply_action(s, Action::AddWater, PlantConfig{}).next_state.water_level, 100.0);
}

TEST(ApplyAction, RunningDryDamagesOnTheFollowingActiveStep) {
  // Hand-derived two-step trajectory with the default constants:
  // step 1 runs at r_med: T 25+30, P 1+10, L 8-8 = 0, power 0+100-10 = 90.
  const PlantConfig c;
  auto s = active_state(c.rate_medium * c.water_consumption);
  s.rods.regulatory = RodLevel::Medium;
  const auto first = apply_action(s, Action::Skip, c);
  EXPECT_DOUBLE_EQ(first.next_state.water_level, 0.0);
  EXPECT_DOUBLE_EQ(first.next_state.temperature, 55.0);
  EXPECT_DOUBLE_EQ(first.next_state.pressure, 11.0);
  EXPECT_DOUBLE_EQ(first.next_state.power, 90.0);
  EXPECT_DOUBLE_EQ(first.energy_produced, 90.0 / 360.0);
  EXPECT_FALSE(first.next_state.damaged);

  const auto second = apply_action(first.next_state, Action::Skip, c);
  EXPECT_TRUE(second.next_state.damaged);
  EXPECT_EQ(second.energy_produced, 0.0);
  ASSERT_TRUE(second.primary_cause().has_value());
  EXPECT_EQ(*second.primary_cause(), DamageCause::DryGenerator);
  EXPECT_NE(std::find(second.events.begin(), second.events.end(), PlantEvent::DamageOccurred), second.events.end());
}

TEST(ApplyAction, DryGeneratorAvoidedByStoppingFission) {
  const PlantConfig c;
  auto s = active_state(0.0);
  const auto out = apply_action(s, Action::SecurityDown, c);
  EXPECT_FALSE(out.next_state.damaged);
}

TEST(ApplyAction, SimultaneousCausesReportTemperatureFirst) {
  const PlantConfig c;
  auto s = active_state();
  s.temperature = 890.0;
  s.pressure = 445.0;
  const auto out = apply_action(s, Action::RegulatoryDown, c);
  ASSERT_EQ(out.damage_causes.size(), 2u);
  EXPECT_EQ(out.damage_causes[0], DamageCause::Temperature);
  EXPECT_EQ(out.damage_causes[1], DamageCause::Pressure);
  EXPECT_EQ(*out.primary_cause(), DamageCause::Temperature);
  EXPECT_EQ(out.next_state.power, 0.0);
}

TEST(ApplyAction, TerminalStatesReject) {
  const PlantConfig c;
  auto s = new_plant(c);
  s.damaged = true;
  EXPECT_THROW(apply_action(s, Action::Skip, c), TerminalStateError);
  s.damaged = false;
  s.step_index = c.episode_steps;
  EXPECT_THROW(apply_action(s, Action::Skip, c), TerminalStateError);
}

TEST(ApplyAction, EventsOnStartAndLowWater) {
  const PlantConfig c;
  auto s = new_plant(c);
  s.water_level = 28.0;  // 28 - 0.5 * 8 = 24, below the warning level
  const auto out = apply_action(s, Action::FuelDown, c);
  EXPECT_NE(std::find(out.events.begin(), out.events.end(), PlantEvent::FissionStarted), out.events.end());
  EXPECT_NE(std::find(out.events.begin(), out.events.end(), PlantEvent::LowWaterWarning), out.events.end());
  const auto stop = apply_action(out.next_state, Action::SecurityDown, c);
  EXPECT_NE(std::find(stop.events.begin(), stop.events.end(), PlantEvent::FissionStopped), stop.events.end());
}

TEST(ApplyAction, RandomPairsStayInRangeAndRespectEnergyLaw) {
  Rng rng(5);
  const PlantConfig c;
  for (int i = 0; i < 10000; ++i) {
    const auto s = random_state(rng, c);
    const auto a = action_from_id(static_cast<int>(rng.below(kActionCount)));
    const auto out = apply_action(s, a, c);
    const auto& n = out.next_state;
    ASSERT_GE(n.temperature, c.initial_temperature);
    ASSERT_LE(n.temperature, c.max_temperature);
    ASSERT_GE(n.pressure, c.initial_pressure);
    ASSERT_LE(n.pressure, c.max_pressure);
    ASSERT_GE(n.water_level, 0.0);
    ASSERT_LE(n.water_level, 100.0);
    ASSERT_GE(n.power, 0.0);
    ASSERT_LE(n.power, 1000.0);
    ASSERT_GE(out.energy_produced, 0.0);
    ASSERT_EQ(n.step_index, s.step_index + 1);
    if (out.energy_produced > 0.0) {
      ASSERT_EQ(out.energy_produced, n.power / 360.0);
    }
    if (n.damaged) {
      ASSERT_EQ(out.energy_produced, 0.0);
    }
    const auto again = apply_action(s, a, c);
    ASSERT_EQ(again.next_state, n);
    ASSERT_EQ(again.energy_produced, out.energy_produced);
  }
}

TEST(Features, InitialEncoding) {
  const auto x = feature_vector(new_plant(PlantConfig{}));
  const FeatureVector expected{25.0, 1.0, 100.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  EXPECT_EQ(x, expected);
  EXPECT_EQ(kFeatureEncodingVersion, 1);
}

TEST(Features, RodCodes) {
  auto s = new_plant(PlantConfig{});
  s.rods.sustain = RodLevel::Medium;
  EXPECT_EQ(feature_vector(s)[6], 1.0);
  s.rods.fuel = RodLevel::Down;
  EXPECT_EQ(feature_vector(s)[5], 2.0);
  FeatureVector bad = feature_vector(s);
  bad[4] = 1.0;  // security has no medium level
  EXPECT_THROW(state_from_features(bad), std::invalid_argument);
}

TEST(Features, RoundTripRandomStates) {
  Rng rng(9);
  const PlantConfig c;
  for (int i = 0; i < 1000; ++i) {
    auto s = random_state(rng, c);
    s.step_index = 0;
    const auto back = state_from_features(feature_vector(s));
    EXPECT_EQ(feature_vector(back), feature_vector(s));
    EXPECT_EQ(back.rods.security, s.rods.security);
    EXPECT_EQ(back.rods.fuel, s.rods.fuel);
    EXPECT_EQ(back.rods.sustain, s.rods.sustain);
    EXPECT_EQ(back.rods.regulatory, s.rods.regulatory);
  }
}

TEST(PlantIo, ConfigRoundTripAndValidation) {
  PlantConfig c;
  c.refill_amount = 15.0;
  c.episode_steps = 40;
  const auto back = config_from_json(nlohmann::json::parse(config_to_json(c).dump()));
  EXPECT_EQ(back, c);
  EXPECT_THROW(config_from_json(nlohmann::json{{"no_such_key", 1}}), FormatError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"refill_amount", "lots"}}), FormatError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"schema", "xaip.plant_config/2"}}), FormatError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"rate_up", 2.0}}), ConfigError);
  EXPECT_EQ(config_from_json(nlohmann::json::object()), PlantConfig{});
}

TEST(PlantIo, BundledConfigMatchesDefaults) {
  EXPECT_EQ(load_plant_config(std::filesystem::path(XAIP_DATA_DIR) / "plant_default.json"), PlantConfig{});
}

TEST(PlantIo, StateSnapshotFieldOrder) {
  auto s = new_plant(PlantConfig{});
  s.rods.sustain = RodLevel::Medium;
  EXPECT_EQ(state_to_json(s).dump(),
            R"({"step":0,"temperature":25.0,"pressure":1.0,"water_level":100.0,"power":0.0,)"
            R"("rods":{"security":"up","fuel":"up","sustain":"medium","regulatory":"up"},)"
            R"("damaged":false,"energy_total":0.0})");
  const auto back = state_from_json(nlohmann::json::parse(state_to_json(s).dump()));
  EXPECT_EQ(back, s);
}

}  // namespace
