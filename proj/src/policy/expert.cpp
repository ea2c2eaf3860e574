#include "xaip/policy/expert.hpp"

#include <stdexcept>

namespace xaip::policy {

using plant::RodLevel;

Action expert_action(const PlantState& s, const PlantConfig& c) {
  const auto& rods = s.rods;
  const bool demanded = rods.security == RodLevel::Up && rods.fuel == RodLevel::Down;
  const double hot_t = c.critical_temperature - 2.0 * c.rate_medium * c.temperature_increment;
  const double hot_p = c.critical_pressure - 2.0 * c.rate_medium * c.pressure_increment;
  const double cool_t = c.initial_temperature + 0.5 * (c.critical_temperature - c.initial_temperature);
  const double cool_p = c.initial_pressure + 0.5 * (c.critical_pressure - c.initial_pressure);

  if (demanded && (s.temperature >= hot_t || s.pressure >= hot_p)) return Action::SecurityDown;
  if (rods.security == RodLevel::Down) {
    return (s.temperature <= cool_t && s.pressure <= cool_p) ? Action::SecurityUp : Action::Skip;
  }
  if (s.water_level <= c.low_water_threshold) return Action::AddWater;
  if (rods.fuel == RodLevel::Up) return Action::FuelDown;
  if (s.power < 0.9 * plant::kMaxPower) {
    if (rods.regulatory != RodLevel::Down) return Action::RegulatoryDown;
  } else if (rods.regulatory != RodLevel::Up) {
    return Action::RegulatoryUp;
  }
  if (rods.sustain != RodLevel::Down) return Action::SustainDown;
  return Action::Skip;
}

PolicyFn expert_policy(const PlantConfig& config) {
  return [config](const PlantState& s) { return expert_action(s, config); };
}

PolicyFn tree_policy(const DecisionTreePolicy& tree) {
  return [&tree](const PlantState& s) { return tree.best_action(plant::feature_vector(s)).first; };
}

PolicyFn random_policy(Rng& rng) {
  return [&rng](const PlantState&) { return static_cast<Action>(rng.below(kActionCount)); };
}

EpisodeResult run_episode(const PolicyFn& policy, const PlantConfig& config) {
  PlantState s = plant::new_plant(config);
  while (!plant::is_terminal(s, config)) {
    s = plant::apply_action(s, policy(s), config).next_state;
  }
  return {s.energy_total, s.step_index, s.damaged};
}

double mean_episode_energy(const PolicyFn& policy, const PlantConfig& config, int episodes) {
  if (episodes <= 0) throw std::invalid_argument("episodes must be positive");
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) total += run_episode(policy, config).energy;
  return total / episodes;
}

std::vector<PlantState> sample_eval_states(const PlantConfig& config, int episodes, double exploration,
                                           std::uint64_t seed) {
  Rng rng(seed);
  std::vector<PlantState> states;
  for (int e = 0; e < episodes; ++e) {
    PlantState s = plant::new_plant(config);
    while (!plant::is_terminal(s, config)) {
      states.push_back(s);
      const Action a = rng.bernoulli(exploration) ? static_cast<Action>(rng.below(kActionCount))
                                                  : expert_action(s, config);
      s = plant::apply_action(s, a, config).next_state;
    }
  }
  return states;
}

double policy_accuracy(const DecisionTreePolicy& tree, const std::vector<PlantState>& eval_states,
                       const PolicyFn& reference) {
  if (eval_states.empty()) throw std::invalid_argument("policy accuracy needs a non-empty evaluation set");
  std::size_t agree = 0;
  for (const auto& s : eval_states) {
    if (tree.best_action(plant::feature_vector(s)).first == reference(s)) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(eval_states.size());
}

double expert_agreement(const DecisionTreePolicy& tree, const PlantConfig& config) {
  return policy_accuracy(tree, sample_eval_states(config, 20, 0.2, 1), expert_policy(config));
}

}  // namespace xaip::policy
