#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "xaip/plant/plant.hpp"
#include "xaip/policy/tree.hpp"
#include "xaip/rng.hpp"

namespace xaip::policy {

using plant::PlantConfig;
using plant::PlantState;

using PolicyFn = std::function<Action(const PlantState&)>;

/// Hand-written reference operator: starts fission, drives power up with the
/// regulatory rods, refills the steam generator when it runs low and scrams
/// the reactor (security rods down) to cool it before the critical limits.
Action expert_action(const PlantState& state, const PlantConfig& config);

PolicyFn expert_policy(const PlantConfig& config);
/// Greedy tree policy; the tree must outlive the returned function.
PolicyFn tree_policy(const DecisionTreePolicy& tree);
/// Uniform over the 12 actions; the generator must outlive the function.
PolicyFn random_policy(Rng& rng);

struct EpisodeResult {
  double energy = 0.0;
  int steps = 0;
  bool damaged = false;
};

EpisodeResult run_episode(const PolicyFn& policy, const PlantConfig& config);
double mean_episode_energy(const PolicyFn& policy, const PlantConfig& config, int episodes);

/// States visited by the expert when a fraction `exploration` of its moves is
/// replaced by uniform random actions. Deterministic in `seed`.
std::vector<PlantState> sample_eval_states(const PlantConfig& config, int episodes, double exploration,
                                           std::uint64_t seed);

/// a_m: fraction of `eval_states` on which the tree's action equals the
/// reference action. Throws std::invalid_argument on an empty set.
double policy_accuracy(const DecisionTreePolicy& tree, const std::vector<PlantState>& eval_states,
                       const PolicyFn& reference);

/// Default a_m: agreement with the scripted expert on 20 episodes of states
/// sampled with 20% random moves (sampling seed 1).
double expert_agreement(const DecisionTreePolicy& tree, const PlantConfig& config);

}  // namespace xaip::policy
