#pragma once

// Conservative Q-Improvement: grows a decision-tree Q-function online.
//
// Every leaf holds Q values and, once it has seen enough visits, a set of
// candidate splits with per-side Q estimates. After each update the leaf's
// best candidate is scored by its visit-weighted gain in state value; the
// leaf is split only when that gain exceeds a threshold that decays on every
// step without a split and resets after one.

#include <cstdint>
#include <memory>
#include <vector>

#include <json.hpp>

#include "xaip/plant/plant.hpp"
#include "xaip/policy/tree.hpp"
#include "xaip/rng.hpp"

namespace xaip::policy {

inline constexpr const char* kCqiSchema = "xaip.cqi/1";

struct CqiHyperparams {
  double discount = 0.9;
  double learning_rate = 0.05;
  double split_threshold = 5.0;  // initial H_s
  double threshold_decay = 0.999;
  int candidate_thresholds = 9;  // per continuous feature, quantiles of observed values
  int max_depth = 8;
  int episodes = 5000;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double damage_penalty = 500.0;
  int leaf_sample_size = 200;  // reservoir size used to place continuous thresholds
  int min_side_visits = 10;    // both sides of a candidate need this many visits

  /// Throws ConfigError naming the violated range. Zero episodes is allowed
  /// and yields the untrained single-leaf tree.
  void validate() const;

  bool operator==(const CqiHyperparams&) const = default;
};

nlohmann::ordered_json hyperparams_to_json(const CqiHyperparams& hp);
/// Absent keys keep their defaults.
CqiHyperparams hyperparams_from_json(const nlohmann::json& doc);

class CqiTrainer {
 public:
  CqiTrainer(plant::PlantConfig config, CqiHyperparams hp, std::uint64_t seed);
  ~CqiTrainer();
  CqiTrainer(CqiTrainer&&) noexcept;
  CqiTrainer& operator=(CqiTrainer&&) noexcept;

  /// Runs up to `n` further episodes; the exploration schedule is laid out
  /// over hp.episodes in total.
  void run_episodes(int n);
  void run_to_completion();

  int episodes_done() const;
  std::size_t split_count() const;
  double current_threshold() const;

  /// Immutable policy built from the current tree.
  DecisionTreePolicy snapshot() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

DecisionTreePolicy train_cqi(const plant::PlantConfig& config, const CqiHyperparams& hp, std::uint64_t seed);

}  // namespace xaip::policy
