#pragma once

// Headless sessions with synthetic users, and paired-seed experiments
// comparing explanation-selection strategies by information power.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "xaip/metrics/catalog.hpp"
#include "xaip/metrics/quiz.hpp"
#include "xaip/metrics/report.hpp"
#include "xaip/plant/plant.hpp"
#include "xaip/policy/tree.hpp"
#include "xaip/xai/explanation.hpp"

namespace xaip::experiment {

using plant::Action;
using plant::PlantConfig;
using plant::PlantState;
using xai::XaiMode;

inline constexpr const char* kExperimentSchema = "xaip.experiment/1";
inline constexpr const char* kReportSchema = "xaip.experiment_report/1";

enum class UserPolicy { Random, Imitator, ExplanationSensitiveLearner };

std::string_view user_policy_name(UserPolicy p);

struct SyntheticUserProfile {
  UserPolicy policy = UserPolicy::ExplanationSensitiveLearner;
  double ask_what = 0.5;  // per step
  double ask_why = 0.5;   // given a what-answer in the same step
  // Rule acquisition per attributed interaction.
  double p_base = 0.05;
  double p_explained = 0.15;
  double p_counterfactual_bonus = 0.3;  // when the explanation's foil is the action the user was about to take
  // Learner behaviour: how often it plays its own habitual action and how
  // often it follows a suggestion it asked for.
  double habit = 0.8;
  double follow_suggestion = 0.5;
  double idle = 0.0;  // chance of letting the step timer expire

  /// Throws ConfigError for probabilities outside [0, 1] or p_explained < p_base.
  void validate() const;
};

nlohmann::ordered_json profile_to_json(const SyntheticUserProfile& p);
SyntheticUserProfile profile_from_json(const nlohmann::json& doc);

struct StepRecord {
  int step = 0;
  PlantState state;  // before the action
  Action action = Action::Skip;
  bool auto_skip = false;
  Action intended = Action::Skip;
  std::optional<xai::Suggestion> suggestion;
  std::optional<xai::Explanation> explanation;
  std::optional<std::size_t> attributed_feature;
  std::optional<std::string> learned_rule;
  double energy = 0.0;
  std::vector<plant::PlantEvent> events;
};

struct SessionLog {
  std::string user_id;
  XaiMode mode = XaiMode::Classical;
  std::uint64_t seed = 0;
  std::vector<StepRecord> steps;
  metrics::QuizAnswers quiz_answers;
  metrics::LearnerRecord learner;

  std::size_t what_count() const;
  std::size_t why_count() const;
};

/// One JSON object per step followed by a summary object.
std::string session_log_jsonl(const SessionLog& log);

SessionLog run_session(const policy::DecisionTreePolicy& tree, XaiMode mode, const SyntheticUserProfile& profile,
                       const PlantConfig& config, const metrics::RuleCatalog& catalog, std::uint64_t seed,
                       std::string user_id = "u0");

enum class WeightsMode { Uniform, Empirical };

struct ExperimentConfig {
  int users_per_arm = 20;
  std::vector<XaiMode> modes{XaiMode::Classical, XaiMode::UserAware};
  SyntheticUserProfile profile;
  std::uint64_t seed = 2023;
  WeightsMode weights = WeightsMode::Uniform;
  std::optional<double> accuracy;  // a_m override; default: agreement with the scripted expert
  PlantConfig plant;
  int threads = 0;  // 0: hardware concurrency
  // Resolved relative to the config file when loaded from disk.
  std::filesystem::path tree_path;
  std::filesystem::path catalog_path;

  void validate() const;
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
nlohmann::ordered_json experiment_config_to_json(const ExperimentConfig& config);

struct ArmResult {
  XaiMode mode = XaiMode::Classical;
  std::vector<metrics::LearnerRecord> learners;
  metrics::IPReport ip;
  std::vector<std::uint64_t> attribution;  // pooled interactions per feature
  std::optional<metrics::WeightVector> empirical_weights;
  std::optional<double> ip_empirical;
  std::vector<SessionLog> logs;
};

struct ExperimentReport {
  ExperimentConfig config;
  double accuracy = 0.0;
  std::vector<ArmResult> arms;
};

/// Sessions of user i share seed mix(config.seed, i) across arms. Results are
/// merged by user index regardless of completion order.
ExperimentReport run_experiment(const ExperimentConfig& config, const policy::DecisionTreePolicy& tree,
                                const metrics::RuleCatalog& catalog);

double default_accuracy(const policy::DecisionTreePolicy& tree, const PlantConfig& config);

nlohmann::ordered_json report_to_json(const ExperimentReport& report);
std::string report_csv(const ExperimentReport& report);
/// Writes report.json, summary.csv and logs/<mode>_<user>.jsonl under `out_dir`.
void write_report(const ExperimentReport& report, const std::filesystem::path& out_dir);

}  // namespace xaip::experiment
