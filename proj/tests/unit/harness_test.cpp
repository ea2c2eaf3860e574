#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support/fixtures.hpp"
#include "xaip/errors.hpp"
#include "xaip/experiment/harness.hpp"
#include "xaip/policy/tree_io.hpp"

namespace {

using namespace xaip;
using namespace xaip::experiment;

struct Shared {
  policy::DecisionTreePolicy tree = policy::load_tree(test::data_dir() / "tree_default.json");
  metrics::RuleCatalog catalog = metrics::load_catalog(test::data_dir() / "rule_catalog.json");
};

const Shared& shared() {
  static const Shared s;
  return s;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SessionLog session(const SyntheticUserProfile& p, XaiMode mode = XaiMode::UserAware, std::uint64_t seed = 5) {
  return run_session(shared().tree, mode, p, plant::PlantConfig{}, shared().catalog, seed);
}

TEST(Profile, Validation) {
  SyntheticUserProfile p;
  EXPECT_NO_THROW(p.validate());
  p.ask_what = 1.5;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.p_explained = 0.01;
  EXPECT_THROW(p.validate(), ConfigError);
  EXPECT_THROW(profile_from_json({{"bogus", 1}}), ConfigError);
  EXPECT_THROW(profile_from_json({{"policy", "sleepy"}}), ConfigError);
  EXPECT_THROW(profile_from_json({{"ask_what", "often"}}), ConfigError);
}

TEST(Profile, JsonRoundTrip) {
  SyntheticUserProfile p;
  p.policy = UserPolicy::Imitator;
  p.ask_why = 0.25;
  p.idle = 0.1;
  const auto back = profile_from_json(nlohmann::json::parse(profile_to_json(p).dump()));
  EXPECT_EQ(back.policy, UserPolicy::Imitator);
  EXPECT_EQ(back.ask_why, 0.25);
  EXPECT_EQ(back.idle, 0.1);
}

TEST(Session, SilentRandomUserNeverAsks) {
  SyntheticUserProfile p;
  p.policy = UserPolicy::Random;
  p.ask_what = 0.0;
  p.ask_why = 0.0;
  const auto log = session(p);
  EXPECT_EQ(log.what_count(), 0u);
  EXPECT_EQ(log.why_count(), 0u);
  EXPECT_EQ(log.learner.what_requests, 0);
  for (auto n : log.learner.interactions) EXPECT_EQ(n, 0u);
  EXPECT_FALSE(log.steps.empty());
}

TEST(Session, SameSeedSameLog) {
  SyntheticUserProfile p;
  const auto a = session(p, XaiMode::UserAware, 11);
  const auto b = session(p, XaiMode::UserAware, 11);
  EXPECT_EQ(session_log_jsonl(a), session_log_jsonl(b));
  const auto c = session(p, XaiMode::UserAware, 12);
  EXPECT_NE(session_log_jsonl(a), session_log_jsonl(c));
}

TEST(Session, ImitatorPlaysEverySuggestion) {
  SyntheticUserProfile p;
  p.policy = UserPolicy::Imitator;
  p.ask_what = 1.0;
  p.ask_why = 0.5;
  p.idle = 0.2;
  const auto log = session(p);
  std::size_t followed = 0;
  for (const auto& s : log.steps) {
    if (s.auto_skip) {
      EXPECT_EQ(s.action, plant::Action::Skip);
      EXPECT_FALSE(s.suggestion);
      continue;
    }
    ASSERT_TRUE(s.suggestion);
    EXPECT_EQ(s.action, s.suggestion->action) << "step " << s.step;
    ++followed;
  }
  EXPECT_GT(followed, 0u);
}

TEST(Session, ImitatorMatchesGreedyTreeEnergy) {
  SyntheticUserProfile p;
  p.policy = UserPolicy::Imitator;
  p.ask_what = 1.0;
  const auto log = session(p);
  plant::PlantConfig config;
  auto s = plant::new_plant(config);
  while (!plant::is_terminal(s, config)) s = plant::apply_action(s, shared().tree.best_action(plant::feature_vector(s)).first, config).next_state;
  EXPECT_DOUBLE_EQ(log.learner.final_score, s.energy_total);
}

TEST(Session, ZeroLearningGivesZeroInformationPower) {
  SyntheticUserProfile p;
  p.p_base = 0.0;
  p.p_explained = 0.0;
  p.p_counterfactual_bonus = 0.0;
  const auto log = session(p);
  for (int n : log.learner.learned) EXPECT_EQ(n, 0);
  std::vector<metrics::LearnerRecord> one{log.learner};
  const auto report = metrics::build_ip_report(one, 0.9, metrics::uniform_weights(8), shared().catalog);
  EXPECT_EQ(report.aggregate, 0.0);
}

TEST(Session, CertainLearningCoversAttributedFeatures) {
  SyntheticUserProfile p;
  p.p_base = 1.0;
  p.p_explained = 1.0;
  p.ask_what = 1.0;
  const auto log = session(p);
  for (std::size_t j = 0; j < 8; ++j) {
    const int expected = static_cast<int>(std::min<std::uint64_t>(log.learner.interactions[j], 2));
    EXPECT_EQ(log.learner.learned[j], expected) << j;
  }
}

TEST(Session, WhyNeverExceedsWhatAndAttributionIsConsistent) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    SyntheticUserProfile p;
    p.idle = 0.1;
    const auto log = session(p, seed % 2 ? XaiMode::Classical : XaiMode::UserAware, seed);
    ASSERT_GE(log.what_count(), log.why_count());
    std::uint64_t attributed = 0;
    for (const auto& s : log.steps) {
      if (s.explanation) {
        ASSERT_TRUE(s.suggestion);
      }
      ASSERT_EQ(s.attributed_feature.has_value(), s.suggestion.has_value());
      if (s.learned_rule) {
        ASSERT_TRUE(s.attributed_feature);
      }
      attributed += s.attributed_feature.has_value();
    }
    std::uint64_t total = 0;
    for (auto n : log.learner.interactions) total += n;
    ASSERT_EQ(total, attributed);
    ASSERT_EQ(static_cast<std::size_t>(log.learner.what_requests), log.what_count());
  }
}

TEST(Session, IdleUserAutoSkipsEveryStep) {
  SyntheticUserProfile p;
  p.idle = 1.0;
  const auto log = session(p);
  for (const auto& s : log.steps) {
    EXPECT_TRUE(s.auto_skip);
    EXPECT_EQ(s.action, plant::Action::Skip);
  }
  EXPECT_EQ(log.what_count(), 0u);
}

TEST(Session, JsonlHasOneLinePerStepPlusSummary) {
  const auto log = session({});
  const auto text = session_log_jsonl(log);
  std::istringstream in(text);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    EXPECT_TRUE(nlohmann::json::accept(line));
    ++lines;
  }
  EXPECT_EQ(lines, log.steps.size() + 1);
}

// ---- experiments ------------------------------------------------------------------

ExperimentConfig small_config(int users = 6) {
  ExperimentConfig c = load_experiment_config(test::data_dir() / "experiment_fixture.json");
  c.users_per_arm = users;
  c.accuracy = 0.8;
  return c;
}

TEST(ExperimentConfig, LoadsFixtureAndResolvesPaths) {
  const auto c = load_experiment_config(test::data_dir() / "experiment_fixture.json");
  EXPECT_EQ(c.users_per_arm, 20);
  EXPECT_EQ(c.modes.size(), 2u);
  EXPECT_EQ(c.tree_path, test::data_dir() / "tree_default.json");
  EXPECT_EQ(c.profile.ask_what, 0.6);
}

TEST(ExperimentConfig, RejectsBadDocuments) {
  EXPECT_THROW(experiment_config_from_json({{"users_per_arm", 0}}), ConfigError);
  EXPECT_THROW(experiment_config_from_json({{"modes", nlohmann::json::array()}}), ConfigError);
  EXPECT_THROW(experiment_config_from_json({{"modes", {"classical", "classical"}}}), ConfigError);
  EXPECT_THROW(experiment_config_from_json({{"modes", {"psychic"}}}), ConfigError);
  EXPECT_THROW(experiment_config_from_json({{"weights", "heavy"}}), ConfigError);
  EXPECT_THROW(experiment_config_from_json({{"colour", "blue"}}), ConfigError);
  EXPECT_THROW(experiment_config_from_json({{"schema", "other/1"}}), ConfigError);
  EXPECT_THROW(experiment_config_from_json({{"accuracy", 2.0}}), ConfigError);
  EXPECT_THROW(experiment_config_from_json({{"users_per_arm", "many"}}), ConfigError);
  EXPECT_THROW(load_experiment_config("/nonexistent/x.json"), ConfigError);
}

TEST(Experiment, ArmsSharePairedSeeds) {
  const auto r = run_experiment(small_config(), shared().tree, shared().catalog);
  ASSERT_EQ(r.arms.size(), 2u);
  for (std::size_t u = 0; u < r.arms[0].logs.size(); ++u) {
    const auto& a = r.arms[0].logs[u];
    const auto& b = r.arms[1].logs[u];
    EXPECT_EQ(a.seed, b.seed);
    EXPECT_EQ(a.user_id, b.user_id);
    // Random draws do not depend on the mode, so only the explanations differ.
    ASSERT_EQ(a.steps.size(), b.steps.size());
    for (std::size_t k = 0; k < a.steps.size(); ++k) ASSERT_EQ(a.steps[k].action, b.steps[k].action);
  }
}

TEST(Experiment, ResultIndependentOfThreadCount) {
  auto c = small_config();
  c.threads = 1;
  const auto one = report_to_json(run_experiment(c, shared().tree, shared().catalog));
  c.threads = 4;
  const auto four = report_to_json(run_experiment(c, shared().tree, shared().catalog));
  EXPECT_EQ(one.dump(), four.dump());
}

TEST(Experiment, AttributionTablesSumToInteractions) {
  const auto r = run_experiment(small_config(), shared().tree, shared().catalog);
  for (const auto& arm : r.arms) {
    std::uint64_t table = 0, requests = 0;
    for (auto n : arm.attribution) table += n;
    for (const auto& l : arm.learners) requests += static_cast<std::uint64_t>(l.what_requests);
    EXPECT_EQ(table, requests);
    ASSERT_TRUE(arm.empirical_weights);
    EXPECT_GE(arm.ip.aggregate, 0.0);
    EXPECT_LE(arm.ip.aggregate, 1.0);
  }
}

TEST(Experiment, EmpiricalWeightsOption) {
  auto c = small_config();
  c.weights = WeightsMode::Empirical;
  const auto r = run_experiment(c, shared().tree, shared().catalog);
  for (const auto& arm : r.arms) EXPECT_DOUBLE_EQ(arm.ip.aggregate, *arm.ip_empirical);

  c.profile.ask_what = 0.0;
  EXPECT_THROW(run_experiment(c, shared().tree, shared().catalog), metrics::DegenerateWeights);
}

TEST(Experiment, WritesReportFiles) {
  const auto out = std::filesystem::temp_directory_path() / "xaip_harness_test";
  std::filesystem::remove_all(out);
  const auto r = run_experiment(small_config(3), shared().tree, shared().catalog);
  write_report(r, out);
  EXPECT_TRUE(std::filesystem::exists(out / "report.json"));
  EXPECT_TRUE(std::filesystem::exists(out / "logs" / "classical_u00.jsonl"));
  EXPECT_TRUE(std::filesystem::exists(out / "logs" / "user-aware_u02.jsonl"));
  const auto doc = nlohmann::json::parse(slurp(out / "report.json"));
  EXPECT_EQ(doc["schema"], kReportSchema);
  EXPECT_EQ(doc["arms"].size(), 2u);
  EXPECT_TRUE(doc.contains("ip_difference"));
  const auto csv = slurp(out / "summary.csv");
  EXPECT_EQ(csv.rfind("arm,user_id,ip", 0), 0u);
  std::filesystem::remove_all(out);
}

}  // namespace
