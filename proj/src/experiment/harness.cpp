#include "xaip/experiment/harness.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "xaip/errors.hpp"
#include "xaip/metrics/attribution.hpp"
#include "xaip/plant/plant_io.hpp"
#include "xaip/policy/expert.hpp"
#include "xaip/rng.hpp"
#include "xaip/xai/advisor.hpp"

namespace xaip::experiment {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kHabitStream = 7;

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(fmt::format("{} must be in [0, 1], got {}", name, p));
}

std::optional<UserPolicy> user_policy_from_name(std::string_view name) {
  for (auto p : {UserPolicy::Random, UserPolicy::Imitator, UserPolicy::ExplanationSensitiveLearner}) {
    if (user_policy_name(p) == name) return p;
  }
  return std::nullopt;
}

// Habitual action of a synthetic user in the coarse region of `state`.
Action habit_action(std::uint64_t habit_seed, const xai::UserModel::BinKey& bin) {
  std::uint64_t h = habit_seed;
  for (auto b : bin) h = Rng::mix(h, b);
  return plant::action_from_id(static_cast<int>(h % plant::kActionCount));
}

int guess(Rng& rng, const metrics::QuizItem& item) {
  return static_cast<int>(rng.below(item.choices.size()));
}

}  // namespace

std::string_view user_policy_name(UserPolicy p) {
  switch (p) {
    case UserPolicy::Random: return "random";
    case UserPolicy::Imitator: return "imitator";
    case UserPolicy::ExplanationSensitiveLearner: return "learner";
  }
  return "?";
}

void SyntheticUserProfile::validate() const {
  check_probability(ask_what, "ask_what");
  check_probability(ask_why, "ask_why");
  check_probability(p_base, "p_base");
  check_probability(p_explained, "p_explained");
  check_probability(p_counterfactual_bonus, "p_counterfactual_bonus");
  check_probability(habit, "habit");
  check_probability(follow_suggestion, "follow_suggestion");
  check_probability(idle, "idle");
  if (p_explained < p_base) throw ConfigError("p_explained must not be below p_base");
}

ordered_json profile_to_json(const SyntheticUserProfile& p) {
  return ordered_json{{"policy", user_policy_name(p.policy)},
                      {"ask_what", p.ask_what},
                      {"ask_why", p.ask_why},
                      {"p_base", p.p_base},
                      {"p_explained", p.p_explained},
                      {"p_counterfactual_bonus", p.p_counterfactual_bonus},
                      {"habit", p.habit},
                      {"follow_suggestion", p.follow_suggestion},
                      {"idle", p.idle}};
}

SyntheticUserProfile profile_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("profile must be an object");
  SyntheticUserProfile p;
  for (const auto& [key, value] : doc.items()) {
    if (key == "policy") {
      auto parsed = user_policy_from_name(value.get<std::string>());
      if (!parsed) throw ConfigError(fmt::format("unknown user policy '{}'", value.get<std::string>()));
      p.policy = *parsed;
      continue;
    }
    double* field = key == "ask_what"                 ? &p.ask_what
                    : key == "ask_why"                ? &p.ask_why
                    : key == "p_base"                 ? &p.p_base
                    : key == "p_explained"            ? &p.p_explained
                    : key == "p_counterfactual_bonus" ? &p.p_counterfactual_bonus
                    : key == "habit"                  ? &p.habit
                    : key == "follow_suggestion"      ? &p.follow_suggestion
                    : key == "idle"                   ? &p.idle
                                                      : nullptr;
    if (!field) throw ConfigError(fmt::format("unknown profile key '{}'", key));
    if (!value.is_number()) throw ConfigError(fmt::format("profile key '{}' must be a number", key));
    *field = value.get<double>();
  }
  p.validate();
  return p;
}

std::size_t SessionLog::what_count() const {
  return static_cast<std::size_t>(std::count_if(steps.begin(), steps.end(), [](const StepRecord& s) {
    return s.suggestion.has_value();
  }));
}

std::size_t SessionLog::why_count() const {
  return static_cast<std::size_t>(std::count_if(steps.begin(), steps.end(), [](const StepRecord& s) {
    return s.explanation.has_value();
  }));
}

SessionLog run_session(const policy::DecisionTreePolicy& tree, XaiMode mode, const SyntheticUserProfile& profile,
                       const PlantConfig& config, const metrics::RuleCatalog& catalog, std::uint64_t seed,
                       std::string user_id) {
  profile.validate();
  config.validate();
  if (catalog.feature_count() != plant::kFeatureCount) {
    throw ConfigError("rule catalog features do not match the plant features");
  }

  Rng rng(seed);
  const std::uint64_t habit_seed = Rng::mix(seed, kHabitStream);
  // Non-owning handle; the caller keeps the tree alive for the session.
  policy::TreePtr handle(policy::TreePtr{}, &tree);
  xai::Advisor advisor(handle, mode, xai::UserModel(plant::feature_box(config)));

  SessionLog log;
  log.user_id = std::move(user_id);
  log.mode = mode;
  log.seed = seed;

  metrics::LearnerRecord& rec = log.learner;
  rec.user_id = log.user_id;
  rec.learned.assign(catalog.feature_count(), 0);
  rec.interactions.assign(catalog.feature_count(), 0);
  std::vector<bool> known(catalog.rules().size(), false);

  auto learn_one = [&](std::size_t feature) -> std::optional<std::string> {
    const auto& rules = catalog.rules();
    for (std::size_t r = 0; r < rules.size(); ++r) {
      if (rules[r].feature == feature && !known[r]) {
        known[r] = true;
        ++rec.learned[feature];
        return rules[r].id;
      }
    }
    return std::nullopt;
  };

  const bool learner = profile.policy == UserPolicy::ExplanationSensitiveLearner;
  PlantState state = plant::new_plant(config);
  while (!plant::is_terminal(state, config)) {
    StepRecord rec_step;
    rec_step.step = state.step_index;
    rec_step.state = state;
    advisor.begin_step(state.step_index);

    Action intended;
    if (learner && rng.bernoulli(profile.habit)) {
      intended = habit_action(habit_seed, advisor.user_model().bin_of(state));
    } else {
      intended = plant::action_from_id(static_cast<int>(rng.below(plant::kActionCount)));
    }
    rec_step.intended = intended;

    Action action = intended;
    if (rng.bernoulli(profile.idle)) {
      action = Action::Skip;
      rec_step.auto_skip = true;
    } else {
      if (rng.bernoulli(profile.ask_what)) {
        rec_step.suggestion = advisor.what(state);
        ++rec.what_requests;
        metrics::InteractionRecord interaction{metrics::InteractionKind::WhatOnly, rec_step.suggestion->action, {}};
        if (rng.bernoulli(profile.ask_why)) {
          rec_step.explanation = advisor.why(state);
          ++rec.why_requests;
          interaction.kind = metrics::InteractionKind::WhatWhy;
          interaction.explanation = rec_step.explanation;
        }
        const std::size_t feature = metrics::attribute_interaction(interaction);
        rec_step.attributed_feature = feature;
        ++rec.interactions[feature];

        if (learner) {
          double p = rec_step.explanation ? profile.p_explained : profile.p_base;
          if (rec_step.explanation && rec_step.explanation->foil == intended) p += profile.p_counterfactual_bonus;
          if (rng.bernoulli(std::min(p, 1.0))) rec_step.learned_rule = learn_one(feature);
        }

        switch (profile.policy) {
          case UserPolicy::Random: break;
          case UserPolicy::Imitator: action = rec_step.suggestion->action; break;
          case UserPolicy::ExplanationSensitiveLearner:
            if (rng.bernoulli(profile.follow_suggestion)) action = rec_step.suggestion->action;
            break;
        }
      }
    }

    rec_step.action = action;
    if (!rec_step.auto_skip) advisor.observe(state, action);
    auto outcome = plant::apply_action(state, action, config);
    rec_step.energy = outcome.energy_produced;
    rec_step.events = outcome.events;
    log.steps.push_back(std::move(rec_step));
    state = outcome.next_state;
  }
  rec.final_score = state.energy_total;

  // Quiz: learned rules are answered correctly, everything else is a guess.
  for (const auto& item : catalog.quiz_items()) {
    bool knows = false;
    if (item.kind == metrics::QuizKind::Rule) {
      const auto& rules = catalog.rules();
      for (std::size_t r = 0; r < rules.size(); ++r) {
        if (rules[r].id == item.rule) knows = known[r];
      }
    } else {
      knows = rec.learned[item.feature] == catalog.rules_for(item.feature);
    }
    log.quiz_answers[item.id] = knows ? item.correct : guess(rng, item);
  }
  const auto score = metrics::score_quiz(log.quiz_answers, catalog);
  rec.rule_correct = score.rule_correct;
  rec.what_if_correct = score.what_if_correct;
  rec.what_if_total = score.what_if_total;
  return log;
}

std::string session_log_jsonl(const SessionLog& log) {
  std::string out;
  for (const auto& s : log.steps) {
    ordered_json j;
    j["type"] = "step";
    j["step"] = s.step;
    j["state"] = plant::state_to_json(s.state);
    j["intended"] = plant::action_name(s.intended);
    j["what"] = s.suggestion.has_value();
    j["suggestion"] = s.suggestion ? xai::suggestion_to_json(*s.suggestion) : ordered_json(nullptr);
    j["why"] = s.explanation.has_value();
    j["explanation"] = s.explanation ? xai::explanation_to_json(*s.explanation) : ordered_json(nullptr);
    j["attributed_feature"] =
        s.attributed_feature ? ordered_json(plant::feature_key(*s.attributed_feature)) : ordered_json(nullptr);
    j["learned_rule"] = s.learned_rule ? ordered_json(*s.learned_rule) : ordered_json(nullptr);
    j["action"] = plant::action_name(s.action);
    j["action_id"] = plant::action_id(s.action);
    j["auto_skip"] = s.auto_skip;
    j["energy"] = s.energy;
    auto events = ordered_json::array();
    for (auto e : s.events) events.push_back(plant::event_name(e));
    j["events"] = std::move(events);
    out += j.dump();
    out += '\n';
  }
  ordered_json summary;
  summary["type"] = "summary";
  summary["user_id"] = log.user_id;
  summary["mode"] = xai::mode_name(log.mode);
  summary["seed"] = log.seed;
  summary["steps"] = log.steps.size();
  summary["learner"] = metrics::learner_to_json(log.learner);
  summary["quiz"] = log.quiz_answers;
  out += summary.dump();
  out += '\n';
  return out;
}

void ExperimentConfig::validate() const {
  if (users_per_arm < 1) throw ConfigError("users_per_arm must be at least 1");
  if (modes.empty()) throw ConfigError("at least one arm (mode) is required");
  for (std::size_t i = 0; i < modes.size(); ++i) {
    for (std::size_t k = i + 1; k < modes.size(); ++k) {
      if (modes[i] == modes[k]) throw ConfigError("duplicate arm mode");
    }
  }
  if (accuracy && !(*accuracy >= 0.0 && *accuracy <= 1.0)) throw ConfigError("accuracy must be in [0, 1]");
  if (threads < 0) throw ConfigError("threads must be non-negative");
  profile.validate();
  plant.validate();
}

ExperimentConfig experiment_config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("experiment config must be a JSON object");
  if (doc.value("schema", std::string(kExperimentSchema)) != kExperimentSchema) {
    throw ConfigError(fmt::format("unsupported experiment schema '{}'", doc.value("schema", std::string())));
  }
  ExperimentConfig c;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "schema") continue;
      if (key == "users_per_arm") c.users_per_arm = value.get<int>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "threads") c.threads = value.get<int>();
      else if (key == "accuracy") c.accuracy = value.is_null() ? std::nullopt : std::optional<double>(value.get<double>());
      else if (key == "profile") c.profile = profile_from_json(value);
      else if (key == "plant") c.plant = plant::config_from_json(value);
      else if (key == "tree") c.tree_path = resolve(value.get<std::string>());
      else if (key == "catalog") c.catalog_path = resolve(value.get<std::string>());
      else if (key == "weights") {
        const auto w = value.get<std::string>();
        if (w == "uniform") c.weights = WeightsMode::Uniform;
        else if (w == "empirical") c.weights = WeightsMode::Empirical;
        else throw ConfigError(fmt::format("unknown weights mode '{}'", w));
      } else if (key == "modes") {
        c.modes.clear();
        for (const auto& m : value) {
          auto mode = xai::mode_from_name(m.get<std::string>());
          if (!mode) throw ConfigError(fmt::format("unknown mode '{}'", m.get<std::string>()));
          c.modes.push_back(*mode);
        }
      } else {
        throw ConfigError(fmt::format("unknown experiment key '{}'", key));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("malformed experiment config: {}", e.what()));
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open experiment config {}", path.string()));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return experiment_config_from_json(doc, path.parent_path());
}

ordered_json experiment_config_to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["schema"] = kExperimentSchema;
  j["users_per_arm"] = c.users_per_arm;
  auto modes = ordered_json::array();
  for (auto m : c.modes) modes.push_back(xai::mode_name(m));
  j["modes"] = std::move(modes);
  j["seed"] = c.seed;
  j["weights"] = c.weights == WeightsMode::Uniform ? "uniform" : "empirical";
  j["accuracy"] = c.accuracy ? ordered_json(*c.accuracy) : ordered_json(nullptr);
  j["profile"] = profile_to_json(c.profile);
  j["plant"] = plant::config_to_json(c.plant);
  return j;
}

double default_accuracy(const policy::DecisionTreePolicy& tree, const PlantConfig& config) {
  return policy::expert_agreement(tree, config);
}

ExperimentReport run_experiment(const ExperimentConfig& config, const policy::DecisionTreePolicy& tree,
                                const metrics::RuleCatalog& catalog) {
  config.validate();
  ExperimentReport report;
  report.config = config;
  report.accuracy = config.accuracy ? *config.accuracy : default_accuracy(tree, config.plant);

  const std::size_t users = static_cast<std::size_t>(config.users_per_arm);
  const std::size_t jobs = users * config.modes.size();
  std::vector<SessionLog> logs(jobs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) {
      const std::size_t arm = job / users, user = job % users;
      try {
        logs[job] = run_session(tree, config.modes[arm], config.profile, config.plant, catalog,
                                Rng::mix(config.seed, user), fmt::format("u{:02}", user));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::size_t threads = config.threads > 0 ? static_cast<std::size_t>(config.threads)
                                           : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, jobs);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  for (std::size_t arm = 0; arm < config.modes.size(); ++arm) {
    ArmResult result;
    result.mode = config.modes[arm];
    for (std::size_t u = 0; u < users; ++u) {
      result.learners.push_back(logs[arm * users + u].learner);
      result.logs.push_back(std::move(logs[arm * users + u]));
    }
    result.attribution = metrics::pooled_interactions(result.learners, catalog.feature_count());
    try {
      result.empirical_weights = metrics::empirical_weights(result.attribution);
    } catch (const metrics::DegenerateWeights&) {
    }
    if (result.empirical_weights) {
      result.ip_empirical = metrics::build_ip_report(result.learners, report.accuracy, *result.empirical_weights,
                                                     catalog).aggregate;
    }
    if (config.weights == WeightsMode::Empirical) {
      if (!result.empirical_weights) throw metrics::DegenerateWeights();
      result.ip = metrics::build_ip_report(result.learners, report.accuracy, *result.empirical_weights, catalog);
    } else {
      result.ip = metrics::build_ip_report(result.learners, report.accuracy,
                                           metrics::uniform_weights(catalog.feature_count()), catalog);
    }
    report.arms.push_back(std::move(result));
  }
  return report;
}

namespace {

double mean_of(const std::vector<metrics::LearnerRecord>& v, double (*f)(const metrics::LearnerRecord&)) {
  double s = 0.0;
  for (const auto& r : v) s += f(r);
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

ordered_json report_to_json(const ExperimentReport& report) {
  ordered_json j;
  j["schema"] = kReportSchema;
  j["config"] = experiment_config_to_json(report.config);
  j["accuracy"] = report.accuracy;
  auto arms = ordered_json::array();
  for (const auto& arm : report.arms) {
    ordered_json a;
    a["mode"] = xai::mode_name(arm.mode);
    a["ip"] = metrics::ip_report_to_json(arm.ip);
    a["ip_empirical"] = arm.ip_empirical ? ordered_json(*arm.ip_empirical) : ordered_json(nullptr);
    a["empirical_weights"] =
        arm.empirical_weights ? ordered_json(arm.empirical_weights->values()) : ordered_json(nullptr);
    ordered_json attribution;
    for (std::size_t f = 0; f < arm.attribution.size(); ++f) attribution[std::string(plant::feature_key(f))] = arm.attribution[f];
    a["attribution"] = std::move(attribution);
    ordered_json summary;
    summary["mean_final_score"] = mean_of(arm.learners, [](const metrics::LearnerRecord& r) { return r.final_score; });
    summary["mean_rule_correct"] =
        mean_of(arm.learners, [](const metrics::LearnerRecord& r) { return static_cast<double>(r.rule_correct); });
    summary["mean_what_if_correct"] =
        mean_of(arm.learners, [](const metrics::LearnerRecord& r) { return static_cast<double>(r.what_if_correct); });
    summary["mean_rules_learned"] = mean_of(arm.learners, [](const metrics::LearnerRecord& r) {
      double s = 0.0;
      for (int n : r.learned) s += n;
      return s;
    });
    summary["mean_what_requests"] =
        mean_of(arm.learners, [](const metrics::LearnerRecord& r) { return static_cast<double>(r.what_requests); });
    summary["mean_why_requests"] =
        mean_of(arm.learners, [](const metrics::LearnerRecord& r) { return static_cast<double>(r.why_requests); });
    a["summary"] = std::move(summary);
    auto users = ordered_json::array();
    for (const auto& r : arm.learners) users.push_back(metrics::learner_to_json(r));
    a["users"] = std::move(users);
    arms.push_back(std::move(a));
  }
  j["arms"] = std::move(arms);
  if (report.arms.size() == 2) {
    j["ip_difference"] = ordered_json{
        {"minuend", xai::mode_name(report.arms[1].mode)},
        {"subtrahend", xai::mode_name(report.arms[0].mode)},
        {"value", report.arms[1].ip.aggregate - report.arms[0].ip.aggregate}};
  }
  return j;
}

std::string report_csv(const ExperimentReport& report) {
  std::string out;
  bool header_done = false;
  for (const auto& arm : report.arms) {
    const std::string body = metrics::ip_report_csv(arm.ip, arm.learners);
    std::size_t start = 0;
    bool first = true;
    while (start < body.size()) {
      std::size_t end = body.find('\n', start);
      if (end == std::string::npos) end = body.size();
      const std::string line = body.substr(start, end - start);
      if (first) {
        if (!header_done) out += "arm," + line + "\n";
        header_done = true;
        first = false;
      } else {
        out += std::string(xai::mode_name(arm.mode)) + "," + line + "\n";
      }
      start = end + 1;
    }
  }
  return out;
}

void write_report(const ExperimentReport& report, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "logs");
  auto write = [](const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    out << text;
  };
  write(out_dir / "report.json", report_to_json(report).dump(2) + "\n");
  write(out_dir / "summary.csv", report_csv(report));
  for (const auto& arm : report.arms) {
    for (const auto& log : arm.logs) {
      write(out_dir / "logs" / fmt::format("{}_{}.jsonl", xai::mode_name(arm.mode), log.user_id),
            session_log_jsonl(log));
    }
  }
}

}  // namespace xaip::experiment
