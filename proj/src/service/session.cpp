#include "xaip/service/session.hpp"

#include <fmt/format.h>

#include "xaip/errors.hpp"
#include "xaip/metrics/attribution.hpp"
#include "xaip/metrics/information_power.hpp"
#include "xaip/plant/plant_io.hpp"

namespace xaip::service {

using nlohmann::json;
using nlohmann::ordered_json;
using plant::Action;

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::Briefing: return "briefing";
    case Phase::Running: return "running";
    case Phase::Quiz: return "quiz";
    case Phase::Done: return "done";
  }
  return "?";
}

std::string_view error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::WrongPhase: return "WRONG_PHASE";
    case ErrorCode::UnknownSession: return "UNKNOWN_SESSION";
    case ErrorCode::WhyBeforeWhat: return "WHY_BEFORE_WHAT";
    case ErrorCode::DuplicateQuestion: return "DUPLICATE_QUESTION";
    case ErrorCode::InvalidAction: return "INVALID_ACTION";
    case ErrorCode::InvalidPayload: return "INVALID_PAYLOAD";
    case ErrorCode::UnknownQuizItem: return "UNKNOWN_QUIZ_ITEM";
  }
  return "?";
}

int http_status(ErrorCode c) {
  switch (c) {
    case ErrorCode::UnknownSession: return 404;
    case ErrorCode::WrongPhase:
    case ErrorCode::WhyBeforeWhat:
    case ErrorCode::DuplicateQuestion: return 409;
    default: return 400;
  }
}

ordered_json ProtocolError::to_json() const {
  return ordered_json{{"code", error_code_name(code_)}, {"message", what()}};
}

Session::Session(std::string id, xai::XaiMode mode, std::shared_ptr<const SessionEnvironment> env, Millis created_at)
    : id_(std::move(id)),
      env_(std::move(env)),
      advisor_(env_->tree, mode, xai::UserModel(plant::feature_box(env_->plant))),
      state_(plant::new_plant(env_->plant)),
      created_at_(created_at),
      step_ms_(static_cast<Millis>(env_->plant.step_seconds * 1000.0)),
      interactions_(plant::kFeatureCount, 0) {
  ordered_json header;
  header["schema"] = kJournalSchema;
  header["seq"] = seq_++;
  header["t"] = created_at;
  header["session_id"] = id_;
  header["mode"] = xai::mode_name(mode);
  header["step_ms"] = step_ms_;
  header["episode_steps"] = env_->plant.episode_steps;
  journal_.push_back(header.dump());
}

std::vector<std::string> Session::take_pending() {
  std::vector<std::string> out(journal_.begin() + static_cast<std::ptrdiff_t>(pending_from_), journal_.end());
  pending_from_ = journal_.size();
  return out;
}

void Session::require_phase(Phase expected, std::string_view op) const {
  if (phase_ != expected) {
    throw ProtocolError(ErrorCode::WrongPhase,
                        fmt::format("'{}' needs phase {}, session is in {}", op, phase_name(expected),
                                    phase_name(phase_)));
  }
}

void Session::record(const json& command, Millis now, int step, const ordered_json& result) {
  ordered_json line;
  line["seq"] = seq_++;
  line["t"] = now;
  line["step"] = step;
  line["command"] = command;
  line.update(result);
  journal_.push_back(line.dump());
}

ordered_json Session::apply(const json& command, Millis now) {
  const int step_before = state_.step_index;
  try {
    auto result = dispatch(command, now);
    record(command, now, step_before, ordered_json{{"result", result}});
    return result;
  } catch (const ProtocolError& e) {
    record(command, now, step_before, ordered_json{{"error", e.to_json()}});
    throw;
  }
}

ordered_json Session::dispatch(const json& command, Millis now) {
  if (!command.is_object() || !command.contains("op") || !command["op"].is_string()) {
    throw ProtocolError(ErrorCode::InvalidPayload, "command needs a string 'op'");
  }
  const auto op = command["op"].get<std::string>();
  if (op == "start") return do_start(now);
  if (op == "what") return do_what();
  if (op == "why") return do_why();
  if (op == "act") {
    require_phase(Phase::Running, op);
    const auto it = command.find("action");
    std::optional<Action> action;
    if (it != command.end() && it->is_string()) {
      action = plant::action_from_name(it->get<std::string>());
    } else if (it != command.end() && it->is_number_integer()) {
      const auto id = it->get<std::int64_t>();
      if (id >= 0 && id < static_cast<std::int64_t>(plant::kActionCount)) action = plant::action_from_id(static_cast<int>(id));
    }
    if (!action) {
      throw ProtocolError(ErrorCode::InvalidAction,
                          it == command.end() ? "missing 'action'" : fmt::format("unknown action {}", it->dump()));
    }
    return do_act(*action, false, now);
  }
  if (op == "expire") {
    require_phase(Phase::Running, op);
    if (now < deadline_) throw ProtocolError(ErrorCode::InvalidPayload, "step deadline not reached");
    return do_act(Action::Skip, true, now);
  }
  if (op == "quiz") return do_quiz(command);
  throw ProtocolError(ErrorCode::InvalidPayload, fmt::format("unknown op '{}'", op));
}

ordered_json Session::do_start(Millis now) {
  require_phase(Phase::Briefing, "start");
  phase_ = Phase::Running;
  deadline_ = now + step_ms_;
  advisor_.begin_step(state_.step_index);
  return state_update();
}

ordered_json Session::do_what() {
  require_phase(Phase::Running, "what");
  if (asked_what_) throw ProtocolError(ErrorCode::DuplicateQuestion, "what was already asked in this step");
  const auto& s = advisor_.what(state_);
  asked_what_ = true;
  ++what_requests_;
  ++interactions_[metrics::attribute_interaction({metrics::InteractionKind::WhatOnly, s.action, {}})];
  ordered_json j;
  j["schema"] = kSuggestionSchema;
  j["step"] = state_.step_index;
  j.update(xai::suggestion_to_json(s));
  return j;
}

ordered_json Session::do_why() {
  require_phase(Phase::Running, "why");
  if (!asked_what_) throw ProtocolError(ErrorCode::WhyBeforeWhat, "ask what before why in the same step");
  if (asked_why_) throw ProtocolError(ErrorCode::DuplicateQuestion, "why was already asked in this step");
  const auto e = advisor_.why(state_);
  asked_why_ = true;
  ++why_requests_;
  metrics::InteractionRecord interaction{metrics::InteractionKind::WhatWhy, advisor_.suggestion()->action, e};
  // The what-only credit given when the suggestion was shown moves to the
  // explained feature.
  ++interactions_[metrics::attribute_interaction(interaction)];
  --interactions_[metrics::attribute_interaction({metrics::InteractionKind::WhatOnly, interaction.suggested, {}})];
  ordered_json j;
  j["schema"] = kExplanationSchema;
  j["step"] = state_.step_index;
  j.update(xai::explanation_to_json(e));
  return j;
}

ordered_json Session::do_act(Action action, bool automatic, Millis now) {
  if (!automatic) advisor_.observe(state_, action);
  auto outcome = plant::apply_action(state_, action, env_->plant);
  state_ = outcome.next_state;
  last_action_ = action;
  last_automatic_ = automatic;
  last_events_ = outcome.events;
  asked_what_ = asked_why_ = false;
  if (plant::is_terminal(state_, env_->plant)) {
    phase_ = Phase::Quiz;
    deadline_ = 0;
  } else {
    deadline_ = automatic ? deadline_ + step_ms_ : now + step_ms_;
    advisor_.begin_step(state_.step_index);
  }
  return state_update();
}

ordered_json Session::do_quiz(const json& command) {
  require_phase(Phase::Quiz, "quiz");
  const auto& catalog = *env_->catalog;
  const auto answers = command.find("answers");
  if (answers == command.end() || !answers->is_object()) {
    throw ProtocolError(ErrorCode::InvalidPayload, "quiz needs an 'answers' object");
  }
  metrics::QuizAnswers parsed;
  for (const auto& [item_id, choice] : answers->items()) {
    const auto* item = catalog.find_item(item_id);
    if (!item) throw ProtocolError(ErrorCode::UnknownQuizItem, fmt::format("unknown quiz item '{}'", item_id));
    if (!choice.is_number_integer() || choice.get<std::int64_t>() < 0 ||
        choice.get<std::int64_t>() >= static_cast<std::int64_t>(item->choices.size())) {
      throw ProtocolError(ErrorCode::InvalidPayload, fmt::format("invalid choice for '{}'", item_id));
    }
    parsed[item_id] = choice.get<int>();
  }
  std::map<std::string, int> questionnaire;
  if (const auto q = command.find("questionnaire"); q != command.end()) {
    if (!q->is_object()) throw ProtocolError(ErrorCode::InvalidPayload, "'questionnaire' must be an object");
    for (const auto& [key, value] : q->items()) {
      if (!value.is_number_integer()) {
        throw ProtocolError(ErrorCode::InvalidPayload, fmt::format("questionnaire answer '{}' must be an integer", key));
      }
      questionnaire[key] = value.get<int>();
    }
  }
  score_ = metrics::score_quiz(parsed, catalog);
  answers_ = std::move(parsed);
  questionnaire_ = std::move(questionnaire);
  phase_ = Phase::Done;
  return ordered_json{{"phase", phase_name(phase_)}, {"answered", answers_.size()}};
}

ordered_json Session::state_update() const {
  ordered_json j;
  j["schema"] = kStateUpdateSchema;
  j["session_id"] = id_;
  j["phase"] = phase_name(phase_);
  j["step"] = state_.step_index;
  j["episode_steps"] = env_->plant.episode_steps;
  j["step_ms"] = step_ms_;
  j["deadline_ms"] = phase_ == Phase::Running ? ordered_json(deadline_) : ordered_json(nullptr);
  j["state"] = plant::state_to_json(state_);
  j["last_action"] = last_action_ ? ordered_json(plant::action_name(*last_action_)) : ordered_json(nullptr);
  j["auto_skip"] = last_automatic_;
  auto events = ordered_json::array();
  for (auto e : last_events_) events.push_back(plant::event_name(e));
  j["events"] = std::move(events);
  j["asked_what"] = asked_what_;
  j["asked_why"] = asked_why_;
  return j;
}

ordered_json Session::quiz_sheet() const {
  require_phase(Phase::Quiz, "quiz sheet");
  return metrics::quiz_sheet_json(*env_->catalog);
}

ordered_json Session::report() const {
  require_phase(Phase::Done, "report");
  const auto& catalog = *env_->catalog;
  ordered_json j;
  j["schema"] = kReportSchema;
  j["session_id"] = id_;
  j["mode"] = xai::mode_name(advisor_.mode());
  j["final_score"] = state_.energy_total;
  j["steps"] = state_.step_index;
  j["damaged"] = state_.damaged;
  j["what_requests"] = what_requests_;
  j["why_requests"] = why_requests_;
  ordered_json interactions;
  for (std::size_t f = 0; f < interactions_.size(); ++f) interactions[std::string(plant::feature_key(f))] = interactions_[f];
  j["interactions"] = std::move(interactions);
  j["rule_correct"] = score_->rule_correct;
  j["what_if_correct"] = score_->what_if_correct;
  j["what_if_total"] = score_->what_if_total;
  j["learned"] = score_->learned;
  j["accuracy"] = env_->accuracy;
  j["information_power"] = metrics::information_power_user(
      env_->accuracy, metrics::uniform_weights(catalog.feature_count()), score_->learned, catalog);
  j["questionnaire"] = questionnaire_;
  return j;
}

Session Session::replay(const std::vector<std::string>& lines, std::shared_ptr<const SessionEnvironment> env) {
  if (lines.empty()) throw FormatError("empty journal");
  json header;
  try {
    header = json::parse(lines.front());
  } catch (const json::parse_error& e) {
    throw FormatError(fmt::format("journal header: {}", e.what()));
  }
  if (header.value("schema", std::string()) != kJournalSchema) throw FormatError("not a session journal");
  const auto mode = xai::mode_from_name(header.value("mode", std::string()));
  if (!mode) throw FormatError("journal header names an unknown mode");
  Session session(header.at("session_id").get<std::string>(), *mode, std::move(env), header.at("t").get<Millis>());
  if (session.journal_.front() != lines.front()) throw FormatError("journal header does not match the environment");

  for (std::size_t i = 1; i < lines.size(); ++i) {
    json line;
    try {
      line = json::parse(lines[i]);
    } catch (const json::parse_error& e) {
      throw FormatError(fmt::format("journal line {}: {}", i, e.what()));
    }
    if (!line.contains("command") || !line.contains("t")) throw FormatError(fmt::format("journal line {} is not a command", i));
    try {
      session.apply(line["command"], line["t"].get<Millis>());
    } catch (const ProtocolError&) {
    }
    if (session.journal_.back() != lines[i]) throw FormatError(fmt::format("journal diverges at line {}", i));
  }
  session.pending_from_ = session.journal_.size();
  return session;
}

}  // namespace xaip::service
