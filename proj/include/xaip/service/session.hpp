#pragma once

// One participant's live session: a command-driven state machine. Every
// command arrives as a JSON object ({"op": ...}) with a timestamp, and
// produces a JSON result plus one journal line, so a session can be rebuilt
// by feeding its journal back through apply().

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "xaip/metrics/catalog.hpp"
#include "xaip/metrics/quiz.hpp"
#include "xaip/plant/plant.hpp"
#include "xaip/policy/tree.hpp"
#include "xaip/xai/advisor.hpp"

namespace xaip::service {

using Millis = std::int64_t;

inline constexpr const char* kStateUpdateSchema = "xaip.state_update/1";
inline constexpr const char* kSuggestionSchema = "xaip.suggestion/1";
inline constexpr const char* kExplanationSchema = "xaip.explanation/1";
inline constexpr const char* kReportSchema = "xaip.report/1";
inline constexpr const char* kJournalSchema = "xaip.journal/1";

enum class Phase { Briefing, Running, Quiz, Done };
std::string_view phase_name(Phase p);

enum class ErrorCode {
  WrongPhase,
  UnknownSession,
  WhyBeforeWhat,
  DuplicateQuestion,
  InvalidAction,
  InvalidPayload,
  UnknownQuizItem,
};
std::string_view error_code_name(ErrorCode c);  // WRONG_PHASE, ...
int http_status(ErrorCode c);

class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(ErrorCode code, const std::string& message) : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }
  nlohmann::ordered_json to_json() const;

 private:
  ErrorCode code_;
};

/// Shared, read-only inputs of every session on a server.
struct SessionEnvironment {
  policy::TreePtr tree;
  std::shared_ptr<const metrics::RuleCatalog> catalog;
  plant::PlantConfig plant;
  double accuracy = 0.0;  // a_m reported with per-session information power
};

class Session {
 public:
  Session(std::string id, xai::XaiMode mode, std::shared_ptr<const SessionEnvironment> env, Millis created_at);

  /// Applies one command. Returns the result payload; throws ProtocolError
  /// after journaling the rejection. Ops: start, what, why, act {action},
  /// expire, quiz {answers, questionnaire}.
  nlohmann::ordered_json apply(const nlohmann::json& command, Millis now);

  /// True while running and the step deadline has passed.
  bool expired(Millis now) const { return phase_ == Phase::Running && now >= deadline_; }

  nlohmann::ordered_json state_update() const;
  nlohmann::ordered_json quiz_sheet() const;  // Quiz phase only
  nlohmann::ordered_json report() const;      // Done phase only

  const std::string& id() const { return id_; }
  Phase phase() const { return phase_; }
  xai::XaiMode mode() const { return advisor_.mode(); }
  const plant::PlantState& plant_state() const { return state_; }
  Millis deadline() const { return deadline_; }
  const xai::Advisor& advisor() const { return advisor_; }
  /// Journal lines so far, each a complete JSON document without newline.
  const std::vector<std::string>& journal() const { return journal_; }
  /// Journal lines not yet handed out by take_pending().
  std::vector<std::string> take_pending();

  /// Rebuilds a session from journal lines; the first line must be the
  /// session header. Throws FormatError on malformed or diverging lines.
  static Session replay(const std::vector<std::string>& lines, std::shared_ptr<const SessionEnvironment> env);

 private:
  nlohmann::ordered_json dispatch(const nlohmann::json& command, Millis now);
  nlohmann::ordered_json do_start(Millis now);
  nlohmann::ordered_json do_what();
  nlohmann::ordered_json do_why();
  nlohmann::ordered_json do_act(plant::Action action, bool automatic, Millis now);
  nlohmann::ordered_json do_quiz(const nlohmann::json& command);
  void require_phase(Phase expected, std::string_view op) const;
  void record(const nlohmann::json& command, Millis now, int step, const nlohmann::ordered_json& result);

  std::string id_;
  std::shared_ptr<const SessionEnvironment> env_;
  xai::Advisor advisor_;
  plant::PlantState state_;
  Phase phase_ = Phase::Briefing;
  Millis created_at_;
  Millis step_ms_;
  Millis deadline_ = 0;
  bool asked_what_ = false;
  bool asked_why_ = false;
  std::optional<plant::Action> last_action_;
  bool last_automatic_ = false;
  std::vector<plant::PlantEvent> last_events_;
  int what_requests_ = 0;
  int why_requests_ = 0;
  std::vector<std::uint64_t> interactions_;
  metrics::QuizAnswers answers_;
  std::map<std::string, int> questionnaire_;
  std::optional<metrics::QuizScore> score_;
  std::uint64_t seq_ = 0;
  std::vector<std::string> journal_;
  std::size_t pending_from_ = 0;
};

}  // namespace xaip::service
