#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "xaip/policy/tree.hpp"
#include "xaip/xai/user_model.hpp"

namespace xaip::xai {

using policy::DecisionTreePolicy;
using policy::DescentPath;
using policy::Direction;
using policy::NodeId;

enum class XaiMode : std::uint8_t { Classical, UserAware };

std::string_view mode_name(XaiMode mode);  // "classical" / "user-aware"
std::optional<XaiMode> mode_from_name(std::string_view name);

struct Suggestion {
  Action action = Action::Skip;
  DescentPath path;
  NodeId leaf = 0;
};

/// Thrown by classical selection when the fact path has no split (the tree
/// is a single leaf).
class NoExplainableSplit : public std::runtime_error {
 public:
  NoExplainableSplit() : std::runtime_error("no conditions were tested") {}
};

/// A why-question arrived without a what-answer in the same step.
class WhyBeforeWhat : public std::logic_error {
 public:
  WhyBeforeWhat() : std::logic_error("why asked before what in this step") {}
};

/// Node ids already used in explanations, with the step of last use.
class UsedNodeLedger {
 public:
  bool contains(NodeId id) const { return last_used_.count(id) != 0; }
  std::optional<int> last_used(NodeId id) const;
  void mark(NodeId id, int step) { last_used_[id] = step; }
  std::size_t size() const { return last_used_.size(); }
  const std::map<NodeId, int>& entries() const { return last_used_; }

 private:
  std::map<NodeId, int> last_used_;
};

struct Explanation {
  std::optional<NodeId> node;  // empty: no split was tested
  std::size_t feature = 0;
  double threshold = 0.0;
  Direction direction = Direction::LessEqual;
  XaiMode mode = XaiMode::Classical;  // strategy actually applied
  std::optional<Action> foil;
  std::string text;

  bool operator==(const Explanation&) const = default;
};

/// {node_id, feature, op, value, mode, foil, text}; split fields are null
/// when no condition was tested.
nlohmann::ordered_json explanation_to_json(const Explanation& e);
nlohmann::ordered_json suggestion_to_json(const Suggestion& s);

Suggestion answer_what(const DecisionTreePolicy& tree, const PlantState& state);

/// Shallowest on-path node not yet used; once all are used, the least
/// recently used one (ties to the shallowest).
NodeId select_node_classical(const DescentPath& path, const UsedNodeLedger& ledger);

/// Leaf recommending `foil` whose path leaves the fact path as deep as
/// possible; ties go to the smaller leaf id.
std::optional<NodeId> nearest_foil_leaf(const DecisionTreePolicy& tree, NodeId fact_leaf, Action foil);

/// The split where the fact and foil paths part ways.
NodeId select_node_user_aware(const DecisionTreePolicy& tree, NodeId fact_leaf, NodeId foil_leaf);

std::string_view feature_display_name(std::size_t feature);
std::string_view action_phrase(Action action);
std::string suggestion_text(Action action);
std::string format_value(double value);

/// "because <feature> is <op> <value><unit>". Contrastive explanations
/// append "that is why I would not <foil>".
std::string render_explanation(std::size_t feature, Direction direction, double threshold, XaiMode mode,
                               std::optional<Action> foil = std::nullopt);

/// Justifies `suggestion`. Updates the ledger with the selected node in both
/// modes. User-aware mode falls back to classical selection when the
/// predicted action equals the suggestion or no leaf recommends it.
Explanation answer_why(const DecisionTreePolicy& tree, const Suggestion& suggestion, const PlantState& state,
                       XaiMode mode, UsedNodeLedger& ledger, const UserModel& user_model, int step);

}  // namespace xaip::xai
