#pragma once

#include <optional>

#include "xaip/xai/explanation.hpp"

namespace xaip::xai {

/// Per-session advisor state around a shared, immutable tree: the used-node
/// ledger, the user model and the current step's suggestion.
class Advisor {
 public:
  Advisor(policy::TreePtr tree, XaiMode mode, UserModel user_model);

  /// Starts a new step; forgets the previous step's suggestion.
  void begin_step(int step);
  const Suggestion& what(const PlantState& state);
  /// Throws WhyBeforeWhat when no suggestion was given this step.
  Explanation why(const PlantState& state);
  /// Feeds the user's chosen action to the user model.
  void observe(const PlantState& state, Action action);

  int step() const { return step_; }
  XaiMode mode() const { return mode_; }
  const std::optional<Suggestion>& suggestion() const { return suggestion_; }
  const UsedNodeLedger& ledger() const { return ledger_; }
  const UserModel& user_model() const { return user_model_; }
  const DecisionTreePolicy& tree() const { return *tree_; }

 private:
  policy::TreePtr tree_;
  XaiMode mode_;
  UserModel user_model_;
  UsedNodeLedger ledger_;
  std::optional<Suggestion> suggestion_;
  int step_ = 0;
};

}  // namespace xaip::xai
