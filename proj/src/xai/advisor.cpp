#include "xaip/xai/advisor.hpp"

#include <stdexcept>

namespace xaip::xai {

Advisor::Advisor(policy::TreePtr tree, XaiMode mode, UserModel user_model)
    : tree_(std::move(tree)), mode_(mode), user_model_(std::move(user_model)) {
  if (!tree_) throw std::invalid_argument("advisor needs a tree");
}

void Advisor::begin_step(int step) {
  step_ = step;
  suggestion_.reset();
}

const Suggestion& Advisor::what(const PlantState& state) {
  suggestion_ = answer_what(*tree_, state);
  return *suggestion_;
}

Explanation Advisor::why(const PlantState& state) {
  if (!suggestion_) throw WhyBeforeWhat();
  return answer_why(*tree_, *suggestion_, state, mode_, ledger_, user_model_, step_);
}

void Advisor::observe(const PlantState& state, Action action) { user_model_.observe(state, action); }

}  // namespace xaip::xai
