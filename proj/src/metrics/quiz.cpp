#include "xaip/metrics/quiz.hpp"

#include "xaip/metrics/information_power.hpp"

namespace xaip::metrics {

QuizScore score_quiz(const QuizAnswers& answers, const RuleCatalog& catalog) {
  QuizScore score;
  score.learned.assign(catalog.feature_count(), 0);
  for (const auto& q : catalog.quiz_items()) {
    if (q.kind == QuizKind::WhatIf) ++score.what_if_total;
  }
  for (const auto& [id, choice] : answers) {
    const QuizItem* item = catalog.find_item(id);
    if (item == nullptr) throw MetricError("unknown quiz item '" + id + "'");
    if (choice != item->correct) continue;
    if (item->kind == QuizKind::Rule) {
      ++score.learned[item->feature];
      ++score.rule_correct;
    } else {
      ++score.what_if_correct;
    }
  }
  return score;
}

}  // namespace xaip::metrics
