#pragma once

#include <map>
#include <string>
#include <vector>

#include "xaip/metrics/catalog.hpp"

namespace xaip::metrics {

/// Item id -> chosen choice index.
using QuizAnswers = std::map<std::string, int>;

struct QuizScore {
  std::vector<int> learned;  // n_j^lr per feature, from rule items
  int rule_correct = 0;
  int what_if_correct = 0;  // kept out of the IP formula
  int what_if_total = 0;
};

/// Throws MetricError for item ids missing from the catalog.
QuizScore score_quiz(const QuizAnswers& answers, const RuleCatalog& catalog);

}  // namespace xaip::metrics
