#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "xaip/metrics/information_power.hpp"
#include "xaip/metrics/quiz.hpp"

namespace xaip::metrics {

/// Everything measured for one participant.
struct LearnerRecord {
  std::string user_id;
  std::vector<int> learned;                 // n_j^lr(i) per feature
  std::vector<std::uint64_t> interactions;  // attributed interactions per feature
  int rule_correct = 0;                     // rule items answered correctly
  int what_if_correct = 0;                  // what-if items answered correctly
  int what_if_total = 0;
  double final_score = 0.0;                 // energy produced
  int what_requests = 0;
  int why_requests = 0;
  std::map<std::string, int> questionnaire;  // Likert answers, stored verbatim
};

struct IPReport {
  std::vector<std::string> users;
  std::vector<double> per_user;  // IP_i
  double aggregate = 0.0;        // IP
  double accuracy = 0.0;         // a_m
  WeightVector weights = uniform_weights(1);
  std::size_t participants = 0;  // n^p
};

IPReport build_ip_report(std::span<const LearnerRecord> records, double accuracy, const WeightVector& weights,
                         const RuleCatalog& catalog);

/// Interaction counts summed over users, per feature.
std::vector<std::uint64_t> pooled_interactions(std::span<const LearnerRecord> records, std::size_t features);

nlohmann::ordered_json learner_to_json(const LearnerRecord& r);
nlohmann::ordered_json ip_report_to_json(const IPReport& report);
/// One row per user, then an "aggregate" footer row.
std::string ip_report_csv(const IPReport& report, std::span<const LearnerRecord> records);

}  // namespace xaip::metrics
