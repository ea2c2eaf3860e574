#include "xaip/metrics/report.hpp"

#include <numeric>

#include <fmt/format.h>

namespace xaip::metrics {

IPReport build_ip_report(std::span<const LearnerRecord> records, double accuracy, const WeightVector& weights,
                         const RuleCatalog& catalog) {
  IPReport report;
  report.accuracy = accuracy;
  report.weights = weights;
  for (const auto& r : records) {
    report.users.push_back(r.user_id);
    report.per_user.push_back(information_power_user(accuracy, weights, r.learned, catalog));
  }
  report.aggregate = information_power(report.per_user);
  report.participants = records.size();
  return report;
}

std::vector<std::uint64_t> pooled_interactions(std::span<const LearnerRecord> records, std::size_t features) {
  std::vector<std::uint64_t> total(features, 0);
  for (const auto& r : records) {
    for (std::size_t j = 0; j < features && j < r.interactions.size(); ++j) total[j] += r.interactions[j];
  }
  return total;
}

nlohmann::ordered_json learner_to_json(const LearnerRecord& r) {
  nlohmann::ordered_json j;
  j["user_id"] = r.user_id;
  j["final_score"] = r.final_score;
  j["learned"] = r.learned;
  j["rules_learned"] = std::accumulate(r.learned.begin(), r.learned.end(), 0);
  j["interactions"] = r.interactions;
  j["what_requests"] = r.what_requests;
  j["why_requests"] = r.why_requests;
  j["rule_correct"] = r.rule_correct;
  j["what_if_correct"] = r.what_if_correct;
  j["what_if_total"] = r.what_if_total;
  j["questionnaire"] = r.questionnaire;
  return j;
}

nlohmann::ordered_json ip_report_to_json(const IPReport& report) {
  nlohmann::ordered_json j;
  j["participants"] = report.participants;
  j["accuracy"] = report.accuracy;
  j["weights"] = report.weights.values();
  auto users = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < report.users.size(); ++i) {
    users.push_back({{"user_id", report.users[i]}, {"ip", report.per_user[i]}});
  }
  j["per_user"] = std::move(users);
  j["ip"] = report.aggregate;
  return j;
}

std::string ip_report_csv(const IPReport& report, std::span<const LearnerRecord> records) {
  std::string out = "user_id,ip,final_score,rules_learned,what_requests,why_requests,what_if_correct\n";
  double score = 0.0;
  double rules = 0.0;
  double what = 0.0;
  double why = 0.0;
  double what_if = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const int learned = std::accumulate(r.learned.begin(), r.learned.end(), 0);
    out += fmt::format("{},{:.6f},{:.4f},{},{},{},{}\n", r.user_id, report.per_user.at(i), r.final_score, learned,
                       r.what_requests, r.why_requests, r.what_if_correct);
    score += r.final_score;
    rules += learned;
    what += r.what_requests;
    why += r.why_requests;
    what_if += r.what_if_correct;
  }
  const double n = records.empty() ? 1.0 : static_cast<double>(records.size());
  out += fmt::format("aggregate,{:.6f},{:.4f},{:.4f},{:.4f},{:.4f},{:.4f}\n", report.aggregate, score / n, rules / n,
                     what / n, why / n, what_if / n);
  return out;
}

}  // namespace xaip::metrics
