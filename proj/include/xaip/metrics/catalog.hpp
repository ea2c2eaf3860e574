#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace xaip::metrics {

inline constexpr const char* kCatalogSchema = "xaip.rule_catalog/1";

struct Rule {
  std::string id;
  std::size_t feature = 0;
  std::string statement;
  std::string quiz_item;
};

enum class QuizKind { Rule, WhatIf };

struct QuizItem {
  std::string id;
  QuizKind kind = QuizKind::Rule;
  std::string rule;           // Rule items only
  std::size_t feature = 0;    // feature the item is about
  std::string prompt;
  std::vector<std::string> choices;
  int correct = 0;
};

/// Task rules per feature plus the post-task quiz. Every feature has at
/// least one rule and each rule has exactly one quiz item.
class RuleCatalog {
 public:
  RuleCatalog(std::vector<std::string> features, std::vector<Rule> rules, std::vector<QuizItem> items);

  std::size_t feature_count() const { return features_.size(); }
  const std::vector<std::string>& features() const { return features_; }
  const std::vector<Rule>& rules() const { return rules_; }
  const std::vector<QuizItem>& quiz_items() const { return items_; }
  /// n_j^r for every feature j.
  const std::vector<int>& rule_totals() const { return totals_; }
  int rules_for(std::size_t feature) const { return totals_.at(feature); }

  const QuizItem* find_item(const std::string& id) const;
  const Rule* find_rule(const std::string& id) const;
  std::vector<const Rule*> rules_of(std::size_t feature) const;

 private:
  std::vector<std::string> features_;
  std::vector<Rule> rules_;
  std::vector<QuizItem> items_;
  std::vector<int> totals_;
};

RuleCatalog catalog_from_json(const nlohmann::json& doc);
RuleCatalog load_catalog(const std::filesystem::path& path);

/// Quiz payload sent to participants: prompts and choices, no answers and
/// no rule statements.
nlohmann::ordered_json quiz_sheet_json(const RuleCatalog& catalog);

}  // namespace xaip::metrics
