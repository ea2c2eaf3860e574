#include "xaip/metrics/catalog.hpp"

#include <fstream>
#include <set>

#include "xaip/errors.hpp"

namespace xaip::metrics {

RuleCatalog::RuleCatalog(std::vector<std::string> features, std::vector<Rule> rules, std::vector<QuizItem> items)
    : features_(std::move(features)), rules_(std::move(rules)), items_(std::move(items)) {
  if (features_.empty()) throw FormatError("rule catalog needs at least one feature");
  totals_.assign(features_.size(), 0);
  std::set<std::string> rule_ids;
  for (const Rule& r : rules_) {
    if (!rule_ids.insert(r.id).second) throw FormatError("duplicate rule id '" + r.id + "'");
    if (r.feature >= features_.size()) throw FormatError("rule '" + r.id + "' names an unknown feature");
    ++totals_[r.feature];
  }
  for (std::size_t j = 0; j < totals_.size(); ++j) {
    if (totals_[j] < 1) throw FormatError("feature '" + features_[j] + "' has no rules");
  }
  std::set<std::string> item_ids;
  std::set<std::string> covered;
  for (const QuizItem& q : items_) {
    if (!item_ids.insert(q.id).second) throw FormatError("duplicate quiz item id '" + q.id + "'");
    if (q.choices.size() < 2) throw FormatError("quiz item '" + q.id + "' needs at least two choices");
    if (q.correct < 0 || q.correct >= static_cast<int>(q.choices.size())) {
      throw FormatError("quiz item '" + q.id + "' has an out-of-range answer");
    }
    if (q.feature >= features_.size()) throw FormatError("quiz item '" + q.id + "' names an unknown feature");
    if (q.kind == QuizKind::Rule) {
      const Rule* r = find_rule(q.rule);
      if (r == nullptr || r->quiz_item != q.id) {
        throw FormatError("quiz item '" + q.id + "' is not the item of rule '" + q.rule + "'");
      }
      if (r->feature != q.feature) throw FormatError("quiz item '" + q.id + "' feature differs from its rule");
      if (!covered.insert(q.rule).second) throw FormatError("rule '" + q.rule + "' has several quiz items");
    }
  }
  for (const Rule& r : rules_) {
    if (!covered.count(r.id)) throw FormatError("rule '" + r.id + "' has no quiz item");
  }
}

const QuizItem* RuleCatalog::find_item(const std::string& id) const {
  for (const auto& q : items_) if (q.id == id) return &q;
  return nullptr;
}

const Rule* RuleCatalog::find_rule(const std::string& id) const {
  for (const auto& r : rules_) if (r.id == id) return &r;
  return nullptr;
}

std::vector<const Rule*> RuleCatalog::rules_of(std::size_t feature) const {
  std::vector<const Rule*> out;
  for (const auto& r : rules_) if (r.feature == feature) out.push_back(&r);
  return out;
}

RuleCatalog catalog_from_json(const nlohmann::json& doc) {
  if (doc.value("schema", std::string{}) != kCatalogSchema) {
    throw FormatError(std::string("rule catalog schema must be ") + kCatalogSchema);
  }
  try {
    auto features = doc.at("features").get<std::vector<std::string>>();
    auto feature_of = [&](const nlohmann::json& j) -> std::size_t {
      const auto key = j.get<std::string>();
      for (std::size_t i = 0; i < features.size(); ++i) if (features[i] == key) return i;
      throw FormatError("unknown feature '" + key + "' in rule catalog");
    };
    std::vector<Rule> rules;
    for (const auto& j : doc.at("rules")) {
      rules.push_back({j.at("id").get<std::string>(), feature_of(j.at("feature")),
                       j.at("statement").get<std::string>(), j.at("quiz_item").get<std::string>()});
    }
    std::vector<QuizItem> items;
    for (const auto& j : doc.at("quiz")) {
      QuizItem q;
      q.id = j.at("id").get<std::string>();
      const auto kind = j.at("kind").get<std::string>();
      if (kind == "rule") {
        q.kind = QuizKind::Rule;
        q.rule = j.at("rule").get<std::string>();
      } else if (kind == "what_if") {
        q.kind = QuizKind::WhatIf;
      } else {
        throw FormatError("unknown quiz item kind '" + kind + "'");
      }
      q.feature = feature_of(j.at("feature"));
      q.prompt = j.at("prompt").get<std::string>();
      q.choices = j.at("choices").get<std::vector<std::string>>();
      q.correct = j.at("correct").get<int>();
      items.push_back(std::move(q));
    }
    return RuleCatalog(std::move(features), std::move(rules), std::move(items));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed rule catalog: ") + e.what());
  }
}

RuleCatalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open rule catalog " + path.string());
  try {
    return catalog_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("rule catalog " + path.string() + ": " + e.what());
  }
}

nlohmann::ordered_json quiz_sheet_json(const RuleCatalog& catalog) {
  nlohmann::ordered_json sheet;
  sheet["schema"] = "xaip.quiz_sheet/1";
  auto items = nlohmann::ordered_json::array();
  for (const auto& q : catalog.quiz_items()) {
    nlohmann::ordered_json j;
    j["id"] = q.id;
    j["prompt"] = q.prompt;
    j["choices"] = q.choices;
    items.push_back(std::move(j));
  }
  sheet["items"] = std::move(items);
  return sheet;
}

}  // namespace xaip::metrics
