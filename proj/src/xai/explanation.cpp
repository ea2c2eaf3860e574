#include "xaip/xai/explanation.hpp"

#include <algorithm>
#include <array>

#include <fmt/format.h>

#include "xaip/errors.hpp"

namespace xaip::xai {
namespace {

struct FeatureText {
  std::string_view name;
  std::string_view unit;
};

// Indexed by the feature encoding order.
constexpr std::array<FeatureText, plant::kFeatureCount> kFeatureText = {{
    {"the water temperature in the core", " °C"},
    {"the pressure in the core", " bar"},
    {"the water level in the steam generator", ""},
    {"the reactor power", " MW"},
    {"the security rods position", ""},
    {"the fuel rods position", ""},
    {"the sustain rods position", ""},
    {"the regulatory rods position", ""},
}};

constexpr std::array<std::string_view, kActionCount> kActionPhrases = {
    "raise the security rods",
    "lower the security rods",
    "raise the fuel rods",
    "lower the fuel rods",
    "raise the sustain rods",
    "set the sustain rods to medium",
    "lower the sustain rods",
    "raise the regulatory rods",
    "set the regulatory rods to medium",
    "lower the regulatory rods",
    "add water to the steam generator",
    "skip",
};

void collect_leaves_with(const DecisionTreePolicy& tree, NodeId root, Action action, std::vector<NodeId>& out) {
  std::vector<NodeId> stack{root};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    const auto& n = tree.node(id);
    if (n.is_leaf()) {
      if (policy::argmax_action(n.leaf().q) == action) out.push_back(id);
    } else {
      stack.push_back(n.split().left);
      stack.push_back(n.split().right);
    }
  }
}

Explanation no_split_explanation(XaiMode mode) {
  Explanation e;
  e.mode = mode;
  e.text = NoExplainableSplit().what();
  return e;
}

}  // namespace

std::string_view mode_name(XaiMode mode) { return mode == XaiMode::Classical ? "classical" : "user-aware"; }

std::optional<XaiMode> mode_from_name(std::string_view name) {
  if (name == "classical") return XaiMode::Classical;
  if (name == "user-aware") return XaiMode::UserAware;
  return std::nullopt;
}

std::optional<int> UsedNodeLedger::last_used(NodeId id) const {
  auto it = last_used_.find(id);
  if (it == last_used_.end()) return std::nullopt;
  return it->second;
}

Suggestion answer_what(const DecisionTreePolicy& tree, const PlantState& state) {
  auto [action, path] = tree.best_action(plant::feature_vector(state));
  Suggestion s;
  s.action = action;
  s.leaf = path.leaf;
  s.path = std::move(path);
  return s;
}

NodeId select_node_classical(const DescentPath& path, const UsedNodeLedger& ledger) {
  if (path.steps.empty()) throw NoExplainableSplit();
  for (const auto& step : path.steps) {
    if (!ledger.contains(step.node)) return step.node;
  }
  const auto lru = std::min_element(path.steps.begin(), path.steps.end(), [&](const auto& a, const auto& b) {
    return *ledger.last_used(a.node) < *ledger.last_used(b.node);
  });
  return lru->node;
}

std::optional<NodeId> nearest_foil_leaf(const DecisionTreePolicy& tree, NodeId fact_leaf, Action foil) {
  NodeId child = fact_leaf;
  const auto chain = tree.ancestors(fact_leaf);
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    const auto& split = tree.node(*it).split();
    const NodeId other = split.left == child ? split.right : split.left;
    std::vector<NodeId> hits;
    collect_leaves_with(tree, other, foil, hits);
    if (!hits.empty()) return *std::min_element(hits.begin(), hits.end());
    child = *it;
  }
  return std::nullopt;
}

NodeId select_node_user_aware(const DecisionTreePolicy& tree, NodeId fact_leaf, NodeId foil_leaf) {
  if (!tree.node(fact_leaf).is_leaf() || !tree.node(foil_leaf).is_leaf()) {
    throw StructuralError("user-aware selection needs two leaves");
  }
  if (fact_leaf == foil_leaf) throw std::invalid_argument("fact and foil leaves must differ");
  return tree.lowest_common_ancestor(fact_leaf, foil_leaf);
}

std::string_view feature_display_name(std::size_t feature) {
  if (feature >= kFeatureText.size()) throw std::out_of_range(fmt::format("unknown feature index {}", feature));
  return kFeatureText[feature].name;
}

std::string_view action_phrase(Action action) { return kActionPhrases.at(static_cast<std::size_t>(action)); }

std::string suggestion_text(Action action) { return fmt::format("I would {}", action_phrase(action)); }

std::string format_value(double value) {
  std::string s = fmt::format("{:.2f}", value);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

std::string render_explanation(std::size_t feature, Direction direction, double threshold, XaiMode mode,
                               std::optional<Action> foil) {
  if (feature >= kFeatureText.size()) throw std::out_of_range(fmt::format("unknown feature index {}", feature));
  const auto& ft = kFeatureText[feature];
  std::string text = fmt::format("because {} is {} {}{}", ft.name, policy::direction_symbol(direction),
                                 format_value(threshold), ft.unit);
  if (mode == XaiMode::UserAware && foil) {
    text += fmt::format(" — that is why I would not {}", action_phrase(*foil));
  }
  return text;
}

Explanation answer_why(const DecisionTreePolicy& tree, const Suggestion& suggestion, const PlantState& state,
                       XaiMode mode, UsedNodeLedger& ledger, const UserModel& user_model, int step) {
  const DescentPath& path = suggestion.path;
  if (path.steps.empty()) return no_split_explanation(mode);

  NodeId node = 0;
  std::optional<Action> foil;
  XaiMode used = XaiMode::Classical;
  if (mode == XaiMode::UserAware) {
    const Action predicted = user_model.predict(state);
    if (predicted != suggestion.action) {
      if (auto foil_leaf = nearest_foil_leaf(tree, suggestion.leaf, predicted)) {
        node = select_node_user_aware(tree, suggestion.leaf, *foil_leaf);
        foil = predicted;
        used = XaiMode::UserAware;
      }
    }
  }
  if (node == 0) node = select_node_classical(path, ledger);
  ledger.mark(node, step);

  const auto on_path = std::find_if(path.steps.begin(), path.steps.end(), [&](const auto& s) { return s.node == node; });
  if (on_path == path.steps.end()) throw StructuralError(fmt::format("selected node {} is not on the fact path", node));

  Explanation e;
  e.node = node;
  e.feature = on_path->feature;
  e.threshold = on_path->threshold;
  e.direction = on_path->direction;
  e.mode = used;
  e.foil = foil;
  e.text = render_explanation(e.feature, e.direction, e.threshold, used, foil);
  return e;
}

nlohmann::ordered_json explanation_to_json(const Explanation& e) {
  nlohmann::ordered_json j;
  if (e.node) {
    j["node_id"] = *e.node;
    j["feature"] = plant::feature_key(e.feature);
    j["op"] = policy::direction_symbol(e.direction);
    j["value"] = e.threshold;
  } else {
    j["node_id"] = nullptr;
    j["feature"] = nullptr;
    j["op"] = nullptr;
    j["value"] = nullptr;
  }
  j["mode"] = mode_name(e.mode);
  j["foil"] = e.foil ? nlohmann::ordered_json(plant::action_name(*e.foil)) : nlohmann::ordered_json(nullptr);
  j["text"] = e.text;
  return j;
}

nlohmann::ordered_json suggestion_to_json(const Suggestion& s) {
  nlohmann::ordered_json j;
  j["action"] = plant::action_name(s.action);
  j["action_id"] = plant::action_id(s.action);
  j["text"] = suggestion_text(s.action);
  return j;
}

}  // namespace xaip::xai
