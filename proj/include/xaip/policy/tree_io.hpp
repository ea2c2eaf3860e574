#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "xaip/policy/tree.hpp"

namespace xaip::policy {

inline constexpr const char* kTreeSchema = "xaip.tree/1";

// Document layout:
//   {"schema", "feature_encoding", "features": [...], "actions": [...],
//    "metadata": {"training": {...}, "accuracy": number|null},
//    "nodes": [{"id", "kind": "split", "feature", "threshold", "left", "right"}
//             |{"id", "kind": "leaf", "q": [12 numbers], "visits"}]}
// Nodes are listed in id order.
nlohmann::ordered_json tree_to_json(const DecisionTreePolicy& tree);
DecisionTreePolicy tree_from_json(const nlohmann::ordered_json& doc);

std::string serialize_tree(const DecisionTreePolicy& tree);
void save_tree(const DecisionTreePolicy& tree, const std::filesystem::path& path);
DecisionTreePolicy load_tree(const std::filesystem::path& path);

}  // namespace xaip::policy
