#include "xaip/policy/tree_io.hpp"

#include <fstream>

#include "xaip/errors.hpp"

namespace xaip::policy {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json tree_to_json(const DecisionTreePolicy& tree) {
  ordered_json doc;
  doc["schema"] = kTreeSchema;
  doc["feature_encoding"] = plant::kFeatureEncodingVersion;
  ordered_json features = ordered_json::array();
  for (std::size_t f = 0; f < kFeatureCount; ++f) features.push_back(plant::feature_key(f));
  doc["features"] = std::move(features);
  ordered_json actions = ordered_json::array();
  for (std::size_t a = 0; a < kActionCount; ++a) actions.push_back(plant::action_name(static_cast<Action>(a)));
  doc["actions"] = std::move(actions);

  ordered_json meta;
  meta["training"] = tree.metadata().training;
  meta["accuracy"] = tree.metadata().accuracy ? ordered_json(*tree.metadata().accuracy) : ordered_json(nullptr);
  doc["metadata"] = std::move(meta);

  ordered_json nodes = ordered_json::array();
  for (const TreeNode& n : tree.nodes()) {
    ordered_json j;
    j["id"] = n.id;
    if (n.is_leaf()) {
      j["kind"] = "leaf";
      j["q"] = n.leaf().q;
      j["visits"] = n.leaf().visits;
    } else {
      j["kind"] = "split";
      j["feature"] = n.split().feature;
      j["threshold"] = n.split().threshold;
      j["left"] = n.split().left;
      j["right"] = n.split().right;
    }
    nodes.push_back(std::move(j));
  }
  doc["nodes"] = std::move(nodes);
  return doc;
}

DecisionTreePolicy tree_from_json(const ordered_json& doc) {
  if (doc.value("schema", std::string{}) != kTreeSchema) {
    throw FormatError(std::string("tree schema must be ") + kTreeSchema);
  }
  if (doc.value("feature_encoding", 0) != plant::kFeatureEncodingVersion) {
    throw FormatError("unsupported feature encoding version");
  }
  std::vector<TreeNode> nodes;
  TreeMetadata meta;
  try {
    for (const auto& j : doc.at("nodes")) {
      TreeNode n;
      n.id = j.at("id").get<NodeId>();
      const auto kind = j.at("kind").get<std::string>();
      if (kind == "leaf") {
        const auto q = j.at("q").get<std::vector<double>>();
        if (q.size() != kActionCount) throw StructuralError("leaf Q array must hold 12 values");
        LeafNode leaf;
        std::copy(q.begin(), q.end(), leaf.q.begin());
        leaf.visits = j.value("visits", std::uint64_t{0});
        n.body = leaf;
      } else if (kind == "split") {
        n.body = SplitNode{j.at("feature").get<std::size_t>(), j.at("threshold").get<double>(),
                           j.at("left").get<NodeId>(), j.at("right").get<NodeId>()};
      } else {
        throw FormatError("unknown node kind '" + kind + "'");
      }
      nodes.push_back(std::move(n));
    }
    if (auto it = doc.find("metadata"); it != doc.end()) {
      if (it->contains("training")) meta.training = it->at("training");
      if (it->contains("accuracy") && !it->at("accuracy").is_null()) {
        meta.accuracy = it->at("accuracy").get<double>();
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed tree document: ") + e.what());
  }
  return DecisionTreePolicy::from_nodes(std::move(nodes), std::move(meta));
}

std::string serialize_tree(const DecisionTreePolicy& tree) { return tree_to_json(tree).dump(1) + "\n"; }

void save_tree(const DecisionTreePolicy& tree, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write tree file " + path.string());
  out << serialize_tree(tree);
}

DecisionTreePolicy load_tree(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open tree file " + path.string());
  try {
    return tree_from_json(ordered_json::parse(in));
  } catch (const json::parse_error& e) {
    throw FormatError("tree file " + path.string() + ": " + e.what());
  }
}

}  // namespace xaip::policy
