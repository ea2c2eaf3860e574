#pragma once

// Binary decision-tree policy with Q-value leaves.
//
// Node ids are assigned depth-first in pre-order starting at 1 (root = 1,
// then the whole left subtree, then the right subtree). A split sends a
// feature vector left when x[feature] <= threshold and right otherwise.

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include <json.hpp>

#include "xaip/plant/plant.hpp"

namespace xaip::policy {

using plant::Action;
using plant::FeatureVector;
using plant::kActionCount;
using plant::kFeatureCount;

using NodeId = int;
using QValues = std::array<double, kActionCount>;

/// Argmax with lowest-action-id tie-break.
Action argmax_action(const QValues& q);

enum class Direction : std::uint8_t { LessEqual, Greater };

std::string_view direction_symbol(Direction d);  // "≤" or ">"

struct PathStep {
  NodeId node = 0;
  std::size_t feature = 0;
  double threshold = 0.0;
  Direction direction = Direction::LessEqual;

  bool operator==(const PathStep&) const = default;
};

struct DescentPath {
  std::vector<PathStep> steps;  // root first
  NodeId leaf = 0;

  bool operator==(const DescentPath&) const = default;
};

// Recursive description used to build trees; ids are assigned on build.
struct TreeSpec {
  struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    std::unique_ptr<TreeSpec> left;
    std::unique_ptr<TreeSpec> right;
  };
  struct Leaf {
    QValues q{};
    std::uint64_t visits = 0;
  };
  std::variant<Split, Leaf> body;

  TreeSpec();
  static TreeSpec leaf(QValues q, std::uint64_t visits = 0);
  static TreeSpec split(std::size_t feature, double threshold, TreeSpec left, TreeSpec right);
};

struct SplitNode {
  std::size_t feature = 0;
  double threshold = 0.0;
  NodeId left = 0;
  NodeId right = 0;

  bool operator==(const SplitNode&) const = default;
};

struct LeafNode {
  QValues q{};
  std::uint64_t visits = 0;

  bool operator==(const LeafNode&) const = default;
};

struct TreeNode {
  NodeId id = 0;
  NodeId parent = 0;  // 0 for the root
  int depth = 0;
  std::variant<SplitNode, LeafNode> body;

  bool is_leaf() const { return std::holds_alternative<LeafNode>(body); }
  const SplitNode& split() const { return std::get<SplitNode>(body); }
  const LeafNode& leaf() const { return std::get<LeafNode>(body); }

  bool operator==(const TreeNode&) const = default;
};

struct TreeMetadata {
  nlohmann::ordered_json training = nlohmann::ordered_json::object();
  std::optional<double> accuracy;  // a_m, agreement with the reference expert

  bool operator==(const TreeMetadata&) const = default;
};

class DecisionTreePolicy {
 public:
  explicit DecisionTreePolicy(const TreeSpec& spec, TreeMetadata metadata = {});

  /// Validates raw nodes: ids must be 1..n in pre-order, every split must
  /// reference existing children and every node must be reachable exactly
  /// once. Throws StructuralError otherwise.
  static DecisionTreePolicy from_nodes(std::vector<TreeNode> nodes, TreeMetadata metadata = {});

  /// Single leaf with the given Q values.
  static DecisionTreePolicy single_leaf(QValues q = {});

  DescentPath descend(const FeatureVector& features) const;
  /// Leaf argmax plus the path that reached it.
  std::pair<Action, DescentPath> best_action(const FeatureVector& features) const;

  /// Throws StructuralError for unknown ids.
  const TreeNode& node(NodeId id) const;
  bool contains(NodeId id) const { return id >= 1 && id <= static_cast<NodeId>(nodes_.size()); }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  std::vector<NodeId> leaf_ids() const;
  std::vector<NodeId> internal_ids() const;
  int max_depth() const;

  /// Root-first ancestors of `id`, excluding `id` itself.
  std::vector<NodeId> ancestors(NodeId id) const;
  /// Deepest node that is an ancestor-or-self of both.
  NodeId lowest_common_ancestor(NodeId a, NodeId b) const;
  /// Direction taken at split `ancestor` on the way down to `descendant`.
  Direction direction_towards(NodeId ancestor, NodeId descendant) const;

  Action leaf_action(NodeId leaf) const;

  const TreeMetadata& metadata() const { return metadata_; }
  TreeMetadata& metadata() { return metadata_; }

  bool operator==(const DecisionTreePolicy&) const = default;

 private:
  DecisionTreePolicy() = default;
  void validate_and_link();

  std::vector<TreeNode> nodes_;  // nodes_[id - 1]
  TreeMetadata metadata_;
};

using TreePtr = std::shared_ptr<const DecisionTreePolicy>;

}  // namespace xaip::policy
