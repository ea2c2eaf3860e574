#include "xaip/policy/tree.hpp"

#include <algorithm>
#include <utility>

#include <fmt/format.h>

#include "xaip/errors.hpp"

namespace xaip::policy {

Action argmax_action(const QValues& q) {
  std::size_t best = 0;
  for (std::size_t a = 1; a < q.size(); ++a) {
    if (q[a] > q[best]) best = a;
  }
  return static_cast<Action>(best);
}

std::string_view direction_symbol(Direction d) { return d == Direction::LessEqual ? "≤" : ">"; }

TreeSpec::TreeSpec() : body(Leaf{}) {}

TreeSpec TreeSpec::leaf(QValues q, std::uint64_t visits) {
  TreeSpec s;
  s.body = Leaf{q, visits};
  return s;
}

TreeSpec TreeSpec::split(std::size_t feature, double threshold, TreeSpec left, TreeSpec right) {
  TreeSpec s;
  s.body = Split{feature, threshold, std::make_unique<TreeSpec>(std::move(left)),
                 std::make_unique<TreeSpec>(std::move(right))};
  return s;
}

namespace {

NodeId emit_preorder(const TreeSpec& spec, NodeId parent, int depth, std::vector<TreeNode>& out) {
  const NodeId id = static_cast<NodeId>(out.size()) + 1;
  out.push_back(TreeNode{id, parent, depth, LeafNode{}});
  if (const auto* leaf = std::get_if<TreeSpec::Leaf>(&spec.body)) {
    out[id - 1].body = LeafNode{leaf->q, leaf->visits};
    return id;
  }
  const auto& split = std::get<TreeSpec::Split>(spec.body);
  if (!split.left || !split.right) throw StructuralError("tree spec split without two children");
  const NodeId left = emit_preorder(*split.left, id, depth + 1, out);
  const NodeId right = emit_preorder(*split.right, id, depth + 1, out);
  out[id - 1].body = SplitNode{split.feature, split.threshold, left, right};
  return id;
}

}  // namespace

DecisionTreePolicy::DecisionTreePolicy(const TreeSpec& spec, TreeMetadata metadata)
    : metadata_(std::move(metadata)) {
  emit_preorder(spec, 0, 0, nodes_);
  validate_and_link();
}

DecisionTreePolicy DecisionTreePolicy::single_leaf(QValues q) {
  return DecisionTreePolicy(TreeSpec::leaf(q));
}

DecisionTreePolicy DecisionTreePolicy::from_nodes(std::vector<TreeNode> nodes, TreeMetadata metadata) {
  if (nodes.empty()) throw StructuralError("tree has no nodes");
  std::sort(nodes.begin(), nodes.end(), [](const TreeNode& a, const TreeNode& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id != static_cast<NodeId>(i) + 1) {
      throw StructuralError(fmt::format("node ids must be 1..{} without gaps or duplicates", nodes.size()));
    }
  }
  DecisionTreePolicy tree;
  tree.nodes_ = std::move(nodes);
  tree.metadata_ = std::move(metadata);
  tree.validate_and_link();
  return tree;
}

// Walks the tree from the root in pre-order, checking that the k-th node
// reached carries id k and recomputing parent and depth links.
void DecisionTreePolicy::validate_and_link() {
  const auto n = static_cast<NodeId>(nodes_.size());
  std::vector<std::pair<NodeId, std::pair<NodeId, int>>> stack{{1, {0, 0}}};
  NodeId expected = 1;
  while (!stack.empty()) {
    auto [id, link] = stack.back();
    stack.pop_back();
    if (id < 1 || id > n) throw StructuralError(fmt::format("dangling child reference to node {}", id));
    if (id != expected) {
      throw StructuralError(fmt::format("node {} reached where pre-order id {} was expected", id, expected));
    }
    ++expected;
    TreeNode& node = nodes_[id - 1];
    node.parent = link.first;
    node.depth = link.second;
    if (!node.is_leaf()) {
      const SplitNode& s = node.split();
      if (s.feature >= kFeatureCount) {
        throw StructuralError(fmt::format("node {} splits on unknown feature {}", id, s.feature));
      }
      stack.push_back({s.right, {id, link.second + 1}});
      stack.push_back({s.left, {id, link.second + 1}});
    }
  }
  if (expected != n + 1) {
    throw StructuralError(fmt::format("{} of {} nodes unreachable from the root", n + 1 - expected, n));
  }
}

const TreeNode& DecisionTreePolicy::node(NodeId id) const {
  if (!contains(id)) throw StructuralError(fmt::format("unknown node id {}", id));
  return nodes_[id - 1];
}

DescentPath DecisionTreePolicy::descend(const FeatureVector& features) const {
  DescentPath path;
  NodeId id = 1;
  while (true) {
    const TreeNode& n = node(id);
    if (n.is_leaf()) break;
    const SplitNode& s = n.split();
    const bool left = features[s.feature] <= s.threshold;
    path.steps.push_back({id, s.feature, s.threshold, left ? Direction::LessEqual : Direction::Greater});
    id = left ? s.left : s.right;
  }
  path.leaf = id;
  return path;
}

std::pair<Action, DescentPath> DecisionTreePolicy::best_action(const FeatureVector& features) const {
  DescentPath path = descend(features);
  return {leaf_action(path.leaf), std::move(path)};
}

Action DecisionTreePolicy::leaf_action(NodeId leaf) const {
  const TreeNode& n = node(leaf);
  if (!n.is_leaf()) throw StructuralError(fmt::format("node {} is not a leaf", leaf));
  return argmax_action(n.leaf().q);
}

std::vector<NodeId> DecisionTreePolicy::leaf_ids() const {
  std::vector<NodeId> out;
  for (const auto& n : nodes_) if (n.is_leaf()) out.push_back(n.id);
  return out;
}

std::vector<NodeId> DecisionTreePolicy::internal_ids() const {
  std::vector<NodeId> out;
  for (const auto& n : nodes_) if (!n.is_leaf()) out.push_back(n.id);
  return out;
}

int DecisionTreePolicy::max_depth() const {
  int d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.depth);
  return d;
}

std::vector<NodeId> DecisionTreePolicy::ancestors(NodeId id) const {
  std::vector<NodeId> chain;
  for (NodeId p = node(id).parent; p != 0; p = nodes_[p - 1].parent) chain.push_back(p);
  std::reverse(chain.begin(), chain.end());
  return chain;
}

NodeId DecisionTreePolicy::lowest_common_ancestor(NodeId a, NodeId b) const {
  std::vector<NodeId> pa = ancestors(a);
  std::vector<NodeId> pb = ancestors(b);
  pa.push_back(a);
  pb.push_back(b);
  NodeId lca = 1;
  for (std::size_t i = 0; i < pa.size() && i < pb.size() && pa[i] == pb[i]; ++i) lca = pa[i];
  return lca;
}

Direction DecisionTreePolicy::direction_towards(NodeId ancestor, NodeId descendant) const {
  NodeId child = descendant;
  while (child != 0 && node(child).parent != ancestor) child = node(child).parent;
  if (child == 0) {
    throw StructuralError(fmt::format("node {} is not an ancestor of {}", ancestor, descendant));
  }
  return node(ancestor).split().left == child ? Direction::LessEqual : Direction::Greater;
}

}  // namespace xaip::policy
