#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "xaip/errors.hpp"
#include "xaip/policy/tree.hpp"
#include "xaip/policy/tree_io.hpp"

namespace {

using namespace xaip;
using namespace xaip::policy;
using plant::Action;
using test::four_split_tree;
using test::q_for;

plant::FeatureVector routing_to_leaf5() {
  // T <= 850, P <= 400, security up, L <= 25
  return {400.0, 200.0, 20.0, 500.0, 0.0, 2.0, 0.0, 0.0};
}

TEST(Argmax, AllZerosPicksLowestId) {
  EXPECT_EQ(argmax_action(QValues{}), Action::SecurityUp);
  QValues q;
  q.fill(-3.5);
  EXPECT_EQ(argmax_action(q), Action::SecurityUp);
}

TEST(Argmax, UniqueMaximum) { EXPECT_EQ(argmax_action(q_for(Action::AddWater)), Action::AddWater); }

TEST(Argmax, TiesGoToLowestIdAmongMaxima) {
  QValues q{};
  q[static_cast<std::size_t>(Action::AddWater)] = 4.0;
  q[static_cast<std::size_t>(Action::FuelUp)] = 4.0;
  EXPECT_EQ(argmax_action(q), Action::FuelUp);
}

TEST(Argmax, AgreesWithOracleOnRandomArrays) {
  Rng rng(21);
  for (int i = 0; i < 5000; ++i) {
    const auto q = test::random_q(rng, i % 2 == 0);
    ASSERT_EQ(argmax_action(q), test::argmax_oracle(q));
  }
}

TEST(Tree, SingleLeafHasEmptyPath) {
  const auto t = DecisionTreePolicy::single_leaf();
  const auto path = t.descend(plant::feature_vector(plant::new_plant(plant::PlantConfig{})));
  EXPECT_TRUE(path.steps.empty());
  EXPECT_EQ(path.leaf, 1);
  EXPECT_EQ(t.best_action({}).first, Action::SecurityUp);
}

TEST(Tree, FixtureNumbering) {
  const auto t = four_split_tree();
  ASSERT_EQ(t.size(), 9u);
  EXPECT_EQ(t.internal_ids(), (std::vector<NodeId>{1, 2, 3, 4}));
  EXPECT_EQ(t.leaf_ids(), (std::vector<NodeId>{5, 6, 7, 8, 9}));
  EXPECT_EQ(t.node(4).split().left, 5);
  EXPECT_EQ(t.node(3).split().right, 7);
  EXPECT_EQ(t.leaf_action(5), Action::AddWater);
  EXPECT_EQ(t.leaf_action(7), Action::SecurityUp);
  EXPECT_EQ(t.max_depth(), 4);
}

TEST(Tree, DescentToLeafFiveVisitsNodesOneAndTwo) {
  const auto t = four_split_tree();
  const auto [action, path] = t.best_action(routing_to_leaf5());
  EXPECT_EQ(action, Action::AddWater);
  EXPECT_EQ(path.leaf, 5);
  ASSERT_EQ(path.steps.size(), 4u);
  EXPECT_EQ(path.steps[0].node, 1);
  EXPECT_EQ(path.steps[1].node, 2);
  EXPECT_EQ(path.steps[2].node, 3);
  EXPECT_EQ(path.steps[3].node, 4);
  EXPECT_EQ(path.steps[0].feature, 0u);
  EXPECT_EQ(path.steps[0].threshold, 850.0);
  EXPECT_EQ(path.steps[0].direction, Direction::LessEqual);
}

TEST(Tree, ThresholdValueGoesLeft) {
  const auto t = four_split_tree();
  auto x = routing_to_leaf5();
  x[0] = 850.0;
  EXPECT_EQ(t.descend(x).leaf, 5);
  x[0] = std::nextafter(850.0, 1e9);
  EXPECT_EQ(t.descend(x).leaf, 9);
  EXPECT_EQ(t.descend(x).steps.front().direction, Direction::Greater);
}

TEST(Tree, AncestryQueries) {
  const auto t = four_split_tree();
  EXPECT_EQ(t.ancestors(5), (std::vector<NodeId>{1, 2, 3, 4}));
  EXPECT_TRUE(t.ancestors(1).empty());
  EXPECT_EQ(t.lowest_common_ancestor(5, 7), 3);
  EXPECT_EQ(t.lowest_common_ancestor(5, 6), 4);
  EXPECT_EQ(t.lowest_common_ancestor(8, 9), 1);
  EXPECT_EQ(t.lowest_common_ancestor(4, 5), 4);
  EXPECT_EQ(t.direction_towards(3, 7), Direction::Greater);
  EXPECT_EQ(t.direction_towards(3, 5), Direction::LessEqual);
  EXPECT_THROW(t.node(10), StructuralError);
  EXPECT_THROW(t.node(0), StructuralError);
}

TEST(Tree, FromNodesRejectsMalformedTrees) {
  const auto good = four_split_tree().nodes();
  EXPECT_NO_THROW(DecisionTreePolicy::from_nodes(good));

  auto dangling = good;
  std::get<SplitNode>(dangling[3].body).right = 42;
  EXPECT_THROW(DecisionTreePolicy::from_nodes(dangling), StructuralError);

  auto shared_child = good;
  std::get<SplitNode>(shared_child[3].body).right = 5;
  EXPECT_THROW(DecisionTreePolicy::from_nodes(shared_child), StructuralError);

  EXPECT_THROW(DecisionTreePolicy::from_nodes({}), StructuralError);
}

TEST(Tree, RandomTreesMatchRegionAndArgmaxOracles) {
  Rng rng(77);
  const auto box = plant::feature_box(plant::PlantConfig{});
  for (int t = 0; t < 200; ++t) {
    const auto tree = test::random_tree(rng, box);
    for (int i = 0; i < 50; ++i) {
      const auto x = test::random_features(rng, box);
      const NodeId expected = test::region_leaf(tree, x);
      ASSERT_GT(expected, 0) << "regions must partition the box";
      const auto [action, path] = tree.best_action(x);
      ASSERT_EQ(path.leaf, expected);
      ASSERT_EQ(action, test::argmax_oracle(tree.node(expected).leaf().q));
      // Path is the reversed parent chain.
      auto chain = test::parent_chain(tree, expected);
      ASSERT_EQ(path.steps.size() + 1, chain.size());
      for (std::size_t k = 0; k < path.steps.size(); ++k) ASSERT_EQ(path.steps[k].node, chain[chain.size() - 1 - k]);
    }
  }
}

TEST(Tree, LcaMatchesParentChainOracle) {
  Rng rng(78);
  const auto box = plant::feature_box(plant::PlantConfig{});
  for (int t = 0; t < 200; ++t) {
    const auto tree = test::random_tree(rng, box);
    const auto n = static_cast<std::uint64_t>(tree.size());
    for (int i = 0; i < 20; ++i) {
      const auto a = static_cast<NodeId>(1 + rng.below(n));
      const auto b = static_cast<NodeId>(1 + rng.below(n));
      ASSERT_EQ(tree.lowest_common_ancestor(a, b), test::lca_oracle(tree, a, b));
    }
  }
}

TEST(TreeIo, RoundTripPreservesEverything) {
  Rng rng(79);
  const auto box = plant::feature_box(plant::PlantConfig{});
  for (int t = 0; t < 50; ++t) {
    auto tree = test::random_tree(rng, box);
    tree.metadata().training = nlohmann::ordered_json{{"seed", t}};
    tree.metadata().accuracy = 0.25;
    const std::string text = serialize_tree(tree);
    const auto back = tree_from_json(nlohmann::ordered_json::parse(text));
    ASSERT_EQ(back, tree);
    ASSERT_EQ(serialize_tree(back), text);
  }
}

TEST(TreeIo, RejectsBadDocuments) {
  auto doc = tree_to_json(four_split_tree());
  auto wrong_schema = doc;
  wrong_schema["schema"] = "xaip.tree/9";
  EXPECT_THROW(tree_from_json(wrong_schema), FormatError);
  auto short_q = doc;
  for (auto& n : short_q["nodes"]) {
    if (n["kind"] == "leaf") n["q"].erase(0);
  }
  EXPECT_THROW(tree_from_json(short_q), StructuralError);
  auto dangling = doc;
  dangling["nodes"][0]["left"] = 99;
  EXPECT_THROW(tree_from_json(dangling), StructuralError);
}

TEST(TreeIo, ShippedTreeLoads) {
  const auto tree = load_tree(test::data_dir() / "tree_default.json");
  EXPECT_GT(tree.size(), 1u);
  EXPECT_LE(tree.max_depth(), 8);
  EXPECT_EQ(tree.metadata().training.at("seed"), 42);
}

}  // namespace
