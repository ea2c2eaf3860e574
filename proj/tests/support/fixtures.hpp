#pragma once

#include <filesystem>

#include "xaip/policy/tree.hpp"

namespace xaip::test {

inline std::filesystem::path data_dir() { return XAIP_DATA_DIR; }
inline std::filesystem::path golden_dir() { return XAIP_GOLDEN_DIR; }

inline policy::QValues q_for(plant::Action a, double top = 10.0) {
  policy::QValues q{};
  q[static_cast<std::size_t>(a)] = top;
  return q;
}

/// Four-split advisor tree used by the explanation-selection fixtures.
///   1: temperature <= 850      -> 2 | leaf 9 SecurityDown
///   2: pressure <= 400         -> 3 | leaf 8 RegulatoryUp
///   3: security rods <= 1      -> 4 | leaf 7 SecurityUp
///   4: water level <= 25       -> leaf 5 AddWater | leaf 6 FuelDown
inline policy::DecisionTreePolicy four_split_tree() {
  using policy::TreeSpec;
  using plant::Action;
  auto n4 = TreeSpec::split(2, 25.0, TreeSpec::leaf(q_for(Action::AddWater)), TreeSpec::leaf(q_for(Action::FuelDown)));
  auto n3 = TreeSpec::split(4, 1.0, std::move(n4), TreeSpec::leaf(q_for(Action::SecurityUp)));
  auto n2 = TreeSpec::split(1, 400.0, std::move(n3), TreeSpec::leaf(q_for(Action::RegulatoryUp)));
  auto n1 = TreeSpec::split(0, 850.0, std::move(n2), TreeSpec::leaf(q_for(Action::SecurityDown)));
  return policy::DecisionTreePolicy(n1);
}

}  // namespace xaip::test
