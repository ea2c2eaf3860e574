#pragma once

#include <array>
#include <cstdint>
#include <map>

#include "xaip/plant/plant.hpp"

namespace xaip::xai {

using plant::Action;
using plant::kActionCount;
using plant::PlantState;

/// Frequency-table predictor of a user's next action.
///
/// Continuous features are cut into equal-width bins over the feature box,
/// rods contribute their level. Prediction is the modal action in the
/// state's bin, else the global modal action, else Skip; ties go to the
/// lowest action id.
class UserModel {
 public:
  using BinKey = std::array<std::uint8_t, plant::kFeatureCount>;
  using Counts = std::array<std::uint64_t, kActionCount>;

  explicit UserModel(plant::FeatureBox box, int bins = 5);

  void observe(const PlantState& state, Action action);
  Action predict(const PlantState& state) const;

  BinKey bin_of(const PlantState& state) const;
  std::uint64_t count(const PlantState& state, Action action) const;
  std::uint64_t global_count(Action action) const;
  std::uint64_t observations() const;
  int bins() const { return bins_; }

 private:
  plant::FeatureBox box_;
  int bins_;
  std::map<BinKey, Counts> table_;
  Counts global_{};
};

}  // namespace xaip::xai
