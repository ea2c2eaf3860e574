#pragma once

#include <array>
#include <optional>

#include "xaip/plant/plant.hpp"
#include "xaip/xai/explanation.hpp"

namespace xaip::metrics {

enum class InteractionKind { WhatOnly, WhatWhy };

/// A completed exchange with the advisor within one step.
struct InteractionRecord {
  InteractionKind kind = InteractionKind::WhatOnly;
  plant::Action suggested = plant::Action::Skip;
  std::optional<xai::Explanation> explanation;  // required for WhatWhy
};

/// Feature each action primarily affects.
using ActionEffectTable = std::array<std::size_t, plant::kActionCount>;

/// Rod actions map to their rod, AddWater to the water level, Skip to power.
const ActionEffectTable& default_action_effects();

/// What-only exchanges count toward the feature the suggested action
/// affects; what+why exchanges toward the feature named in the explanation
/// (or the action's feature when no condition was tested). Throws
/// MetricError for a what+why record without an explanation.
std::size_t attribute_interaction(const InteractionRecord& record,
                                  const ActionEffectTable& effects = default_action_effects());

}  // namespace xaip::metrics
