#include "xaip/metrics/attribution.hpp"

#include "xaip/metrics/information_power.hpp"

namespace xaip::metrics {

using plant::Feature;
using plant::feature_index;

const ActionEffectTable& default_action_effects() {
  static const ActionEffectTable table = {
      feature_index(Feature::Security),   feature_index(Feature::Security),
      feature_index(Feature::Fuel),       feature_index(Feature::Fuel),
      feature_index(Feature::Sustain),    feature_index(Feature::Sustain),
      feature_index(Feature::Sustain),    feature_index(Feature::Regulatory),
      feature_index(Feature::Regulatory), feature_index(Feature::Regulatory),
      feature_index(Feature::WaterLevel), feature_index(Feature::Power),
  };
  return table;
}

std::size_t attribute_interaction(const InteractionRecord& record, const ActionEffectTable& effects) {
  const std::size_t by_action = effects[static_cast<std::size_t>(record.suggested)];
  if (record.kind == InteractionKind::WhatOnly) return by_action;
  if (!record.explanation) throw MetricError("what+why interaction without an explanation");
  if (!record.explanation->node) return by_action;
  return record.explanation->feature;
}

}  // namespace xaip::metrics
