#include "xaip/metrics/information_power.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace xaip::metrics {

WeightVector::WeightVector(std::vector<double> gamma) : gamma_(std::move(gamma)) {
  if (gamma_.empty()) throw MetricError("weight vector is empty");
  double sum = 0.0;
  for (double g : gamma_) {
    if (!(g >= 0.0 && g <= 1.0)) throw MetricError(fmt::format("weight {} outside [0, 1]", g));
    sum += g;
  }
  if (std::abs(sum - 1.0) > kWeightSumTolerance) {
    throw MetricError(fmt::format("weights sum to {:.17g}, expected 1", sum));
  }
}

WeightVector uniform_weights(std::size_t k) {
  if (k == 0) throw MetricError("uniform weights need k >= 1");
  return WeightVector(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

WeightVector empirical_weights(std::span<const std::uint64_t> counts) {
  if (counts.empty()) throw MetricError("no features to weight");
  const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (total == 0) throw DegenerateWeights();
  std::vector<double> gamma;
  gamma.reserve(counts.size());
  for (auto c : counts) gamma.push_back(static_cast<double>(c) / static_cast<double>(total));
  return WeightVector(std::move(gamma));
}

double information_power_user(double accuracy, const WeightVector& weights, std::span<const int> learned,
                              const RuleCatalog& catalog) {
  const std::size_t k = catalog.feature_count();
  if (weights.size() != k) throw MetricError(fmt::format("{} weights for {} features", weights.size(), k));
  if (learned.size() != k) throw MetricError(fmt::format("{} learned counts for {} features", learned.size(), k));
  if (!(accuracy >= 0.0 && accuracy <= 1.0)) throw MetricError(fmt::format("accuracy {} outside [0, 1]", accuracy));
  double sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const int total = catalog.rules_for(j);
    if (learned[j] < 0 || learned[j] > total) {
      throw MetricError(fmt::format("feature {}: {} learned rules of {}", j, learned[j], total));
    }
    sum += weights[j] * (static_cast<double>(learned[j]) / total);
  }
  // Rounding may push a full score a hair past 1.
  return std::min(1.0, accuracy * sum);
}

double information_power(std::span<const double> per_user) {
  if (per_user.empty()) throw MetricError("information power needs at least one user");
  double sum = 0.0;
  for (double ip : per_user) {
    if (!(ip >= 0.0 && ip <= 1.0)) throw MetricError(fmt::format("per-user value {} outside [0, 1]", ip));
    sum += ip;
  }
  return std::min(1.0, sum / static_cast<double>(per_user.size()));
}

}  // namespace xaip::metrics
