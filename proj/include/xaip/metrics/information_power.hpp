#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "xaip/metrics/catalog.hpp"

namespace xaip::metrics {

/// Invalid metric input (bad weights, counts above the catalog total, ...).
class MetricError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Empirical weights requested from interaction counts that are all zero.
class DegenerateWeights : public MetricError {
 public:
  DegenerateWeights() : MetricError("all interaction counts are zero; no empirical weights") {}
};

inline constexpr double kWeightSumTolerance = 1e-9;

/// Informative weights gamma_j: each in [0, 1], summing to 1.
class WeightVector {
 public:
  explicit WeightVector(std::vector<double> gamma);

  const std::vector<double>& values() const { return gamma_; }
  std::size_t size() const { return gamma_.size(); }
  double operator[](std::size_t j) const { return gamma_[j]; }

 private:
  std::vector<double> gamma_;
};

WeightVector uniform_weights(std::size_t k);
/// gamma_j = count_j / sum(count); throws DegenerateWeights if all are zero.
WeightVector empirical_weights(std::span<const std::uint64_t> interaction_counts);

/// IP_i = a_m * sum_j gamma_j * learned_j / n_j^r.
double information_power_user(double accuracy, const WeightVector& weights, std::span<const int> learned,
                              const RuleCatalog& catalog);

/// IP = mean of the per-user values.
double information_power(std::span<const double> per_user);

}  // namespace xaip::metrics
