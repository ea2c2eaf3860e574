#include "xaip/xai/user_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace xaip::xai {
namespace {

// Returns nullopt-like sentinel kActionCount when all counts are zero.
std::size_t modal(const UserModel::Counts& c) {
  std::size_t best = 0;
  for (std::size_t a = 1; a < c.size(); ++a) {
    if (c[a] > c[best]) best = a;
  }
  return c[best] == 0 ? kActionCount : best;
}

}  // namespace

UserModel::UserModel(plant::FeatureBox box, int bins) : box_(box), bins_(bins) {
  if (bins < 1 || bins > 255) throw std::invalid_argument("user model bins must be in 1..255");
}

UserModel::BinKey UserModel::bin_of(const PlantState& state) const {
  const auto x = plant::feature_vector(state);
  BinKey key{};
  for (std::size_t f = 0; f < plant::kFeatureCount; ++f) {
    if (plant::is_discrete_feature(f)) {
      key[f] = static_cast<std::uint8_t>(x[f]);
      continue;
    }
    const double width = box_.hi[f] - box_.lo[f];
    const double rel = width > 0.0 ? (x[f] - box_.lo[f]) / width : 0.0;
    const int b = static_cast<int>(std::floor(rel * bins_));
    key[f] = static_cast<std::uint8_t>(std::clamp(b, 0, bins_ - 1));
  }
  return key;
}

void UserModel::observe(const PlantState& state, Action action) {
  const auto a = static_cast<std::size_t>(action);
  ++table_[bin_of(state)][a];
  ++global_[a];
}

Action UserModel::predict(const PlantState& state) const {
  if (auto it = table_.find(bin_of(state)); it != table_.end()) {
    if (const auto a = modal(it->second); a < kActionCount) return static_cast<Action>(a);
  }
  if (const auto a = modal(global_); a < kActionCount) return static_cast<Action>(a);
  return Action::Skip;
}

std::uint64_t UserModel::count(const PlantState& state, Action action) const {
  auto it = table_.find(bin_of(state));
  return it == table_.end() ? 0 : it->second[static_cast<std::size_t>(action)];
}

std::uint64_t UserModel::global_count(Action action) const { return global_[static_cast<std::size_t>(action)]; }

std::uint64_t UserModel::observations() const {
  return std::accumulate(global_.begin(), global_.end(), std::uint64_t{0});
}

}  // namespace xaip::xai
