#include "xaip/policy/cqi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "xaip/errors.hpp"

namespace xaip::policy {
namespace {

using plant::PlantConfig;
using plant::PlantState;

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid CQI hyperparameters: " + what);
}

template <typename Fn>
void for_each_field(CqiHyperparams& hp, Fn&& fn) {
  fn("discount", hp.discount);
  fn("learning_rate", hp.learning_rate);
  fn("split_threshold", hp.split_threshold);
  fn("threshold_decay", hp.threshold_decay);
  fn("candidate_thresholds", hp.candidate_thresholds);
  fn("max_depth", hp.max_depth);
  fn("episodes", hp.episodes);
  fn("epsilon_start", hp.epsilon_start);
  fn("epsilon_end", hp.epsilon_end);
  fn("damage_penalty", hp.damage_penalty);
  fn("leaf_sample_size", hp.leaf_sample_size);
  fn("min_side_visits", hp.min_side_visits);
}

double max_q(const QValues& q) { return *std::max_element(q.begin(), q.end()); }

struct Candidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  std::array<QValues, 2> q{};
  std::array<std::uint64_t, 2> count{};
};

struct Node {
  bool leaf = true;
  int depth = 0;
  // Split fields.
  std::size_t feature = 0;
  double threshold = 0.0;
  std::size_t left = 0;
  std::size_t right = 0;
  // Leaf fields.
  QValues q{};
  std::uint64_t visits = 0;
  // Region as (lo, hi] per feature.
  std::array<double, kFeatureCount> lo{};
  std::array<double, kFeatureCount> hi{};
  std::vector<FeatureVector> samples;
  std::uint64_t seen = 0;
  bool candidates_ready = false;
  std::vector<Candidate> candidates;
};

}  // namespace

void CqiHyperparams::validate() const {
  require(discount >= 0.0 && discount < 1.0, "discount in [0, 1)");
  require(learning_rate > 0.0 && learning_rate <= 1.0, "learning_rate in (0, 1]");
  require(split_threshold > 0.0, "split_threshold > 0");
  require(threshold_decay > 0.0 && threshold_decay < 1.0, "threshold_decay in (0, 1)");
  require(candidate_thresholds >= 1, "candidate_thresholds >= 1");
  require(max_depth >= 1, "max_depth >= 1");
  require(episodes >= 0, "episodes >= 0");
  require(epsilon_start >= 0.0 && epsilon_start <= 1.0, "epsilon_start in [0, 1]");
  require(epsilon_end >= 0.0 && epsilon_end <= epsilon_start, "epsilon_end in [0, epsilon_start]");
  require(damage_penalty >= 0.0, "damage_penalty >= 0");
  require(leaf_sample_size >= 2, "leaf_sample_size >= 2");
  require(min_side_visits >= 1, "min_side_visits >= 1");
}

nlohmann::ordered_json hyperparams_to_json(const CqiHyperparams& hp) {
  nlohmann::ordered_json doc;
  doc["schema"] = kCqiSchema;
  CqiHyperparams copy = hp;
  for_each_field(copy, [&](const char* key, auto& v) { doc[key] = v; });
  return doc;
}

CqiHyperparams hyperparams_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw FormatError("CQI hyperparameters must be a JSON object");
  if (doc.contains("schema") && doc.at("schema") != kCqiSchema) {
    throw FormatError(std::string("CQI hyperparameter schema must be ") + kCqiSchema);
  }
  CqiHyperparams hp;
  std::map<std::string, bool> known{{"schema", true}};
  for_each_field(hp, [&](const char* key, auto& v) {
    known[key] = true;
    if (auto it = doc.find(key); it != doc.end()) it->get_to(v);
  });
  for (const auto& [key, _] : doc.items()) {
    if (!known.count(key)) throw FormatError("unknown CQI hyperparameter '" + key + "'");
  }
  hp.validate();
  return hp;
}

struct CqiTrainer::Impl {
  PlantConfig config;
  CqiHyperparams hp;
  std::uint64_t seed;
  Rng rng;
  std::vector<Node> nodes;
  double threshold;
  int episodes_done = 0;
  std::size_t splits = 0;

  Impl(PlantConfig c, CqiHyperparams h, std::uint64_t s)
      : config(std::move(c)), hp(h), seed(s), rng(s), threshold(h.split_threshold) {
    config.validate();
    hp.validate();
    Node root;
    root.lo.fill(-kInf);
    root.hi.fill(kInf);
    nodes.push_back(std::move(root));
  }

  std::size_t find_leaf(const FeatureVector& x) const {
    std::size_t i = 0;
    while (!nodes[i].leaf) i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
    return i;
  }

  double epsilon() const {
    if (hp.episodes <= 1) return hp.epsilon_end;
    const double frac = std::min(1.0, static_cast<double>(episodes_done) / (hp.episodes - 1));
    return hp.epsilon_start + (hp.epsilon_end - hp.epsilon_start) * frac;
  }

  void build_candidates(Node& leaf) {
    leaf.candidates.clear();
    auto add = [&](std::size_t f, double t) {
      Candidate c;
      c.feature = f;
      c.threshold = t;
      c.q = {leaf.q, leaf.q};
      leaf.candidates.push_back(c);
    };
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      if (plant::is_discrete_feature(f)) {
        const auto levels = plant::feature_levels(f);
        for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
          if (levels[i] > leaf.lo[f] && levels[i + 1] <= leaf.hi[f]) add(f, 0.5 * (levels[i] + levels[i + 1]));
        }
        continue;
      }
      std::vector<double> values;
      values.reserve(leaf.samples.size());
      for (const auto& s : leaf.samples) values.push_back(s[f]);
      std::sort(values.begin(), values.end());
      const double top = values.back();
      double last = -kInf;
      const int k = hp.candidate_thresholds;
      for (int i = 1; i <= k; ++i) {
        const auto idx = static_cast<std::size_t>(i * values.size() / (k + 1));
        const double t = values[std::min(idx, values.size() - 1)];
        if (t > last && t < top) {
          add(f, t);
          last = t;
        }
      }
    }
    leaf.candidates_ready = true;
  }

  void observe_sample(Node& leaf, const FeatureVector& x) {
    ++leaf.seen;
    const auto cap = static_cast<std::size_t>(hp.leaf_sample_size);
    if (leaf.samples.size() < cap) {
      leaf.samples.push_back(x);
    } else {
      const auto j = rng.below(leaf.seen);
      if (j < cap) leaf.samples[j] = x;
    }
    if (!leaf.candidates_ready && leaf.samples.size() >= cap) build_candidates(leaf);
  }

  void split(std::size_t idx, const Candidate& c) {
    Node children[2];
    for (int side = 0; side < 2; ++side) {
      Node& child = children[side];
      child.depth = nodes[idx].depth + 1;
      child.q = c.q[side];
      child.visits = c.count[side];
      child.lo = nodes[idx].lo;
      child.hi = nodes[idx].hi;
      if (side == 0) child.hi[c.feature] = std::min(child.hi[c.feature], c.threshold);
      else child.lo[c.feature] = std::max(child.lo[c.feature], c.threshold);
    }
    for (const auto& s : nodes[idx].samples) {
      Node& child = children[s[c.feature] <= c.threshold ? 0 : 1];
      child.samples.push_back(s);
      ++child.seen;
    }
    for (Node& child : children) {
      if (child.samples.size() >= static_cast<std::size_t>(hp.leaf_sample_size)) build_candidates(child);
    }
    const std::size_t left = nodes.size();
    nodes.push_back(std::move(children[0]));
    nodes.push_back(std::move(children[1]));
    Node& parent = nodes[idx];
    parent.leaf = false;
    parent.feature = c.feature;
    parent.threshold = c.threshold;
    parent.left = left;
    parent.right = left + 1;
    parent.samples.clear();
    parent.samples.shrink_to_fit();
    parent.candidates.clear();
    parent.candidates.shrink_to_fit();
    ++splits;
  }

  void update(std::size_t idx, const FeatureVector& x, Action action, double target) {
    const auto a = static_cast<std::size_t>(action);
    const double alpha = hp.learning_rate;
    {
      Node& leaf = nodes[idx];
      leaf.q[a] += alpha * (target - leaf.q[a]);
      ++leaf.visits;
      for (Candidate& c : leaf.candidates) {
        const int side = x[c.feature] <= c.threshold ? 0 : 1;
        c.q[side][a] += alpha * (target - c.q[side][a]);
        ++c.count[side];
      }
      observe_sample(leaf, x);
    }

    const Node& leaf = nodes[idx];
    if (leaf.candidates_ready && leaf.depth < hp.max_depth) {
      const double base = max_q(leaf.q);
      const Candidate* best = nullptr;
      double best_gain = -kInf;
      const auto min_visits = static_cast<std::uint64_t>(hp.min_side_visits);
      for (const Candidate& c : leaf.candidates) {
        if (c.count[0] < min_visits || c.count[1] < min_visits) continue;
        const double total = static_cast<double>(c.count[0] + c.count[1]);
        const double gain = (c.count[0] / total) * max_q(c.q[0]) + (c.count[1] / total) * max_q(c.q[1]) - base;
        if (gain > best_gain) {
          best_gain = gain;
          best = &c;
        }
      }
      if (best != nullptr && best_gain > threshold) {
        const Candidate chosen = *best;
        split(idx, chosen);
        threshold = hp.split_threshold;
        return;
      }
    }
    threshold *= hp.threshold_decay;
  }

  void run_episode() {
    const double eps = epsilon();
    PlantState s = plant::new_plant(config);
    while (!plant::is_terminal(s, config)) {
      const FeatureVector x = plant::feature_vector(s);
      const std::size_t leaf = find_leaf(x);
      const Action a = rng.bernoulli(eps) ? static_cast<Action>(rng.below(kActionCount))
                                          : argmax_action(nodes[leaf].q);
      const plant::StepOutcome out = plant::apply_action(s, a, config);
      double reward = out.energy_produced;
      if (out.next_state.damaged) reward -= hp.damage_penalty;
      double target = reward;
      if (!plant::is_terminal(out.next_state, config)) {
        target += hp.discount * max_q(nodes[find_leaf(plant::feature_vector(out.next_state))].q);
      }
      update(leaf, x, a, target);
      s = out.next_state;
    }
    ++episodes_done;
  }

  TreeSpec to_spec(std::size_t idx) const {
    const Node& n = nodes[idx];
    if (n.leaf) return TreeSpec::leaf(n.q, n.visits);
    return TreeSpec::split(n.feature, n.threshold, to_spec(n.left), to_spec(n.right));
  }
};

CqiTrainer::CqiTrainer(PlantConfig config, CqiHyperparams hp, std::uint64_t seed)
    : impl_(std::make_unique<Impl>(std::move(config), hp, seed)) {}
CqiTrainer::~CqiTrainer() = default;
CqiTrainer::CqiTrainer(CqiTrainer&&) noexcept = default;
CqiTrainer& CqiTrainer::operator=(CqiTrainer&&) noexcept = default;

void CqiTrainer::run_episodes(int n) {
  for (int i = 0; i < n && impl_->episodes_done < impl_->hp.episodes; ++i) impl_->run_episode();
}

void CqiTrainer::run_to_completion() { run_episodes(impl_->hp.episodes - impl_->episodes_done); }

int CqiTrainer::episodes_done() const { return impl_->episodes_done; }
std::size_t CqiTrainer::split_count() const { return impl_->splits; }
double CqiTrainer::current_threshold() const { return impl_->threshold; }

DecisionTreePolicy CqiTrainer::snapshot() const {
  TreeMetadata meta;
  meta.training["algorithm"] = "conservative_q_improvement";
  meta.training["seed"] = impl_->seed;
  meta.training["episodes_run"] = impl_->episodes_done;
  meta.training["splits"] = impl_->splits;
  meta.training["hyperparams"] = hyperparams_to_json(impl_->hp);
  return DecisionTreePolicy(impl_->to_spec(0), std::move(meta));
}

DecisionTreePolicy train_cqi(const PlantConfig& config, const CqiHyperparams& hp, std::uint64_t seed) {
  CqiTrainer trainer(config, hp, seed);
  trainer.run_to_completion();
  return trainer.snapshot();
}

}  // namespace xaip::policy
