// xaip command-line entry point.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "xaip/errors.hpp"
#include "xaip/experiment/harness.hpp"
#include "xaip/metrics/catalog.hpp"
#include "xaip/plant/plant_io.hpp"
#include "xaip/policy/cqi.hpp"
#include "xaip/policy/expert.hpp"
#include "xaip/policy/tree_io.hpp"
#include "xaip/rng.hpp"
#include "xaip/service/server.hpp"

namespace fs = std::filesystem;
using namespace xaip;

namespace {

plant::PlantConfig plant_or_default(const std::string& path) {
  return path.empty() ? plant::PlantConfig{} : plant::load_plant_config(path);
}

policy::CqiHyperparams hyperparams_from_file(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open {}", path));
  return policy::hyperparams_from_json(nlohmann::json::parse(in));
}

int cmd_train(const std::string& plant_path, const std::string& hp_path, std::uint64_t seed, int episodes,
              const std::string& out) {
  const auto config = plant_or_default(plant_path);
  auto hp = hyperparams_from_file(hp_path);
  if (episodes >= 0) hp.episodes = episodes;
  const auto start = std::chrono::steady_clock::now();
  const auto tree = policy::train_cqi(config, hp, seed);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  policy::save_tree(tree, out);
  fmt::print("trained {} episodes in {:.2f} s: {} nodes, depth {}, wrote {}\n", hp.episodes, secs, tree.size(),
             tree.max_depth(), out);
  return 0;
}

int cmd_eval(const std::string& tree_path, const std::string& plant_path, int episodes, std::uint64_t seed) {
  const auto config = plant_or_default(plant_path);
  const auto tree = policy::load_tree(tree_path);
  Rng rng(seed);
  const double greedy = policy::mean_episode_energy(policy::tree_policy(tree), config, episodes);
  const double random = policy::mean_episode_energy(policy::random_policy(rng), config, episodes);
  const double expert = policy::mean_episode_energy(policy::expert_policy(config), config, episodes);
  nlohmann::ordered_json j{{"episodes", episodes},
                           {"tree_mean_energy", greedy},
                           {"random_mean_energy", random},
                           {"expert_mean_energy", expert},
                           {"ratio_to_random", random > 0 ? greedy / random : 0.0}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_accuracy(const std::string& tree_path, const std::string& plant_path, int episodes, double exploration,
                 std::uint64_t seed) {
  const auto config = plant_or_default(plant_path);
  const auto tree = policy::load_tree(tree_path);
  const auto states = policy::sample_eval_states(config, episodes, exploration, seed);
  const double agreement = policy::policy_accuracy(tree, states, policy::expert_policy(config));
  const double tree_energy = policy::mean_episode_energy(policy::tree_policy(tree), config, 1);
  const double expert_energy = policy::mean_episode_energy(policy::expert_policy(config), config, 1);
  nlohmann::ordered_json j{{"states", states.size()},
                           {"agreement", agreement},
                           {"normalized_return", expert_energy > 0 ? std::min(1.0, tree_energy / expert_energy) : 0.0}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_experiment(const std::string& config_path, const std::string& out_dir, const std::string& tree_override,
                   const std::string& catalog_override) {
  auto config = experiment::load_experiment_config(config_path);
  if (!tree_override.empty()) config.tree_path = tree_override;
  if (!catalog_override.empty()) config.catalog_path = catalog_override;
  if (config.tree_path.empty()) throw ConfigError("experiment config names no tree (key \"tree\" or --tree)");
  if (config.catalog_path.empty()) config.catalog_path = fs::path(XAIP_DATA_DIR) / "rule_catalog.json";
  const auto tree = policy::load_tree(config.tree_path);
  const auto catalog = metrics::load_catalog(config.catalog_path);
  const auto start = std::chrono::steady_clock::now();
  const auto report = experiment::run_experiment(config, tree, catalog);
  experiment::write_report(report, out_dir);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (const auto& arm : report.arms) {
    fmt::print("{:<11} IP = {:.6f}\n", xai::mode_name(arm.mode), arm.ip.aggregate);
  }
  fmt::print("a_m = {:.4f}; {} sessions in {:.2f} s; wrote {}\n", report.accuracy,
             report.arms.size() * static_cast<std::size_t>(config.users_per_arm), secs, out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xaip: plant simulator, tree-policy advisor and information-power experiments"};
  app.require_subcommand(1);

  std::string plant_path, hp_path, out = "tree.json", tree_path, catalog_path, config_path, out_dir, mode;
  std::uint64_t seed = 42, eval_seed = 7, sample_seed = 1;
  int episodes = -1, eval_episodes = 100, sample_episodes = 20;
  double exploration = 0.2;

  auto* train = app.add_subcommand("train", "train a tree policy with Conservative Q-Improvement");
  train->add_option("--plant", plant_path, "plant config JSON");
  train->add_option("--hyperparams", hp_path, "CQI hyperparameter JSON");
  train->add_option("--seed", seed, "training seed");
  train->add_option("--episodes", episodes, "override the episode count");
  train->add_option("--out", out, "output tree file");

  auto* eval = app.add_subcommand("eval", "compare tree, random and scripted-expert episode energy");
  eval->add_option("--tree", tree_path, "tree file")->required();
  eval->add_option("--plant", plant_path, "plant config JSON");
  eval->add_option("--episodes", eval_episodes, "evaluation episodes");
  eval->add_option("--seed", eval_seed, "seed of the random baseline");

  auto* accuracy = app.add_subcommand("accuracy", "agreement of the tree with the scripted expert (a_m)");
  accuracy->add_option("--tree", tree_path, "tree file")->required();
  accuracy->add_option("--plant", plant_path, "plant config JSON");
  accuracy->add_option("--episodes", sample_episodes, "episodes used to sample states");
  accuracy->add_option("--exploration", exploration, "fraction of random moves while sampling");
  accuracy->add_option("--seed", sample_seed, "sampling seed");

  auto* experiment = app.add_subcommand("experiment", "synthetic-user experiments");
  experiment->require_subcommand(1);
  auto* run = experiment->add_subcommand("run", "run an experiment config");
  run->add_option("--config", config_path, "experiment config JSON")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--tree", tree_path, "override the config's tree file");
  run->add_option("--catalog", catalog_path, "override the rule catalog");

  std::string serve_config;
  auto* serve = app.add_subcommand("serve", "serve live sessions over HTTP");
  serve->add_option("--tree", tree_path, "tree file");
  serve->add_option("--mode", mode, "classical or user-aware");
  serve->add_option("--config", serve_config, "service config JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(plant_path, hp_path, seed, episodes, out);
    if (*eval) return cmd_eval(tree_path, plant_path, eval_episodes, eval_seed);
    if (*accuracy) return cmd_accuracy(tree_path, plant_path, sample_episodes, exploration, sample_seed);
    if (*run) return cmd_experiment(config_path, out_dir, tree_path, catalog_path);
    if (*serve) {
      auto options = service::load_server_options(serve_config, tree_path, mode);
      return service::run_server(options);
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
