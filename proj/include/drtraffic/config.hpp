#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "drtraffic/env.hpp"
#include "drtraffic/sac.hpp"

namespace drtraffic {

struct ExperimentSettings {
  std::vector<TrafficMode> train_flows{TrafficMode::kRuleBased, TrafficMode::kRuleBasedRandomized,
                                       TrafficMode::kHighFidelity};
  std::vector<TrafficMode> test_flows{TrafficMode::kRuleBased, TrafficMode::kRuleBasedRandomized,
                                      TrafficMode::kHighFidelity};
  long budget = 50'000;
  int eval_episodes = 1000;
  std::vector<double> phi_test;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  /// Empty means the scene's standard ablation grid.
  std::vector<std::string> ablations;
  std::string output_dir = "runs";
  long eval_interval = 0;
};

inline constexpr double kDeskTargetEntropy = -6.0;

/// One file configures environment, learner and experiment.
struct RunConfig {
  EnvConfig env;
  SacHyper sac;
  ExperimentSettings experiment;

  /// Desk scale: 25% of the full budgets, 2 x 64 networks, batch 128,
  /// target entropy kDeskTargetEntropy.
  static RunConfig defaults(Scene scene);
  /// Full budgets (200k merging / 400k freeway), 2 x 256 networks and
  /// the default target entropy.
  void apply_full_scale();
};

long desk_budget(Scene scene);
long full_budget(Scene scene);
std::vector<double> default_phi_grid(Scene scene);

/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& c);

/// FNV-1a over the canonical JSON dump, as 16 hex digits.
std::string fingerprint(const nlohmann::json& j);
std::string fnv1a_hex(const std::string& bytes);

}  // namespace drtraffic
