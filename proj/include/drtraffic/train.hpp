#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "drtraffic/env.hpp"
#include "drtraffic/sac.hpp"

namespace drtraffic {

using EnvFactory = std::function<std::unique_ptr<RlEnv>()>;

struct TrainConfig {
  long budget = 50'000;  ///< env steps, warm-up included
  std::uint64_t seed = 0;
  long eval_interval = 0;  ///< 0 disables periodic evaluation
  int eval_episodes = 5;
  /// When set, the final (or aborted) agent is written here.
  std::filesystem::path checkpoint_path;
  /// Called after every finished training episode.
  std::function<void(long episode, double ret)> on_episode;
};

struct EpisodeRecord {
  long episode = 0;
  long end_step = 0;  ///< cumulative env steps when the episode ended
  long length = 0;
  double ret = 0.0;   ///< undiscounted
  Outcome outcome = Outcome::kRunning;
};

struct EvalPoint {
  long step = 0;
  double mean_return = 0.0;
  double success_rate = 0.0;
};

struct TrainResult {
  std::vector<EpisodeRecord> curve;
  std::vector<EvalPoint> evals;
  long env_steps = 0;
  long updates = 0;
  UpdateDiagnostics last;
};

/// Seed of training episode `i`; evaluation uses disjoint seeds.
std::uint64_t train_episode_seed(std::uint64_t seed, long i);
std::uint64_t eval_episode_seed(std::uint64_t seed, long i);

/// Off-policy loop: uniform random actions for the first warmup steps, then
/// the stochastic policy with `updates_per_step` updates after each step.
/// Timeouts are treated as truncation (no terminal cut in the target).
TrainResult train(const EnvFactory& factory, SacAgent& agent, const TrainConfig& cfg);

/// Deterministic-policy rollout; returns the undiscounted return and outcome.
EpisodeRecord run_episode(RlEnv& env, const SacAgent& agent, std::uint64_t seed);

void write_curve_csv(std::ostream& out, const std::vector<EpisodeRecord>& curve);

}  // namespace drtraffic
