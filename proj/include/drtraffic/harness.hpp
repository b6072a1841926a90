#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "drtraffic/config.hpp"
#include "drtraffic/env.hpp"
#include "drtraffic/sac.hpp"
#include "drtraffic/train.hpp"

namespace drtraffic {

struct WilsonInterval {
  double low = 0.0;
  double high = 0.0;

  bool operator==(const WilsonInterval&) const = default;
};

/// Wilson score interval for k successes in n trials (95% by default).
WilsonInterval wilson_interval(long k, long n, double z = 1.959963984540054);

struct EpisodeSummary {
  long index = 0;
  std::uint64_t seed = 0;
  Outcome outcome = Outcome::kRunning;
  long length = 0;
  double ret = 0.0;
  double speed_sum = 0.0;  ///< ego speed summed over controlled steps
};

struct EvalReport {
  std::string policy;
  Scene scene = Scene::kMerging;
  TrafficMode test_flow = TrafficMode::kRuleBased;
  double phi = 0.0;
  long episodes = 0;
  long successes = 0;
  long collisions = 0;
  long timeouts = 0;
  double success_rate = 0.0;
  double collision_rate = 0.0;
  double timeout_rate = 0.0;
  WilsonInterval success_ci;
  double average_reward = 0.0;  ///< per controlled step
  double average_return = 0.0;  ///< per episode
  double average_speed = 0.0;   ///< m/s over controlled steps
  std::string fingerprint;
  std::uint64_t seed = 0;

  bool operator==(const EvalReport&) const = default;
};

struct EvalOptions {
  int episodes = 1000;
  std::uint64_t seed = 0;
  bool parallel = true;
  /// Per-step JSONL; each episode is preceded by an {"episode", "seed"} record.
  std::ostream* trace = nullptr;
};

/// Deterministic-policy rollouts. The parallel path runs episodes on OpenMP
/// workers and reduces by episode index, so it returns exactly what the
/// serial path returns.
std::vector<EpisodeSummary> evaluate_episodes(const EnvConfig& env, const SacAgent& agent,
                                              const EvalOptions& opt);

EvalReport summarize(const std::vector<EpisodeSummary>& episodes, const EnvConfig& env,
                     std::string policy, std::uint64_t seed);

EvalReport evaluate(const EnvConfig& env, const SacAgent& agent, const EvalOptions& opt,
                    std::string policy);

void write_reports_csv(std::ostream& out, const std::vector<EvalReport>& reports);
std::vector<EvalReport> parse_reports_csv(std::istream& in);
void write_episodes_csv(std::ostream& out, const std::vector<EpisodeSummary>& episodes);

// ------------------------------------------------------------ experiments

/// A row of an experiment: how the training traffic was generated.
struct TrainVariant {
  std::string label;  ///< e.g. "randomized", "no_v_max", "none", "all"
  TrafficMode flow = TrafficMode::kRuleBased;
  RandomizationSpec randomization = RandomizationSpec::full();
};

/// The train-flow variants in the config's experiment block.
std::vector<TrainVariant> flow_variants(const RunConfig& cfg);
/// "none", "all", then one row per dropped parameter. Merging drops the five
/// car-following parameters; freeway also drops the two lane-change ones.
std::vector<TrainVariant> ablation_variants(const RunConfig& cfg);

struct TrainedPolicy {
  std::string label;  ///< variant label + seed
  std::string variant;
  std::uint64_t seed = 0;
  std::filesystem::path checkpoint;
  std::filesystem::path curve;
};

/// Creates `<base>/<name>-<fingerprint>`, writes config.json and env.txt.
/// Refuses to reuse an existing directory unless `force`.
std::filesystem::path make_run_directory(const std::filesystem::path& base, const std::string& name,
                                         const nlohmann::json& config, bool force);

EnvConfig variant_env(const RunConfig& cfg, const TrainVariant& v);

using Progress = std::function<void(const std::string&)>;

/// One policy per (variant, seed); checkpoints and learning curves go under
/// run_dir with the config fingerprint in every file name. With
/// `reuse_existing`, a checkpoint already present under its fingerprinted
/// name is taken as is instead of retraining.
std::vector<TrainedPolicy> run_training(const RunConfig& cfg, const std::vector<TrainVariant>& variants,
                                        const std::filesystem::path& run_dir,
                                        const Progress& progress = {}, bool reuse_existing = false);

/// Every policy under every test flow in the experiment block.
std::vector<EvalReport> run_cross_eval(const RunConfig& cfg, const std::vector<TrainedPolicy>& policies,
                                       const Progress& progress = {});

/// Every policy under high-fidelity flow at each phi.
std::vector<EvalReport> run_density_sweep(const RunConfig& cfg,
                                          const std::vector<TrainedPolicy>& policies,
                                          const std::vector<double>& phis,
                                          const Progress& progress = {});

/// Environment for testing under `flow`; the randomized flow always uses the
/// full randomization spec.
EnvConfig test_env(const RunConfig& cfg, TrafficMode flow, std::optional<double> phi = std::nullopt);

}  // namespace drtraffic
