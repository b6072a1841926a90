#pragma once

#include <cstdint>
#include <memory>
#include <ostream>
#include <string_view>
#include <vector>

#include "drtraffic/frenet.hpp"
#include "drtraffic/rewards.hpp"
#include "drtraffic/road.hpp"
#include "drtraffic/world.hpp"

namespace drtraffic {

enum class Scene { kMerging, kFreeway };

std::string_view scene_name(Scene s);
Scene parse_scene(std::string_view name);

enum class Outcome { kRunning, kSuccess, kCollision, kTimeout, kStopped };

std::string_view outcome_name(Outcome o);

struct ActionSpace {
  std::vector<double> low;
  std::vector<double> high;
  int discrete_count = 0;  ///< 0 for purely continuous spaces
};

struct EnvAction {
  std::vector<double> continuous;
  int discrete = 0;
};

struct StepResult {
  std::vector<double> observation;
  double reward = 0.0;
  std::vector<RewardTerm> reward_terms;
  bool done = false;
  Outcome outcome = Outcome::kRunning;
};

/// Everything needed to build either environment. Scene-specific fields are
/// ignored by the other scene.
struct EnvConfig {
  Scene scene = Scene::kMerging;
  SimConfig sim;
  GeometryOverrides geometry;
  PlannerConfig planner;
  double warmup_seconds = 80.0;
  /// Neighbor padding distance and sensing range.
  double sensing_horizon = 200.0;
  double agent_entry_speed = 8.33;
  MergingRewardParams merging_reward;
  FreewayRewardParams freeway_reward;
  double freeway_ego_start_s = 10.0;
  double accel_low = -4.5;
  double accel_high = 2.5;

  static EnvConfig merging_defaults();
  static EnvConfig freeway_defaults();
  static EnvConfig defaults(Scene scene);
};

/// Minimal reset/step interface the learner needs.
class RlEnv {
 public:
  virtual ~RlEnv() = default;

  virtual std::size_t observation_dim() const = 0;
  virtual ActionSpace action_space() const = 0;
  /// Divisors applied learner-side; raw units are what reset/step return.
  virtual std::vector<double> observation_scale() const = 0;
  virtual std::vector<double> reset(std::uint64_t seed) = 0;
  /// Throws EpisodeFinished once the episode is done.
  virtual StepResult step(const EnvAction& action) = 0;
  virtual bool done() const = 0;
};

/// Traffic environment: a reset/step state machine over a World.
class Env : public RlEnv {
 public:
  virtual Scene scene() const = 0;
  virtual double ego_speed() const = 0;
  virtual const World& world() const = 0;
  virtual void set_trace(std::ostream* out) = 0;
};

std::unique_ptr<Env> make_env(const EnvConfig& config);

}  // namespace drtraffic
