#include "drtraffic/env.hpp"

#include <string>

#include "drtraffic/errors.hpp"
#include "drtraffic/freeway_env.hpp"
#include "drtraffic/merging_env.hpp"

namespace drtraffic {

std::string_view scene_name(Scene s) { return s == Scene::kMerging ? "merging" : "freeway"; }

Scene parse_scene(std::string_view name) {
  if (name == "merging") return Scene::kMerging;
  if (name == "freeway") return Scene::kFreeway;
  throw ConfigError("unknown scene '" + std::string(name) + "'");
}

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::kRunning: return "running";
    case Outcome::kSuccess: return "success";
    case Outcome::kCollision: return "collision";
    case Outcome::kTimeout: return "timeout";
    case Outcome::kStopped: return "stopped";
  }
  return "?";
}

EnvConfig EnvConfig::merging_defaults() {
  EnvConfig c;
  c.scene = Scene::kMerging;
  c.sim.spawn_probability = 0.56;
  c.sim.episode_timeout = 60.0;
  c.warmup_seconds = 80.0;
  c.sensing_horizon = 200.0;
  c.agent_entry_speed = 8.33;
  c.accel_low = -4.5;
  c.accel_high = 2.5;
  c.planner.max_speed = 16.89;
  return c;
}

EnvConfig EnvConfig::freeway_defaults() {
  EnvConfig c;
  c.scene = Scene::kFreeway;
  c.sim.spawn_probability = 0.14;
  c.sim.episode_timeout = 120.0;
  c.warmup_seconds = 130.0;
  c.sensing_horizon = 100.0;
  c.agent_entry_speed = 8.89;
  c.accel_low = -4.5;
  c.accel_high = 2.6;
  c.planner.max_speed = 16.89;
  return c;
}

EnvConfig EnvConfig::defaults(Scene scene) {
  return scene == Scene::kMerging ? merging_defaults() : freeway_defaults();
}

std::unique_ptr<Env> make_env(const EnvConfig& config) {
  if (config.scene == Scene::kMerging) return std::make_unique<MergingEnv>(config);
  return std::make_unique<FreewayEnv>(config);
}

}  // namespace drtraffic
