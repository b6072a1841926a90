#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "drtraffic/frenet.hpp"
#include "drtraffic/randomization.hpp"
#include "drtraffic/rng.hpp"
#include "drtraffic/road.hpp"

namespace drtraffic {

enum class Controller { kRuleBased, kFrenetPlanned, kAgent };

enum class TrafficMode { kRuleBased, kRuleBasedRandomized, kHighFidelity };

std::string_view traffic_mode_name(TrafficMode m);
/// "rule_based" | "randomized" | "high_fidelity" (plus a few aliases).
TrafficMode parse_traffic_mode(std::string_view name);

struct SimConfig {
  double dt = 0.1;
  /// Spawn probability per entry lane at every 1 s boundary.
  double spawn_probability = 0.56;
  std::uint64_t seed = 0;
  TrafficMode traffic_mode = TrafficMode::kRuleBased;
  /// Used only in kRuleBasedRandomized; per-parameter enable flags live here.
  RandomizationSpec randomization = RandomizationSpec::full();
  double episode_timeout = 60.0;
  double spawn_block_distance = 15.0;
  double vehicle_length = 5.0;
};

/// Trajectory a Frenet-planned vehicle is currently executing.
struct ActivePlan {
  std::vector<FrenetState> samples;
  std::size_t index = 0;
};

struct VehicleState {
  int id = -1;
  int lane = 0;
  double s = 0.0;  ///< front bumper, main-road coordinates
  double v = 0.0;
  double a = 0.0;
  double length = 5.0;
  DriverParams params;
  Controller controller = Controller::kRuleBased;
  LaneChangeState lc;
  // Lateral state; rule-based vehicles sit on their lane center.
  double d = 0.0, d_d = 0.0, d_dd = 0.0;
  std::optional<ActivePlan> plan;

  double rear() const { return s - length; }
};

struct WorldMetrics {
  long spawned = 0;
  long inserted = 0;  ///< vehicles added directly (agent, scripted tests)
  long despawned = 0;
  long collided_removed = 0;
  long blocked_spawns = 0;
  long lane_changes = 0;
  long frenet_plans = 0;
  long frenet_fallbacks = 0;
};

struct CollisionEvent {
  double t = 0.0;
  int first = -1;
  int second = -1;
};

/// A single-threaded traffic world on one road network. Instances share no
/// state and may be moved between threads.
class World {
 public:
  World(RoadNetwork network, SimConfig config, PlannerConfig planner = {});

  const RoadNetwork& network() const { return network_; }
  const SimConfig& config() const { return config_; }
  const PlannerConfig& planner() const { return planner_; }
  double time() const { return time_; }
  long step_count() const { return steps_; }
  const WorldMetrics& metrics() const { return metrics_; }
  const std::vector<VehicleState>& vehicles() const { return vehicles_; }
  const std::vector<CollisionEvent>& collision_log() const { return collision_log_; }

  const VehicleState* find(int id) const;
  VehicleState* find(int id);

  /// Inserts a vehicle, assigning its id. Returns the id.
  int add_vehicle(VehicleState v);
  /// Inserts the externally controlled vehicle with default driver params.
  int add_agent(int lane, double s, double v);
  std::optional<int> agent_id() const { return agent_id_; }
  void set_agent_accel(double accel) { agent_accel_ = accel; }
  /// Instantaneous lane reassignment of the agent.
  void set_agent_lane(int lane);
  void remove_vehicle(int id);

  /// Runs the spawner for the current clock (no-op off the 1 s grid).
  std::vector<VehicleState> spawn_step();

  /// One dt: spawn, control, kinematics, despawn, collision handling.
  /// Returns the collision pairs that involve the agent; other colliding
  /// vehicles are removed and logged.
  std::vector<std::pair<int, int>> step();

  /// Same-lane pairs (follower id, leader id) whose bumper gap is negative.
  /// Ramp vehicles only conflict with lane 0 once past the merge point.
  std::vector<std::pair<int, int>> detect_collisions() const;

  /// Nearest vehicle ahead of / behind position s in a lane, excluding
  /// `exclude_id`. Bumper gaps are measured from a vehicle of given length
  /// whose front is at s.
  struct Neighbor {
    int id;
    double gap;
  };
  std::optional<Neighbor> leader_in_lane(int lane, double s, int exclude_id) const;
  std::optional<Neighbor> follower_in_lane(int lane, double s, double length, int exclude_id) const;

  /// JSONL sink, one record per vehicle per step (t, id, lane, s, v, a).
  void set_trace(std::ostream* out) { trace_ = out; }

  /// Vehicles per km on the main road (all lanes combined) within [lo, hi].
  double density_per_km(double lo, double hi) const;

  /// Steps per spawn period (1 s / dt).
  long spawn_period_steps() const { return spawn_period_; }

 private:
  struct Command {
    double accel = 0.0;
    int lane = 0;
    bool from_plan = false;
  };

  Command rule_based_command(VehicleState& veh);
  Command frenet_command(VehicleState& veh);
  double leader_accel(const VehicleState& veh, int lane) const;
  void update_controllers();
  void integrate(VehicleState& veh, double accel) const;
  void write_trace() const;

  RoadNetwork network_;
  SimConfig config_;
  PlannerConfig planner_;
  RngStream spawn_rng_;
  RngStream param_rng_;
  std::vector<VehicleState> vehicles_;
  std::vector<CollisionEvent> collision_log_;
  WorldMetrics metrics_;
  std::optional<int> agent_id_;
  double agent_accel_ = 0.0;
  double time_ = 0.0;
  long steps_ = 0;
  long spawn_period_ = 10;
  int next_id_ = 0;
  std::ostream* trace_ = nullptr;
};

/// Integrates one step with the velocity clamp: when the speed would cross
/// zero the vehicle stops exactly at its stopping point.
void integrate_kinematics(double& s, double& v, double accel, double dt);

}  // namespace drtraffic
