#include "drtraffic/world.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "drtraffic/errors.hpp"
#include "drtraffic/idm.hpp"

namespace drtraffic {

std::string_view traffic_mode_name(TrafficMode m) {
  switch (m) {
    case TrafficMode::kRuleBased: return "rule_based";
    case TrafficMode::kRuleBasedRandomized: return "randomized";
    case TrafficMode::kHighFidelity: return "high_fidelity";
  }
  return "?";
}

TrafficMode parse_traffic_mode(std::string_view name) {
  if (name == "rule_based" || name == "rule-based" || name == "none") return TrafficMode::kRuleBased;
  if (name == "randomized" || name == "rule_based_randomized" || name == "randomization") {
    return TrafficMode::kRuleBasedRandomized;
  }
  if (name == "high_fidelity" || name == "high-fidelity" || name == "frenet") {
    return TrafficMode::kHighFidelity;
  }
  throw ConfigError("unknown traffic mode '" + std::string(name) + "'");
}

void integrate_kinematics(double& s, double& v, double accel, double dt) {
  const double v_next = v + accel * dt;
  if (v_next >= 0.0) {
    s += v * dt + 0.5 * accel * dt * dt;
    v = v_next;
  } else {
    // Stops within the step: advance to the stopping point only.
    s += (accel < 0.0) ? v * v / (-2.0 * accel) : 0.0;
    v = 0.0;
  }
}

World::World(RoadNetwork network, SimConfig config, PlannerConfig planner)
    : network_(std::move(network)),
      config_(std::move(config)),
      planner_(std::move(planner)),
      spawn_rng_(config_.seed, StreamId::kSpawn),
      param_rng_(config_.seed, StreamId::kParams) {
  if (!(config_.dt > 0.0)) throw ConfigError("dt must be positive");
  if (config_.spawn_probability < 0.0 || config_.spawn_probability > 1.0) {
    throw ConfigError("spawn probability must lie in [0, 1]");
  }
  spawn_period_ = std::max(1L, std::lround(1.0 / config_.dt));
  planner_.dt = config_.dt;
}

const VehicleState* World::find(int id) const {
  for (const auto& v : vehicles_) {
    if (v.id == id) return &v;
  }
  return nullptr;
}

VehicleState* World::find(int id) {
  for (auto& v : vehicles_) {
    if (v.id == id) return &v;
  }
  return nullptr;
}

int World::add_vehicle(VehicleState v) {
  v.id = next_id_++;
  if (v.controller != Controller::kFrenetPlanned) {
    v.d = network_.lane_center(v.lane);
    v.d_d = 0.0;
    v.d_dd = 0.0;
  }
  vehicles_.push_back(std::move(v));
  ++metrics_.inserted;
  return vehicles_.back().id;
}

int World::add_agent(int lane, double s, double v) {
  VehicleState veh;
  veh.lane = lane;
  veh.s = s;
  veh.v = v;
  veh.length = config_.vehicle_length;
  veh.controller = Controller::kAgent;
  const int id = add_vehicle(std::move(veh));
  agent_id_ = id;
  return id;
}

void World::set_agent_lane(int lane) {
  if (!agent_id_) return;
  VehicleState* agent = find(*agent_id_);
  if (agent == nullptr || agent->lane == lane) return;
  agent->lane = lane;
  agent->d = network_.lane_center(lane);
  ++metrics_.lane_changes;
}

void World::remove_vehicle(int id) {
  std::erase_if(vehicles_, [id](const VehicleState& v) { return v.id == id; });
  if (agent_id_ && *agent_id_ == id) agent_id_.reset();
}

std::optional<World::Neighbor> World::leader_in_lane(int lane, double s, int exclude_id) const {
  std::optional<Neighbor> best;
  double best_s = 0.0;
  for (const auto& o : vehicles_) {
    if (o.lane != lane || o.id == exclude_id) continue;
    if (o.s > s || (o.s == s && o.id > exclude_id)) {
      if (!best || o.s < best_s) {
        best = Neighbor{o.id, o.rear() - s};
        best_s = o.s;
      }
    }
  }
  return best;
}

std::optional<World::Neighbor> World::follower_in_lane(int lane, double s, double length,
                                                       int exclude_id) const {
  std::optional<Neighbor> best;
  double best_s = 0.0;
  for (const auto& o : vehicles_) {
    if (o.lane != lane || o.id == exclude_id) continue;
    if (o.s < s || (o.s == s && o.id < exclude_id)) {
      if (!best || o.s > best_s) {
        best = Neighbor{o.id, (s - length) - o.s};
        best_s = o.s;
      }
    }
  }
  return best;
}

std::vector<VehicleState> World::spawn_step() {
  std::vector<VehicleState> spawned;
  if (steps_ % spawn_period_ != 0) return spawned;
  for (int lane = 0; lane < network_.lane_count_main; ++lane) {
    if (!spawn_rng_.bernoulli(config_.spawn_probability)) continue;
    const bool blocked = std::any_of(vehicles_.begin(), vehicles_.end(), [&](const auto& o) {
      return o.lane == lane && o.rear() < config_.spawn_block_distance;
    });
    if (blocked) {
      ++metrics_.blocked_spawns;
      continue;
    }
    VehicleState veh;
    veh.lane = lane;
    veh.s = 0.0;
    veh.length = config_.vehicle_length;
    if (config_.traffic_mode == TrafficMode::kRuleBasedRandomized) {
      veh.params = sample_params(config_.randomization, param_rng_);
    }
    veh.v = veh.params.idm.v0;
    if (const auto lead = leader_in_lane(lane, veh.s, -1)) {
      veh.v = std::min(veh.v, safe_speed(veh.params.idm, lead->gap, find(lead->id)->v));
    }
    veh.d = network_.lane_center(lane);
    veh.id = next_id_++;
    vehicles_.push_back(veh);
    spawned.push_back(veh);
    ++metrics_.spawned;
  }
  return spawned;
}

double World::leader_accel(const VehicleState& veh, int lane) const {
  const auto lead = leader_in_lane(lane, veh.s, veh.id);
  if (!lead) return idm_accel(veh.params.idm, veh.v, 0.0, std::nullopt);
  if (lead->gap <= 0.0) return veh.params.idm.a_min;
  return idm_accel(veh.params.idm, veh.v, lead->gap, find(lead->id)->v);
}

World::Command World::rule_based_command(VehicleState& veh) {
  Command cmd{leader_accel(veh, veh.lane), veh.lane, false};
  if (veh.lane == kRampLane || network_.lane_count_main < 2) return cmd;

  const double dt = config_.dt;
  const double v_safe_current = std::max(0.0, veh.v + cmd.accel * dt);
  LaneChangeInputs in;
  in.v = veh.v;
  in.length = veh.length;
  double accel_left = 0.0, accel_right = 0.0;
  const auto candidate = [&](int lane, double& accel_out) {
    LaneCandidate c;
    accel_out = leader_accel(veh, lane);
    c.profit = lane_profit(std::max(0.0, veh.v + accel_out * dt), v_safe_current,
                           network_.speed_limit);
    if (const auto lead = leader_in_lane(lane, veh.s, veh.id)) c.lead_gap = lead->gap;
    if (const auto lag = follower_in_lane(lane, veh.s, veh.length, veh.id)) {
      c.lag_gap = lag->gap;
      c.lag_speed = find(lag->id)->v;
    }
    return c;
  };
  if (veh.lane + 1 < network_.lane_count_main) in.left = candidate(veh.lane + 1, accel_left);
  if (veh.lane > 0) in.right = candidate(veh.lane - 1, accel_right);

  switch (decide_lane_change(in, veh.params.lc, veh.lc)) {
    case LaneDecision::kChangeLeft:
      cmd = {accel_left, veh.lane + 1, false};
      break;
    case LaneDecision::kChangeRight:
      cmd = {accel_right, veh.lane - 1, false};
      break;
    case LaneDecision::kStay:
      break;
  }
  return cmd;
}

World::Command World::frenet_command(VehicleState& veh) {
  const auto replan_steps =
      static_cast<std::size_t>(std::lround(planner_.replan_period / config_.dt));
  if (!veh.plan || veh.plan->index >= replan_steps) {
    PlanRequest req;
    req.current = {veh.s, veh.v, veh.a, veh.d, veh.d_d, veh.d_dd};
    req.ref_d = network_.lane_center(veh.lane);
    for (int lane = 0; lane < network_.lane_count_main; ++lane) {
      req.lane_centers.push_back(network_.lane_center(lane));
    }
    req.ref_speed = veh.params.idm.v0;
    if (const auto lead = leader_in_lane(veh.lane, veh.s, veh.id);
        lead && lead->gap < planner_.perception_radius) {
      const double v_lead = find(lead->id)->v;
      const double closing = (lead->gap - (veh.params.idm.s0 + v_lead * veh.params.idm.T)) /
                             planner_.horizon;
      req.ref_speed = std::clamp(v_lead + closing, 0.0, veh.params.idm.v0);
    }
    for (const auto& o : vehicles_) {
      if (o.id == veh.id) continue;
      if (std::abs(o.s - veh.s) > planner_.perception_radius) continue;
      // Same-lane followers are their own responsibility.
      if (o.s < veh.s && o.lane == veh.lane) continue;
      req.obstacles.push_back({o.s, o.v, o.d, o.length});
    }
    auto best = plan(req, planner_);
    if (!best) {
      veh.plan.reset();
      ++metrics_.frenet_fallbacks;
      return {veh.params.idm.a_min, veh.lane, false};
    }
    veh.plan = ActivePlan{std::move(best->samples), 0};
    ++metrics_.frenet_plans;
  }
  if (veh.plan->index + 1 >= veh.plan->samples.size()) {
    throw MissingTrajectory("vehicle " + std::to_string(veh.id) + " ran past its trajectory");
  }
  ++veh.plan->index;
  return {veh.plan->samples[veh.plan->index].s_dd, veh.lane, true};
}

void World::update_controllers() {
  const VehicleState* agent = agent_id_ ? find(*agent_id_) : nullptr;
  const bool high_fidelity = config_.traffic_mode == TrafficMode::kHighFidelity && agent;
  for (auto& veh : vehicles_) {
    if (veh.controller == Controller::kAgent) continue;
    const bool near = high_fidelity && veh.lane != kRampLane &&
                      std::abs(veh.s - agent->s) <= planner_.perception_radius;
    if (near && veh.controller == Controller::kRuleBased) {
      veh.controller = Controller::kFrenetPlanned;
      veh.plan.reset();
    } else if (!near && veh.controller == Controller::kFrenetPlanned) {
      veh.controller = Controller::kRuleBased;
      veh.plan.reset();
      veh.lane = network_.lane_at(veh.d);
      veh.d = network_.lane_center(veh.lane);
      veh.d_d = 0.0;
      veh.d_dd = 0.0;
      veh.lc = {};
    }
  }
}

void World::integrate(VehicleState& veh, double accel) const {
  veh.a = accel;
  integrate_kinematics(veh.s, veh.v, accel, config_.dt);
}

std::vector<std::pair<int, int>> World::step() {
  spawn_step();
  update_controllers();

  // Decide against a frozen snapshot, then apply.
  std::vector<Command> commands(vehicles_.size());
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    VehicleState& veh = vehicles_[i];
    switch (veh.controller) {
      case Controller::kRuleBased: commands[i] = rule_based_command(veh); break;
      case Controller::kFrenetPlanned: commands[i] = frenet_command(veh); break;
      case Controller::kAgent: commands[i] = {agent_accel_, veh.lane, false}; break;
    }
  }

  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    VehicleState& veh = vehicles_[i];
    const Command& cmd = commands[i];
    if (cmd.from_plan) {
      const FrenetState& st = veh.plan->samples[veh.plan->index];
      veh.s = st.s;
      veh.v = std::max(0.0, st.s_d);
      veh.a = st.s_dd;
      veh.d = st.d;
      veh.d_d = st.d_d;
      veh.d_dd = st.d_dd;
      const int lane = network_.lane_at(veh.d);
      if (lane != veh.lane) ++metrics_.lane_changes;
      veh.lane = lane;
      continue;
    }
    if (cmd.lane != veh.lane) {
      veh.lane = cmd.lane;
      veh.d = network_.lane_center(cmd.lane);
      ++metrics_.lane_changes;
    }
    if (veh.controller == Controller::kFrenetPlanned) {
      // Emergency fallback keeps the vehicle where it is laterally.
      veh.d_d = 0.0;
      veh.d_dd = 0.0;
    }
    integrate(veh, cmd.accel);
  }

  if (network_.has_ramp()) {
    for (auto& veh : vehicles_) {
      if (veh.lane == kRampLane && veh.s >= network_.merge_point_s) {
        veh.lane = 0;
        veh.d = network_.lane_center(0);
      }
    }
  }

  const long before = static_cast<long>(vehicles_.size());
  std::erase_if(vehicles_, [&](const VehicleState& v) {
    return v.controller != Controller::kAgent && v.s > network_.lane_length;
  });
  metrics_.despawned += before - static_cast<long>(vehicles_.size());

  time_ += config_.dt;
  ++steps_;

  std::vector<std::pair<int, int>> agent_pairs;
  std::vector<int> removed;
  for (const auto& [a, b] : detect_collisions()) {
    collision_log_.push_back({time_, a, b});
    if (agent_id_ && (a == *agent_id_ || b == *agent_id_)) {
      agent_pairs.emplace_back(a, b);
      continue;
    }
    for (int id : {a, b}) {
      if (std::find(removed.begin(), removed.end(), id) == removed.end()) removed.push_back(id);
    }
  }
  for (int id : removed) {
    if (agent_id_ && id == *agent_id_) continue;
    remove_vehicle(id);
    ++metrics_.collided_removed;
  }

  write_trace();
  return agent_pairs;
}

std::vector<std::pair<int, int>> World::detect_collisions() const {
  const auto effective_lane = [&](const VehicleState& v) {
    if (v.lane == kRampLane && network_.has_ramp() && v.s >= network_.merge_point_s) return 0;
    return v.lane;
  };
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    for (std::size_t j = i + 1; j < vehicles_.size(); ++j) {
      const VehicleState& x = vehicles_[i];
      const VehicleState& y = vehicles_[j];
      if (effective_lane(x) != effective_lane(y)) continue;
      const bool x_behind = x.s < y.s || (x.s == y.s && x.id < y.id);
      const VehicleState& follower = x_behind ? x : y;
      const VehicleState& leader = x_behind ? y : x;
      if (leader.rear() - follower.s < 0.0) pairs.emplace_back(follower.id, leader.id);
    }
  }
  return pairs;
}

double World::density_per_km(double lo, double hi) const {
  const auto count = std::count_if(vehicles_.begin(), vehicles_.end(), [&](const auto& v) {
    return v.lane >= 0 && v.controller != Controller::kAgent && v.s >= lo && v.s <= hi;
  });
  return static_cast<double>(count) / ((hi - lo) / 1000.0) / network_.lane_count_main;
}

void World::write_trace() const {
  if (trace_ == nullptr) return;
  for (const auto& v : vehicles_) {
    const nlohmann::json rec = {{"t", time_}, {"id", v.id}, {"lane", v.lane},
                                {"s", v.s},   {"v", v.v},   {"a", v.a}};
    *trace_ << rec.dump() << '\n';
  }
}

}  // namespace drtraffic
