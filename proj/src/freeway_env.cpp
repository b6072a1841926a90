#include "drtraffic/freeway_env.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "drtraffic/errors.hpp"
#include "drtraffic/idm.hpp"

namespace drtraffic {

namespace {

constexpr double kMinInsertLeadGap = 20.0;
constexpr double kMinInsertLagGap = 5.0;
constexpr int kMaxInsertWaitSteps = 600;

}  // namespace

FreewayEnv::FreewayEnv(EnvConfig config)
    : config_(std::move(config)), network_(build_network(RoadKind::kFreeway, config_.geometry)) {}

ActionSpace FreewayEnv::action_space() const {
  return {{config_.accel_low}, {config_.accel_high}, 2};
}

std::vector<double> FreewayEnv::observation_scale() const {
  const double d = config_.sensing_horizon;
  const double v = config_.freeway_reward.v_safe;
  return {d, d, d, d, v, v, v, v, v, std::abs(config_.accel_low)};
}

void FreewayEnv::set_trace(std::ostream* out) {
  trace_ = out;
  if (world_) world_->set_trace(out);
}

double FreewayEnv::ego_speed() const {
  const VehicleState* agent = world_ ? world_->find(agent_) : nullptr;
  return agent ? agent->v : 0.0;
}

std::vector<double> FreewayEnv::reset(std::uint64_t seed) {
  SimConfig sim = config_.sim;
  sim.seed = seed;
  world_.emplace(network_, sim, config_.planner);

  const auto warmup_steps = std::lround(config_.warmup_seconds / sim.dt);
  for (long i = 0; i < warmup_steps; ++i) world_->step();

  RngStream rng(seed, StreamId::kEnv);
  const int first = static_cast<int>(rng.below(static_cast<std::uint64_t>(network_.lane_count_main)));
  const double s0 = config_.freeway_ego_start_s;
  const double length = sim.vehicle_length;
  agent_ = -1;
  for (int wait = 0; agent_ < 0; ++wait) {
    for (int k = 0; k < network_.lane_count_main && agent_ < 0; ++k) {
      const int lane = (first + k) % network_.lane_count_main;
      const auto lead = world_->leader_in_lane(lane, s0, -1);
      const auto lag = world_->follower_in_lane(lane, s0, length, -1);
      if (lead && lead->gap < kMinInsertLeadGap) continue;
      if (lag && lag->gap < kMinInsertLagGap) continue;
      double v = config_.agent_entry_speed;
      if (lead) v = std::min(v, safe_speed(IdmParams{}, lead->gap, world_->find(lead->id)->v));
      agent_ = world_->add_agent(lane, s0, v);
    }
    if (agent_ < 0) {
      if (wait >= kMaxInsertWaitSteps) {
        throw std::runtime_error("freeway entry stayed blocked; cannot insert ego vehicle");
      }
      world_->step();
    }
  }
  world_->set_trace(trace_);
  start_time_ = world_->time();
  done_ = false;
  return observe();
}

double FreewayEnv::leader_gap() const {
  const VehicleState* ego = world_->find(agent_);
  const auto lead = world_->leader_in_lane(ego->lane, ego->s, agent_);
  if (!lead || lead->gap > config_.sensing_horizon) return config_.sensing_horizon;
  return lead->gap;
}

std::vector<double> FreewayEnv::observe() const {
  const VehicleState* ego = world_->find(agent_);
  const double h = config_.sensing_horizon;
  const int other = ego->lane + 1 < network_.lane_count_main ? ego->lane + 1 : ego->lane - 1;

  const auto ahead = [&](int lane) -> std::pair<double, double> {
    const auto n = world_->leader_in_lane(lane, ego->s, agent_);
    if (!n || n->gap > h) return {h, ego->v};
    return {std::max(0.0, n->gap), world_->find(n->id)->v};
  };
  const auto behind = [&](int lane) -> std::pair<double, double> {
    const auto n = world_->follower_in_lane(lane, ego->s, ego->length, agent_);
    if (!n || n->gap > h) return {h, ego->v};
    return {std::max(0.0, n->gap), world_->find(n->id)->v};
  };
  const auto [d_p, v_p] = ahead(ego->lane);
  const auto [d_f, v_f] = behind(ego->lane);
  const auto [d_ap, v_ap] = ahead(other);
  const auto [d_af, v_af] = behind(other);
  return {d_p, d_f, d_ap, d_af, v_p, v_f, v_ap, v_af, ego->v, ego->a};
}

StepResult FreewayEnv::step(const EnvAction& action) {
  if (done_) throw EpisodeFinished("freeway episode already finished; call reset");
  const double requested = action.continuous.empty() ? 0.0 : action.continuous[0];
  const double accel = std::clamp(requested, config_.accel_low, config_.accel_high);
  const VehicleState* ego = world_->find(agent_);
  const double prev_accel = ego->a;

  const bool lane_changed = action.discrete == 1;
  if (lane_changed) {
    const int lane = ego->lane + 1 < network_.lane_count_main ? ego->lane + 1 : ego->lane - 1;
    world_->set_agent_lane(lane);
  }
  world_->set_agent_accel(accel);
  const bool collision = !world_->step().empty();
  ego = world_->find(agent_);
  const bool success = !collision && ego->s >= network_.lane_length;
  const bool timeout = world_->time() - start_time_ >= config_.sim.episode_timeout - 1e-9;

  FreewaySnapshot snap;
  snap.d_p = leader_gap();
  snap.v_ego = ego->v;
  snap.a_t = accel;
  snap.a_prev = prev_accel;
  snap.lane_changed = lane_changed;
  snap.collision = collision;
  const RewardBreakdown r = freeway_reward(snap, config_.freeway_reward);

  StepResult out;
  out.observation = observe();
  out.reward = r.total;
  out.reward_terms = r.terms;
  if (collision) {
    out.outcome = Outcome::kCollision;
  } else if (success) {
    out.outcome = Outcome::kSuccess;
  } else if (timeout) {
    out.outcome = Outcome::kTimeout;
  }
  out.done = out.outcome != Outcome::kRunning;
  done_ = out.done;
  return out;
}

}  // namespace drtraffic
