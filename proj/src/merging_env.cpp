#include "drtraffic/merging_env.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "drtraffic/errors.hpp"
#include "drtraffic/idm.hpp"

namespace drtraffic {

MergingEnv::MergingEnv(EnvConfig config)
    : config_(std::move(config)), network_(build_network(RoadKind::kMerging, config_.geometry)) {}

ActionSpace MergingEnv::action_space() const {
  return {{config_.accel_low}, {config_.accel_high}, 0};
}

std::vector<double> MergingEnv::observation_scale() const {
  const double d = config_.sensing_horizon;
  const double v = config_.freeway_reward.v_safe;
  return {d, v, d, v, d, v, std::abs(config_.accel_low), d, v, d, v};
}

void MergingEnv::set_trace(std::ostream* out) {
  trace_ = out;
  if (world_) world_->set_trace(out);
}

double MergingEnv::ego_speed() const {
  const VehicleState* agent = world_ ? world_->find(agent_) : nullptr;
  return agent ? agent->v : 0.0;
}

std::vector<double> MergingEnv::reset(std::uint64_t seed) {
  SimConfig sim = config_.sim;
  sim.seed = seed;
  world_.emplace(network_, sim, config_.planner);

  const auto warmup_steps = std::lround(config_.warmup_seconds / sim.dt);
  for (long i = 0; i < warmup_steps; ++i) world_->step();
  world_->set_trace(trace_);

  agent_ = world_->add_agent(kRampLane, network_.ramp_start_s, config_.agent_entry_speed);
  const IdmParams ramp_driver;
  while (world_->find(agent_)->s < network_.control_zone.first) {
    const VehicleState* agent = world_->find(agent_);
    world_->set_agent_accel(idm_accel(ramp_driver, agent->v, 0.0, std::nullopt));
    world_->step();
  }
  zone_entry_time_ = world_->time();
  done_ = false;
  return observe();
}

MergingEnv::Projection MergingEnv::project() const {
  const VehicleState* agent = world_->find(agent_);
  std::vector<const VehicleState*> ahead, behind;
  for (const auto& v : world_->vehicles()) {
    if (v.id == agent_ || v.lane != 0) continue;
    if (std::abs(v.s - agent->s) > config_.sensing_horizon) continue;
    (v.s >= agent->s ? ahead : behind).push_back(&v);
  }
  std::sort(ahead.begin(), ahead.end(), [](auto* a, auto* b) { return a->s < b->s; });
  std::sort(behind.begin(), behind.end(), [](auto* a, auto* b) { return a->s > b->s; });
  Projection p;
  if (!ahead.empty()) p.p1 = ahead[0]->id;
  if (ahead.size() > 1) p.p2 = ahead[1]->id;
  if (!behind.empty()) p.f1 = behind[0]->id;
  if (behind.size() > 1) p.f2 = behind[1]->id;
  return p;
}

std::vector<double> MergingEnv::observe() const {
  const VehicleState* agent = world_->find(agent_);
  const double merge = network_.merge_point_s;
  const double d_m = agent->s - merge;
  const Projection p = project();
  const auto slot = [&](const std::optional<int>& id, double pad) -> std::pair<double, double> {
    if (!id) return {d_m + pad, agent->v};
    const VehicleState* v = world_->find(*id);
    return {v->s - merge, v->v};
  };
  const double h = config_.sensing_horizon;
  const auto [d_p2, v_p2] = slot(p.p2, h);
  const auto [d_p1, v_p1] = slot(p.p1, h);
  const auto [d_f1, v_f1] = slot(p.f1, -h);
  const auto [d_f2, v_f2] = slot(p.f2, -h);
  return {d_p2, v_p2, d_p1, v_p1, d_m, agent->v, agent->a, d_f1, v_f1, d_f2, v_f2};
}

MergingSnapshot MergingEnv::snapshot(double prev_accel, bool collision, bool success) const {
  const std::vector<double> obs = observe();
  MergingSnapshot s;
  s.d_p1 = obs[2];
  s.v_p1 = obs[3];
  s.d_m = obs[4];
  s.v_m = obs[5];
  s.a_m = obs[6];
  s.d_f1 = obs[7];
  s.v_f1 = obs[8];
  s.prev_a_m = prev_accel;
  s.collision = collision;
  s.success = success;
  if (const auto f1 = project().f1) {
    const VehicleState* v = world_->find(*f1);
    s.f1_present = true;
    s.a_f1 = v->a;
    s.f1_in_zone = network_.in_control_zone(v->s);
  }
  return s;
}

StepResult MergingEnv::step(const EnvAction& action) {
  if (done_) throw EpisodeFinished("merging episode already finished; call reset");
  const double requested = action.continuous.empty() ? 0.0 : action.continuous[0];
  const double accel = std::clamp(requested, config_.accel_low, config_.accel_high);
  const double prev_accel = world_->find(agent_)->a;

  world_->set_agent_accel(accel);
  const bool collision = !world_->step().empty();
  const VehicleState* agent = world_->find(agent_);
  const bool success = !collision && agent->s >= network_.control_zone.second;
  const bool timeout =
      world_->time() - zone_entry_time_ >= config_.sim.episode_timeout - 1e-9;

  const RewardBreakdown r =
      merging_reward(snapshot(prev_accel, collision, success), config_.merging_reward);

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
