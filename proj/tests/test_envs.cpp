#include <doctest.h>

#include <cmath>

#include "drtraffic/errors.hpp"
#include "drtraffic/freeway_env.hpp"
#include "drtraffic/merging_env.hpp"
#include "drtraffic/rewards.hpp"
#include "reward_oracle.hpp"

using namespace drtraffic;

namespace {
void check_terms(const StepResult& r, const std::map<std::string, double>& want) {
  double sum = 0.0;
  for (const auto& t : r.reward_terms) {
    REQUIRE(want.count(t.name) == 1);
    CHECK(std::abs(t.value - want.at(t.name)) < 1e-9);
    sum += t.value;
  }
  CHECK(r.reward_terms.size() == want.size());
  CHECK(std::abs(sum - r.reward) < 1e-12);
}
}  // namespace

TEST_CASE("midway offset") {
  CHECK(merging_midway_offset(60, 40, 20, 5, 5) == doctest::Approx(0.0));
  CHECK(merging_midway_offset(60, 30, 20, 5, 5) > 0.0);
  MergingSnapshot s;
  s.d_p1 = 60;
  s.d_m = 40;
  s.d_f1 = 20;
  s.v_p1 = 7;
  s.v_f1 = 9;
  s.v_m = 8;
  s.prev_a_m = s.a_m = 0.3;
  const RewardBreakdown r = merging_reward(s, MergingRewardParams{});
  CHECK(r.term("R_m") == doctest::Approx(0.0));
  CHECK(r.total == doctest::Approx(0.0));
}

TEST_CASE("merging reward terms and signs") {
  MergingSnapshot s;
  s.d_p1 = 30;
  s.d_m = 0;
  s.d_f1 = -40;
  s.v_p1 = 8;
  s.v_f1 = 6;
  s.v_m = 0;
  s.a_m = -4.5;
  s.prev_a_m = -1.5;
  s.f1_present = s.f1_in_zone = true;
  s.a_f1 = -2.25;
  s.collision = true;
  const RewardBreakdown r = merging_reward(s, MergingRewardParams{});
  CHECK(r.term("R_b") == doctest::Approx(-0.015 * 0.5));
  CHECK(r.term("R_j") == doctest::Approx(-0.015 * 30.0 / 3.0));
  CHECK(r.term("R_stop") == -0.5);
  CHECK(r.term("R_collision") == -1.0);
  CHECK(r.term("R_success") == 0.0);
  for (const auto& t : r.terms) CHECK(t.value <= 0.0);
  s.a_f1 = 1.0;
  CHECK(merging_reward(s, {}).term("R_b") == 0.0);
}

TEST_CASE("freeway reward examples") {
  FreewayRewardParams p;
  FreewaySnapshot s;
  s.d_p = 50;
  s.v_ego = 8.89;
  s.a_t = 1.0;
  s.a_prev = 0.5;
  CHECK(freeway_reward(s, p).term("R_jerk") == doctest::Approx(-0.025));
  s.lane_changed = true;
  s.d_p = 30;
  CHECK(freeway_reward(s, p).term("R_act") == -2.0);
  s.d_p = 10;
  const auto r = freeway_reward(s, p);
  CHECK(r.term("R_act") == -5.0);
  CHECK(r.term("R_distance") == doctest::Approx(-6.0));
  CHECK(r.term("R_v") == 0.0);  // v_ego == v_stable
  s.collision = true;
  CHECK(freeway_reward(s, p).term("R_collision") == -200.0);
}

TEST_CASE("freeway dead band") {
  FreewayRewardParams p;
  for (double d = 25.0; d <= 27.5; d += 0.125) {
    for (double v : {0.0, 5.0, 12.0, 20.0}) {
      FreewaySnapshot s;
      s.d_p = d;
      s.v_ego = v;
      const auto r = freeway_reward(s, p);
      CHECK(r.term("R_v") == 0.0);
      CHECK(r.term("R_distance") == 0.0);
    }
  }
  FreewaySnapshot s;
  s.d_p = 27.6;
  s.v_ego = 12.0;
  CHECK(freeway_reward(s, p).term("R_v") > 0.0);
}

TEST_CASE("freeway sign correctness") {
  FreewayRewardParams p;
  for (double d = 0.0; d < 120; d += 3.3)
    for (double v = 0.0; v < 25; v += 1.1)
      for (int lc = 0; lc < 2; ++lc) {
        FreewaySnapshot s{d, v, 1.0, -2.0, lc == 1, false};
        const auto r = freeway_reward(s, p);
        CHECK(r.term("R_act") <= 0.0);
        CHECK(r.term("R_distance") <= 0.0);
        CHECK(r.term("R_jerk") <= 0.0);
      }
}

namespace {
EnvConfig merging_cfg() { return EnvConfig::merging_defaults(); }
EnvConfig freeway_cfg() { return EnvConfig::freeway_defaults(); }
}  // namespace

TEST_CASE("merging env basics") {
  MergingEnv env(merging_cfg());
  CHECK_THROWS_AS(env.step({{0.0}, 0}), EpisodeFinished);
  const auto obs = env.reset(4);
  CHECK(obs.size() == 11);
  MergingEnv env2(merging_cfg());
  CHECK(env2.reset(4) == obs);

  const StepResult r = env.step({{5.0}, 0});
  CHECK(r.observation.size() == 11);
  CHECK(r.observation[6] == 2.5);
  const auto r2 = env.step({{-50.0}, 0});
  CHECK(r2.observation[6] == -4.5);
}

TEST_CASE("merging padding on an empty main road") {
  EnvConfig cfg = merging_cfg();
  cfg.sim.spawn_probability = 0.0;
  MergingEnv env(cfg);
  const auto o = env.reset(1);
  CHECK(o[2] == doctest::Approx(o[4] + 200.0));
  CHECK(o[0] == doctest::Approx(o[4] + 200.0));
  CHECK(o[7] == doctest::Approx(o[4] - 200.0));
  CHECK(o[3] == o[5]);
  CHECK(o[8] == o[5]);
}

TEST_CASE("full braking accrues the stop penalty every stopped step") {
  EnvConfig cfg = merging_cfg();
  cfg.sim.spawn_probability = 0.0;
  MergingEnv env(cfg);
  env.reset(2);
  int stopped_steps = 0;
  StepResult r;
  while (!env.done()) {
    r = env.step({{-4.5}, 0});
    if (r.observation[5] == 0.0) {
      ++stopped_steps;
      double stop = 0.0;
      for (const auto& t : r.reward_terms)
        if (t.name == "R_stop") stop = t.value;
      CHECK(stop == -0.5);
    }
  }
  CHECK(stopped_steps > 400);
  CHECK(r.outcome == Outcome::kTimeout);
  CHECK_THROWS_AS(env.step({{0.0}, 0}), EpisodeFinished);
}

TEST_CASE("merging scripted rewards agree with the hand evaluation") {
  MergingEnv env(merging_cfg());
  int steps = 0;
  for (std::uint64_t seed = 0; steps < 200; ++seed) {
    auto obs = env.reset(seed);
    for (int k = 0; k < 80 && !env.done(); ++k) {
      const double a = 2.0 * std::sin(0.3 * k + static_cast<double>(seed));
      const double prev = obs[6];
      const StepResult r = env.step({{a}, 0});
      obs = r.observation;
      oracle::MergeInputs in{obs[2], obs[3], obs[4], obs[5], obs[6], obs[7], obs[8], prev,
                             false, 0.0, r.outcome == Outcome::kCollision,
                             r.outcome == Outcome::kSuccess};
      // The first follower's acceleration is not part of the observation.
      const World& w = env.world();
      const VehicleState* f1 = nullptr;
      for (const auto& v : w.vehicles())
        if (v.lane == 0 && v.controller != Controller::kAgent && std::abs(v.s - 300.0 - obs[7]) < 1e-9)
          f1 = &v;
      if (f1) {
        in.a_f1 = f1->a;
        in.f1_brakes_in_zone = f1->a < 0.0 && f1->s >= 200.0 && f1->s <= 400.0;
      }
      check_terms(r, oracle::merging_terms(in));
      ++steps;
    }
  }
}

TEST_CASE("freeway env basics and lane involution") {
  FreewayEnv env(freeway_cfg());
  const auto obs = env.reset(3);
  CHECK(obs.size() == 10);
  const int agent = *env.world().agent_id();
  const int lane0 = env.world().find(agent)->lane;
  env.step({{0.0}, 1});
  CHECK(env.world().find(agent)->lane != lane0);
  env.step({{0.0}, 1});
  CHECK(env.world().find(agent)->lane == lane0);
  for (double x : env.step({{0.0}, 0}).observation) CHECK(std::isfinite(x));
}

TEST_CASE("freeway scripted rewards agree with the hand evaluation") {
  FreewayEnv env(freeway_cfg());
  int steps = 0;
  for (std::uint64_t seed = 10; steps < 200; ++seed) {
    auto obs = env.reset(seed);
    for (int k = 0; k < 60 && !env.done(); ++k) {
      const double a = 3.0 * std::cos(0.2 * k + static_cast<double>(seed));
      const int lc = (k % 17 == 5) ? 1 : 0;
      const double prev = obs[9];
      const StepResult r = env.step({{a}, lc});
      obs = r.observation;
      if (r.outcome == Outcome::kCollision) continue;
      oracle::FreewayInputs in{obs[0], obs[8], std::clamp(a, -4.5, 2.6), prev, lc == 1, false};
      check_terms(r, oracle::freeway_terms(in));
      ++steps;
    }
  }
}

TEST_CASE("do-nothing return on an empty freeway is the summed speed term") {
  EnvConfig cfg = freeway_cfg();
  cfg.sim.spawn_probability = 0.0;
  cfg.agent_entry_speed = 13.0;
  FreewayEnv env(cfg);
  env.reset(0);
  double ret = 0.0;
  int n = 0;
  StepResult r;
  while (!env.done()) {
    r = env.step({{0.0}, 0});
    ret += r.reward;
    ++n;
  }
  CHECK(r.outcome == Outcome::kSuccess);
  // 990 m at 1.3 m per step.
  CHECK(n == 762);
  CHECK(ret == doctest::Approx(762 * (13.0 - 8.89) / 16.89).epsilon(1e-12));
}

TEST_CASE("reference density: merging warm-up at 0.56") {
  // Reference figure: about 16 veh/km, accepted within 25%.
  MergingEnv env(merging_cfg());
  double sum = 0.0;
  const int n = 20;
  for (int seed = 0; seed < n; ++seed) {
    env.reset(static_cast<std::uint64_t>(seed));
    sum += env.world().density_per_km(0.0, 1000.0);
  }
  const double mean = sum / n;
  MESSAGE("mean main-road density after warm-up: " << mean << " veh/km");
  CHECK(std::abs(mean - 16.0) <= 0.25 * 16.0);
}
