#include "drtraffic/rewards.hpp"

#include <algorithm>
#include <cmath>

namespace drtraffic {

double RewardBreakdown::term(const std::string& name) const {
  for (const auto& t : terms) {
    if (t.name == name) return t.value;
  }
  return 0.0;
}

namespace {

RewardBreakdown finish(std::vector<RewardTerm> terms) {
  RewardBreakdown out;
  out.terms = std::move(terms);
  for (const auto& t : out.terms) out.total += t.value;
  return out;
}

}  // namespace

double merging_midway_offset(double d_p1, double d_m, double d_f1, double length_p1,
                             double length_m) {
  const double denom = std::abs(d_p1 - d_f1 - length_p1 - length_m);
  if (denom < 1e-9) return 0.0;
  return (std::abs(d_p1 - d_m - length_p1) - std::abs(d_m - d_f1 - length_m)) / denom;
}

RewardBreakdown merging_reward(const MergingSnapshot& s, const MergingRewardParams& p) {
  const double w = merging_midway_offset(s.d_p1, s.d_m, s.d_f1, p.length_p1, p.length_m);
  const double r_m = p.w_m * (std::abs(w) + std::abs((s.v_p1 + s.v_f1) / 2.0 - s.v_m) / p.dv_max);

  double r_b = 0.0;
  if (s.f1_present && s.f1_in_zone && s.a_f1 < 0.0) {
    r_b = p.w_b * std::abs(s.a_f1) / std::max(std::abs(p.a_min), p.a_max);
  }
  const double jerk = (s.a_m - s.prev_a_m) / p.dt;
  const double r_j = p.w_j * std::abs(jerk) / p.j_max;
  const double r_stop = (s.v_m == 0.0) ? p.r_stop : 0.0;
  const double r_success = s.success ? p.r_success : 0.0;
  const double r_collision = s.collision ? p.r_collision : 0.0;

  return finish({{"R_m", r_m},
                 {"R_b", r_b},
                 {"R_j", r_j},
                 {"R_stop", r_stop},
                 {"R_success", r_success},
                 {"R_collision", r_collision}});
}

RewardBreakdown freeway_reward(const FreewaySnapshot& s, const FreewayRewardParams& p) {
  double r_act = 0.0;
  if (s.lane_changed) {
    if (s.d_p < p.d_safe) {
      r_act = p.w0;
    } else if (s.d_p > p.d_safe) {
      r_act = p.w1;
    }
  }

  const double r_distance = (s.d_p < p.d_safe) ? p.w2 * std::abs((s.d_p - p.d_safe) / p.d_safe) : 0.0;
  const double r_jerk = p.w3 * std::abs((s.a_t - s.a_prev) / p.jerk_dt);

  double r_v = 0.0;
  const bool dead_band = s.d_p >= p.d_safe && s.d_p <= p.d_safe + p.d_star;
  if (!dead_band) {
    const double v = s.v_ego;
    if (v > p.v_stable && v < p.v_safe) {
      r_v = p.w4 * std::abs((v - p.v_stable) / p.v_safe);
    } else if (v > p.v_safe) {
      r_v = p.w5 * std::abs((v - p.v_safe) / p.v_safe);
    } else if (v < p.v_stable) {
      r_v = p.w6 * std::abs((v - p.v_stable) / p.v_stable);
    }
  }
  const double r_collision = s.collision ? p.r_collision : 0.0;

  return finish({{"R_act", r_act},
                 {"R_distance", r_distance},
                 {"R_jerk", r_jerk},
                 {"R_v", r_v},
                 {"R_collision", r_collision}});
}

}  // namespace drtraffic
