#pragma once

#include <string>
#include <vector>

namespace drtraffic {

struct RewardTerm {
  std::string name;
  double value = 0.0;
};

struct RewardBreakdown {
  double total = 0.0;
  std::vector<RewardTerm> terms;

  double term(const std::string& name) const;
};

// ---- merging ---------------------------------------------------------------

struct MergingRewardParams {
  double w_m = -0.015;
  double w_b = -0.015;
  double w_j = -0.015;
  double dv_max = 5.0;   ///< maximum allowed speed difference [m/s]
  double j_max = 3.0;    ///< maximum allowed jerk [m/s^3]
  double r_stop = -0.5;
  double r_collision = -1.0;
  double r_success = 1.0;
  double a_min = -4.5;
  double a_max = 2.6;
  double length_p1 = 5.0;
  double length_m = 5.0;
  double dt = 0.1;
};

/// Everything the merging reward reads, in merge-point-relative positions.
struct MergingSnapshot {
  double d_p1 = 0.0, v_p1 = 0.0;
  double d_m = 0.0, v_m = 0.0, a_m = 0.0;
  double d_f1 = 0.0, v_f1 = 0.0;
  double a_f1 = 0.0;
  bool f1_present = false;
  bool f1_in_zone = false;
  double prev_a_m = 0.0;
  bool collision = false;
  bool success = false;
};

/// Relative position of the merging vehicle between its first leader and
/// first follower; 0 when exactly midway.
double merging_midway_offset(double d_p1, double d_m, double d_f1, double length_p1,
                             double length_m);

/// R_m + R_b + R_j + R_stop + R_success + R_collision, each reported by name.
RewardBreakdown merging_reward(const MergingSnapshot& s, const MergingRewardParams& p);

// ---- freeway ---------------------------------------------------------------

struct FreewayRewardParams {
  double w0 = -5.0;   ///< lane change inside d_safe
  double w1 = -2.0;   ///< lane change outside d_safe
  double w2 = -10.0;  ///< following distance
  double w3 = -0.005; ///< jerk
  double w4 = 1.0;
  double w5 = -0.5;
  double w6 = -0.5;
  double v_safe = 16.89;
  double v_stable = 8.89;
  double d_safe = 25.0;
  double d_star = 2.5;
  double r_collision = -200.0;
  double jerk_dt = 0.1;
};

struct FreewaySnapshot {
  double d_p = 0.0;  ///< gap to the leader in the ego's (post-change) lane
  double v_ego = 0.0;
  double a_t = 0.0;
  double a_prev = 0.0;
  bool lane_changed = false;
  bool collision = false;
};

/// R_act + R_distance + R_jerk + R_v + R_collision. R_distance and R_v are
/// both zero while d_p lies in the dead band [d_safe, d_safe + d*].
RewardBreakdown freeway_reward(const FreewaySnapshot& s, const FreewayRewardParams& p);

}  // namespace drtraffic
