#include "drtraffic/sl2015.hpp"

namespace drtraffic {

double lc_safety_distance(const Sl2015Params& p, double v, double vehicle_length) {
  const double factor = v <= p.v_c ? p.a1 : p.a2;
  return v * factor + 2.0 * vehicle_length;
}

double lane_profit(double v_target_lane, double v_safe_current, double v_max_current) {
  return (v_target_lane - v_safe_current) / v_max_current;
}

double update_cumulative_profit(double cumulative, double profit) {
  if (profit > 0.0) return cumulative + profit;
  if (profit < 0.0) return cumulative / 2.0;
  return cumulative;
}

bool gaps_acceptable(const LaneCandidate& c, double v, double length, const Sl2015Params& p) {
  // The follower in the target lane needs room according to its own speed.
  if (c.lead_gap && *c.lead_gap < lc_safety_distance(p, v, length) / p.lc_assertive) {
    return false;
  }
  if (c.lag_gap && *c.lag_gap < lc_safety_distance(p, c.lag_speed, length) / p.lc_assertive) {
    return false;
  }
  return true;
}

LaneDecision decide_lane_change(const LaneChangeInputs& in, const Sl2015Params& p,
                                LaneChangeState& state) {
  if (in.left) state.cumulative_left = update_cumulative_profit(state.cumulative_left, in.left->profit);
  if (in.right) {
    state.cumulative_right = update_cumulative_profit(state.cumulative_right, in.right->profit);
  }

  const auto fires = [&](const std::optional<LaneCandidate>& c, double cumulative) {
    return c && cumulative * p.lc_speed_gain > p.profit_threshold &&
           gaps_acceptable(*c, in.v, in.length, p);
  };
  const bool left = fires(in.left, state.cumulative_left);
  const bool right = fires(in.right, state.cumulative_right);

  if (right && (!left || state.cumulative_right >= state.cumulative_left)) {
    state.cumulative_right = 0.0;
    return LaneDecision::kChangeRight;
  }
  if (left) {
    state.cumulative_left = 0.0;
    return LaneDecision::kChangeLeft;
  }
  return LaneDecision::kStay;
}

}  // namespace drtraffic
