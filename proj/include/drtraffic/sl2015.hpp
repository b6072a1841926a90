#pragma once

#include <optional>

namespace drtraffic {

struct Sl2015Params {
  double a1 = 1.0;   ///< safety factor below v_c [s]
  double a2 = 2.0;   ///< safety factor above v_c [s]
  double v_c = 16.67;
  double lc_speed_gain = 1.0;
  double lc_assertive = 1.0;
  double profit_threshold = 1.0;

  bool valid() const { return a1 > 0.0 && a2 > 0.0 && v_c > 0.0 && lc_speed_gain >= 0.0 && lc_assertive >= 1.0; }
};

/// Per-vehicle cumulative profit ledger, one entry per candidate direction.
struct LaneChangeState {
  double cumulative_left = 0.0;
  double cumulative_right = 0.0;
};

enum class LaneDecision { kStay, kChangeLeft, kChangeRight };

/// Safety distance v a1 + 2 l (v <= v_c, inclusive) or v a2 + 2 l.
double lc_safety_distance(const Sl2015Params& p, double v, double vehicle_length);

/// Speed-gain profit (v_target - v_safe_current) / v_max_current.
double lane_profit(double v_target_lane, double v_safe_current, double v_max_current);

/// Positive profit accumulates, negative profit halves, zero leaves it.
double update_cumulative_profit(double cumulative, double profit);

/// What a vehicle sees in one adjacent lane at decision time.
struct LaneCandidate {
  double profit = 0.0;
  /// Bumper gap to the target-lane leader, or empty if none.
  std::optional<double> lead_gap;
  /// Bumper gap to the target-lane follower and that follower's speed.
  std::optional<double> lag_gap;
  double lag_speed = 0.0;
};

struct LaneChangeInputs {
  double v = 0.0;
  double length = 5.0;
  std::optional<LaneCandidate> left;
  std::optional<LaneCandidate> right;
};

/// Updates the cumulative ledger with this step's profits and returns the
/// decision. A direction fires when cumulative * lcSpeedGain exceeds the
/// threshold and both target-lane gaps reach the safety distance divided by
/// lcAssertive. The ledger of an executed direction resets to 0. Ties go to
/// the larger cumulative profit, then to the right.
LaneDecision decide_lane_change(const LaneChangeInputs& in, const Sl2015Params& p,
                                LaneChangeState& state);

/// Gap acceptance half of the decision, exposed for tests.
bool gaps_acceptable(const LaneCandidate& c, double v, double length, const Sl2015Params& p);

}  // namespace drtraffic
