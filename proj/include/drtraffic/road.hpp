#pragma once

#include <optional>
#include <utility>

namespace drtraffic {

enum class RoadKind { kFreeway, kMerging };

/// Lane index reserved for the on-ramp. Main-road lanes are 0..n-1, lane 0
/// being the rightmost (the one the ramp joins).
inline constexpr int kRampLane = -1;

struct RoadNetwork {
  RoadKind kind = RoadKind::kFreeway;
  int lane_count_main = 2;
  double lane_length = 1000.0;
  double lane_width = 3.2;
  /// Speed limit of the main road, used as v_max(lc) in the lane-change profit.
  double speed_limit = 16.89;
  // Merging only. All ramp positions are expressed in main-road coordinates
  // (the ramp vehicle is already "projected" onto the main road).
  double merge_point_s = 0.0;
  std::pair<double, double> control_zone{0.0, 0.0};
  double ramp_start_s = 0.0;

  bool has_ramp() const { return kind == RoadKind::kMerging; }
  bool in_control_zone(double s) const {
    return s >= control_zone.first && s <= control_zone.second;
  }
  double lane_center(int lane) const { return (lane + 0.5) * lane_width; }
  /// Main lane whose band contains lateral offset d (clamped to the road).
  int lane_at(double d) const;
};

struct GeometryOverrides {
  std::optional<int> lane_count_main;
  std::optional<double> lane_length;
  std::optional<double> lane_width;
  std::optional<double> speed_limit;
  std::optional<double> merge_point_s;
  /// Half-width of the control zone around the merge point.
  std::optional<double> control_half_width;
  std::optional<double> ramp_start_s;
};

/// Builds a validated road. Defaults reproduce the two evaluation scenes:
/// a 2 x 1000 m freeway, and a single main lane with an on-ramp joining at
/// 300 m with a +-100 m control zone. Throws InvalidGeometry.
RoadNetwork build_network(RoadKind kind, const GeometryOverrides& overrides = {});

}  // namespace drtraffic
