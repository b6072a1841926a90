#include "drtraffic/road.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "drtraffic/errors.hpp"

namespace drtraffic {

int RoadNetwork::lane_at(double d) const {
  const int lane = static_cast<int>(std::floor(d / lane_width));
  return std::clamp(lane, 0, lane_count_main - 1);
}

RoadNetwork build_network(RoadKind kind, const GeometryOverrides& o) {
  RoadNetwork net;
  net.kind = kind;
  if (kind == RoadKind::kFreeway) {
    net.lane_count_main = o.lane_count_main.value_or(2);
    net.lane_length = o.lane_length.value_or(1000.0);
  } else {
    net.lane_count_main = o.lane_count_main.value_or(1);
    net.lane_length = o.lane_length.value_or(600.0);
    net.merge_point_s = o.merge_point_s.value_or(300.0);
    const double half = o.control_half_width.value_or(100.0);
    net.control_zone = {net.merge_point_s - half, net.merge_point_s + half};
    net.ramp_start_s = o.ramp_start_s.value_or(net.control_zone.first - 50.0);
    if (half <= 0.0) throw InvalidGeometry("control zone half-width must be positive");
  }
  net.lane_width = o.lane_width.value_or(3.2);
  net.speed_limit = o.speed_limit.value_or(16.89);

  if (net.lane_count_main < 1) {
    throw InvalidGeometry("lane_count_main must be >= 1, got " +
                          std::to_string(net.lane_count_main));
  }
  if (!(net.lane_length > 0.0) || !(net.lane_width > 0.0) || !(net.speed_limit > 0.0)) {
    throw InvalidGeometry("lengths, widths and speed limit must be positive");
  }
  if (kind == RoadKind::kMerging) {
    if (net.control_zone.first < 0.0 || net.control_zone.second > net.lane_length) {
      throw InvalidGeometry("control zone [" + std::to_string(net.control_zone.first) + ", " +
                            std::to_string(net.control_zone.second) +
                            "] leaves the main road [0, " + std::to_string(net.lane_length) +
                            "]");
    }
    if (net.ramp_start_s < 0.0 || net.ramp_start_s >= net.control_zone.first) {
      throw InvalidGeometry("ramp must start upstream of the control zone");
    }
  }
  return net;
}

}  // namespace drtraffic
