#include "drtraffic/idm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "drtraffic/errors.hpp"

namespace drtraffic {

bool IdmParams::valid() const {
  return a_max > 0.0 && b > 0.0 && a_min < 0.0 && v0 > 0.0 && T >= 0.0 && s0 > 0.0 &&
         delta > 0.0;
}

double desired_gap(const IdmParams& p, double v, double dv) {
  const double dynamic = v * p.T + v * dv / (2.0 * std::sqrt(p.a_max * p.b));
  return p.s0 + std::max(0.0, dynamic);
}

double idm_accel_raw(const IdmParams& p, double v, double gap, std::optional<double> v_leader) {
  const double free_term = std::pow(v / p.v0, p.delta);
  if (!v_leader) return p.a_max * (1.0 - free_term);
  if (!(gap > 0.0)) {
    throw NonPositiveGap("IDM gap must be positive when a leader exists, got " +
                         std::to_string(gap));
  }
  const double ratio = desired_gap(p, v, v - *v_leader) / gap;
  return p.a_max * (1.0 - free_term - ratio * ratio);
}

double idm_accel(const IdmParams& p, double v, double gap, std::optional<double> v_leader) {
  return std::clamp(idm_accel_raw(p, v, gap, v_leader), p.a_min, p.a_max);
}

double equilibrium_gap(const IdmParams& p, double v, double tol) {
  // With dv = 0, acceleration is increasing in gap; bracket then bisect.
  double lo = 1e-9;
  double hi = std::max(1.0, desired_gap(p, v, 0.0));
  if (v >= p.v0) return std::numeric_limits<double>::infinity();
  while (idm_accel_raw(p, v, hi, v) < 0.0) hi *= 2.0;
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double r = idm_accel_raw(p, v, mid, v);
    if (std::abs(r) < tol) return mid;
    (r < 0.0 ? lo : hi) = mid;
    if (hi - lo <= std::numeric_limits<double>::epsilon() * hi) break;
  }
  return 0.5 * (lo + hi);
}

double safe_speed(const IdmParams& p, double gap, double v_leader) {
  if (gap <= p.s0) return 0.0;
  if (desired_gap(p, p.v0, p.v0 - v_leader) <= gap) return p.v0;
  double lo = 0.0;
  double hi = p.v0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (desired_gap(p, mid, mid - v_leader) <= gap ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace drtraffic
