#pragma once

#include <optional>

namespace drtraffic {

/// Intelligent Driver Model parameters. Defaults are the un-randomized
/// driver: a_max 2.6, a_min -4.5, v0 8.33, delta 4, T 1 s.
struct IdmParams {
  double a_max = 2.6;   ///< maximum acceleration a [m/s^2]
  double a_min = -4.5;  ///< braking bound the output is clamped to [m/s^2]
  double b = 4.5;       ///< comfortable deceleration in the gap term [m/s^2]
  double v0 = 8.33;     ///< desired speed [m/s]
  double delta = 4.0;   ///< acceleration exponent
  double T = 1.0;       ///< time gap [s]
  double s0 = 2.5;      ///< minimum gap [m]

  bool valid() const;
};

/// s* = s0 + max(0, v T + v dv / (2 sqrt(a_max b))), dv = v - v_leader.
double desired_gap(const IdmParams& p, double v, double dv);

/// IDM acceleration clamped to [a_min, a_max]. Without a leader the
/// interaction term is dropped. Throws NonPositiveGap when a leader exists
/// and gap <= 0.
double idm_accel(const IdmParams& p, double v, double gap, std::optional<double> v_leader);

/// Unclamped right-hand side of the IDM law; used by tests and by the
/// equilibrium solver.
double idm_accel_raw(const IdmParams& p, double v, double gap, std::optional<double> v_leader);

/// Gap at which a vehicle following a leader at the same speed v has zero
/// acceleration. Bisection to |residual| < tol.
double equilibrium_gap(const IdmParams& p, double v, double tol = 1e-12);

/// Largest speed in [0, v0] whose desired gap behind a leader at v_leader fits
/// within gap. Used to cap insertion speeds.
double safe_speed(const IdmParams& p, double gap, double v_leader);

}  // namespace drtraffic
