#include "drtraffic/frenet.hpp"

#include <omp.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "drtraffic/errors.hpp"

namespace drtraffic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_duration(double duration) {
  if (!(duration > 0.0)) {
    throw SingularSystem("polynomial boundary system is singular for duration " +
                         std::to_string(duration));
  }
}

}  // namespace

double QuinticPoly::value(double t) const {
  return c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))));
}
double QuinticPoly::d1(double t) const {
  return c[1] + t * (2 * c[2] + t * (3 * c[3] + t * (4 * c[4] + t * 5 * c[5])));
}
double QuinticPoly::d2(double t) const {
  return 2 * c[2] + t * (6 * c[3] + t * (12 * c[4] + t * 20 * c[5]));
}
double QuinticPoly::d3(double t) const { return 6 * c[3] + t * (24 * c[4] + t * 60 * c[5]); }

double QuarticPoly::value(double t) const {
  return c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * c[4])));
}
double QuarticPoly::d1(double t) const {
  return c[1] + t * (2 * c[2] + t * (3 * c[3] + t * 4 * c[4]));
}
double QuarticPoly::d2(double t) const { return 2 * c[2] + t * (6 * c[3] + t * 12 * c[4]); }
double QuarticPoly::d3(double t) const { return 6 * c[3] + t * 24 * c[4]; }

QuinticPoly solve_lateral_quintic(const std::array<double, 3>& start,
                                  const std::array<double, 3>& end, double duration) {
  require_duration(duration);
  const double T = duration, T2 = T * T, T3 = T2 * T, T4 = T3 * T, T5 = T4 * T;
  QuinticPoly poly;
  poly.duration = T;
  poly.c[0] = start[0];
  poly.c[1] = start[1];
  poly.c[2] = 0.5 * start[2];

  Eigen::Matrix3d A;
  A << T3, T4, T5,
       3 * T2, 4 * T3, 5 * T4,
       6 * T, 12 * T2, 20 * T3;
  const Eigen::Vector3d b(end[0] - (poly.c[0] + poly.c[1] * T + poly.c[2] * T2),
                          end[1] - (poly.c[1] + 2 * poly.c[2] * T),
                          end[2] - 2 * poly.c[2]);
  const Eigen::Vector3d x = A.fullPivLu().solve(b);
  poly.c[3] = x[0];
  poly.c[4] = x[1];
  poly.c[5] = x[2];
  return poly;
}

QuarticPoly solve_longitudinal_quartic(const std::array<double, 3>& start,
                                       const std::array<double, 2>& end, double duration) {
  require_duration(duration);
  const double T = duration, T2 = T * T, T3 = T2 * T;
  QuarticPoly poly;
  poly.duration = T;
  poly.c[0] = start[0];
  poly.c[1] = start[1];
  poly.c[2] = 0.5 * start[2];

  Eigen::Matrix2d A;
  A << 3 * T2, 4 * T3,
       6 * T, 12 * T2;
  const Eigen::Vector2d b(end[0] - (poly.c[1] + 2 * poly.c[2] * T), end[1] - 2 * poly.c[2]);
  const Eigen::Vector2d x = A.fullPivLu().solve(b);
  poly.c[3] = x[0];
  poly.c[4] = x[1];
  return poly;
}

std::vector<CandidateTrajectory> generate_candidates(const FrenetState& current, double ref_speed,
                                                     std::span<const double> lane_centers,
                                                     const PlannerConfig& cfg) {
  const int steps = static_cast<int>(std::lround(cfg.horizon / cfg.dt));
  std::vector<CandidateTrajectory> out;
  out.reserve(lane_centers.size() * cfg.lateral_offsets.size() * cfg.speed_offsets.size());

  std::size_t index = 0;
  for (const double center : lane_centers) {
    for (const double offset : cfg.lateral_offsets) {
      const double d1 = center + offset;
      const QuinticPoly lat =
          solve_lateral_quintic({current.d, current.d_d, current.d_dd}, {d1, 0.0, 0.0}, cfg.horizon);
      for (const double dv : cfg.speed_offsets) {
        const double v1 = std::max(0.0, ref_speed + dv);
        CandidateTrajectory c;
        c.grid_index = index++;
        c.target_d = d1;
        c.target_speed = v1;
        c.lateral = lat;
        c.longitudinal = solve_longitudinal_quartic({current.s, current.s_d, current.s_dd},
                                                    {v1, 0.0}, cfg.horizon);
        c.samples.resize(static_cast<std::size_t>(steps) + 1);
        for (int k = 0; k <= steps; ++k) {
          const double t = k * cfg.dt;
          FrenetState& st = c.samples[static_cast<std::size_t>(k)];
          st.s = c.longitudinal.value(t);
          st.s_d = c.longitudinal.d1(t);
          st.s_dd = c.longitudinal.d2(t);
          st.d = lat.value(t);
          st.d_d = lat.d1(t);
          st.d_dd = lat.d2(t);
        }
        // The first sample is the current state by construction; pin it so
        // that replanning never introduces a jump through rounding.
        c.samples.front() = current;
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

double total_cost(const CostTerms& t, const CostWeights& w) {
  return w.smoothness * t.smoothness + w.stability * t.stability +
         w.collision * t.collision_risk + w.speed * t.speed_dev + w.lateral * t.lateral_dev;
}

void score_candidate(CandidateTrajectory& traj, const ScoringContext& ctx,
                     const PlannerConfig& cfg) {
  const auto n = traj.samples.size();
  double heading_sum = 0.0, curvature_sum = 0.0, accel_sum = 0.0, jerk_sum = 0.0;
  double speed_sum = 0.0, lateral_sum = 0.0, risk = 0.0;
  double max_abs_accel = 0.0, max_speed = -kInf, min_speed = kInf, max_curv = 0.0;

  for (std::size_t k = 0; k < n; ++k) {
    const FrenetState& st = traj.samples[k];
    const double t = static_cast<double>(k) * cfg.dt;
    const double speed2 = st.s_d * st.s_d + st.d_d * st.d_d;
    const double heading = (speed2 > 1e-12) ? std::atan2(st.d_d, st.s_d) : 0.0;
    const double curvature =
        (speed2 > 1e-6) ? (st.s_d * st.d_dd - st.d_d * st.s_dd) / std::pow(speed2, 1.5) : 0.0;
    const double jerk_s = traj.longitudinal.d3(t);
    const double jerk_d = traj.lateral.d3(t);

    heading_sum += std::abs(heading);
    curvature_sum += std::abs(curvature);
    accel_sum += std::hypot(st.s_dd, st.d_dd);
    jerk_sum += std::hypot(jerk_s, jerk_d);
    speed_sum += std::abs(st.s_d - ctx.ref_speed);
    lateral_sum += std::abs(st.d - ctx.ref_d);

    max_abs_accel = std::max(max_abs_accel, std::abs(st.s_dd));
    max_speed = std::max(max_speed, st.s_d);
    min_speed = std::min(min_speed, st.s_d);
    max_curv = std::max(max_curv, std::abs(curvature));

    if (risk < kInf) {
      double nearest = kInf;
      for (const Obstacle& ob : ctx.obstacles) {
        if (std::abs(st.d - ob.d) >= cfg.vehicle_width) continue;
        const double ob_s = ob.s + ob.v * t;
        const double gap = (ob_s >= st.s) ? ob_s - ob.length - st.s : st.s - cfg.vehicle_length - ob_s;
        nearest = std::min(nearest, gap);
      }
      if (nearest < 0.0) {
        risk = kInf;
      } else if (nearest < kInf) {
        risk += std::exp(-nearest / cfg.risk_length);
      }
    }
  }

  const double inv = 1.0 / static_cast<double>(n);
  traj.cost.smoothness = (heading_sum + curvature_sum) * inv;
  traj.cost.stability = (accel_sum + jerk_sum) * inv;
  traj.cost.collision_risk = risk;
  traj.cost.speed_dev = speed_sum * inv;
  traj.cost.lateral_dev = lateral_sum * inv;
  traj.total_cost = total_cost(traj.cost, cfg.weights);
  traj.feasible = max_abs_accel <= cfg.max_accel && max_speed <= cfg.max_speed &&
                  min_speed >= -1e-9 && max_curv <= cfg.max_curvature && std::isfinite(risk);
}

void score_candidates_serial(std::span<CandidateTrajectory> cands, const ScoringContext& ctx,
                             const PlannerConfig& cfg) {
  for (auto& c : cands) score_candidate(c, ctx, cfg);
}

void score_candidates_parallel(std::span<CandidateTrajectory> cands, const ScoringContext& ctx,
                               const PlannerConfig& cfg) {
  const auto count = static_cast<std::ptrdiff_t>(cands.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    score_candidate(cands[static_cast<std::size_t>(i)], ctx, cfg);
  }
}

std::optional<std::size_t> select_best(std::span<const CandidateTrajectory> cands) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (!cands[i].feasible) continue;
    if (!best || cands[i].total_cost < cands[*best].total_cost ||
        (cands[i].total_cost == cands[*best].total_cost &&
         cands[i].grid_index < cands[*best].grid_index)) {
      best = i;
    }
  }
  return best;
}

PlanResult plan_fan(const PlanRequest& req, const PlannerConfig& cfg) {
  PlanResult result;
  result.candidates = generate_candidates(req.current, req.ref_speed, req.lane_centers, cfg);
  const ScoringContext ctx{req.ref_speed, req.ref_d, req.obstacles};
  // Fans are small (tens of candidates); threading only pays off for large
  // grids and would oversubscribe when worlds already run in parallel.
  if (result.candidates.size() >= 256 && omp_get_max_threads() > 1) {
    score_candidates_parallel(result.candidates, ctx, cfg);
  } else {
    score_candidates_serial(result.candidates, ctx, cfg);
  }
  result.best = select_best(result.candidates);
  return result;
}

std::optional<CandidateTrajectory> plan(const PlanRequest& req, const PlannerConfig& cfg) {
  PlanResult fan = plan_fan(req, cfg);
  if (!fan.best) return std::nullopt;
  return std::move(fan.candidates[*fan.best]);
}

}  // namespace drtraffic
