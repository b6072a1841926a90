#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace drtraffic {

/// Road-aligned state: longitudinal s and lateral d with two derivatives each.
struct FrenetState {
  double s = 0.0, s_d = 0.0, s_dd = 0.0;
  double d = 0.0, d_d = 0.0, d_dd = 0.0;
};

struct QuinticPoly {
  std::array<double, 6> c{};
  double duration = 0.0;

  double value(double t) const;
  double d1(double t) const;
  double d2(double t) const;
  double d3(double t) const;
};

struct QuarticPoly {
  std::array<double, 5> c{};
  double duration = 0.0;

  double value(double t) const;
  double d1(double t) const;
  double d2(double t) const;
  double d3(double t) const;
};

/// Quintic through start [d, d', d''] and end [d, d', d''] after `duration`.
/// Throws SingularSystem for duration <= 0.
QuinticPoly solve_lateral_quintic(const std::array<double, 3>& start,
                                  const std::array<double, 3>& end, double duration);

/// Velocity-keeping quartic: start [s, s', s''], end [s', s''] (no end position).
QuarticPoly solve_longitudinal_quartic(const std::array<double, 3>& start,
                                       const std::array<double, 2>& end, double duration);

struct CostWeights {
  double smoothness = 1.0;
  double stability = 1.0;
  double collision = 10.0;
  double speed = 1.0;
  double lateral = 1.0;
};

struct PlannerConfig {
  double perception_radius = 50.0;
  double replan_period = 0.5;
  double horizon = 5.0;
  double dt = 0.1;
  /// Offsets added to every lane centerline to form the lateral end grid.
  std::vector<double> lateral_offsets{0.0, -0.5, 0.5};
  /// Offsets added to the reference speed to form the end-speed grid.
  std::vector<double> speed_offsets{-2.0, -1.0, 0.0, 1.0};
  CostWeights weights;
  double risk_length = 5.0;      ///< g0 in exp(-gap / g0)
  double max_accel = 4.5;        ///< bound on |s''|
  double max_speed = 16.89;
  double max_curvature = 0.2;    ///< 1 / minimum turning radius
  double vehicle_width = 1.8;    ///< lateral overlap threshold
  double vehicle_length = 5.0;
};

struct CostTerms {
  double smoothness = 0.0;
  double stability = 0.0;
  double collision_risk = 0.0;
  double speed_dev = 0.0;
  double lateral_dev = 0.0;
};

struct CandidateTrajectory {
  std::size_t grid_index = 0;
  double target_d = 0.0;
  double target_speed = 0.0;
  QuinticPoly lateral;
  QuarticPoly longitudinal;
  std::vector<FrenetState> samples;
  CostTerms cost;
  double total_cost = 0.0;
  bool feasible = false;
};

/// Another road user, predicted at constant velocity over the horizon.
struct Obstacle {
  double s = 0.0;
  double v = 0.0;
  double d = 0.0;
  double length = 5.0;
};

struct ScoringContext {
  double ref_speed = 0.0;
  double ref_d = 0.0;
  std::span<const Obstacle> obstacles;
};

/// Lateral targets (lane centers x offsets) times end speeds, lateral-major.
/// Each candidate ends parallel to the centerline with zero acceleration.
std::vector<CandidateTrajectory> generate_candidates(const FrenetState& current, double ref_speed,
                                                     std::span<const double> lane_centers,
                                                     const PlannerConfig& cfg);

double total_cost(const CostTerms& terms, const CostWeights& w);

/// Fills cost terms, total and feasibility.
void score_candidate(CandidateTrajectory& traj, const ScoringContext& ctx,
                     const PlannerConfig& cfg);

/// Serial reference kernel.
void score_candidates_serial(std::span<CandidateTrajectory> cands, const ScoringContext& ctx,
                             const PlannerConfig& cfg);
/// OpenMP kernel; every candidate writes only its own slot so the result is
/// identical to the serial kernel.
void score_candidates_parallel(std::span<CandidateTrajectory> cands, const ScoringContext& ctx,
                               const PlannerConfig& cfg);

/// Minimum total cost among feasible candidates, ties to the lower grid index.
std::optional<std::size_t> select_best(std::span<const CandidateTrajectory> cands);

struct PlanRequest {
  FrenetState current;
  double ref_speed = 0.0;
  double ref_d = 0.0;
  std::vector<double> lane_centers;
  std::vector<Obstacle> obstacles;
};

/// Full generate/score/select cycle. Empty result means no feasible
/// trajectory (NoFeasibleTrajectory); the caller falls back to braking.
std::optional<CandidateTrajectory> plan(const PlanRequest& req, const PlannerConfig& cfg);

/// Same, returning the whole scored fan as well (for the plan CLI).
struct PlanResult {
  std::vector<CandidateTrajectory> candidates;
  std::optional<std::size_t> best;
};
PlanResult plan_fan(const PlanRequest& req, const PlannerConfig& cfg);

}  // namespace drtraffic
