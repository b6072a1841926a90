#pragma once

#include <optional>

#include "drtraffic/env.hpp"

namespace drtraffic {

inline constexpr std::size_t kMergingObsDim = 11;

/// On-ramp merging. The agent drives the ramp under IDM until it enters the
/// control zone, then takes one acceleration command per 0.1 s step until it
/// leaves the zone downstream (success), collides, or times out.
class MergingEnv final : public Env {
 public:
  explicit MergingEnv(EnvConfig config);

  Scene scene() const override { return Scene::kMerging; }
  std::size_t observation_dim() const override { return kMergingObsDim; }
  ActionSpace action_space() const override;
  std::vector<double> observation_scale() const override;
  std::vector<double> reset(std::uint64_t seed) override;
  StepResult step(const EnvAction& action) override;
  bool done() const override { return done_; }
  double ego_speed() const override;
  const World& world() const override { return *world_; }
  void set_trace(std::ostream* out) override;

  /// Current reward inputs (exposed for reward oracle tests).
  MergingSnapshot snapshot(double prev_accel, bool collision, bool success) const;
  /// [d_p2, v_p2, d_p1, v_p1, d_m, v_m, a_m, d_f1, v_f1, d_f2, v_f2].
  std::vector<double> observe() const;

 private:
  struct Projection {
    std::optional<int> p1, p2, f1, f2;
  };
  Projection project() const;

  EnvConfig config_;
  RoadNetwork network_;
  std::optional<World> world_;
  std::ostream* trace_ = nullptr;
  int agent_ = -1;
  double zone_entry_time_ = 0.0;
  bool done_ = true;
};

}  // namespace drtraffic
