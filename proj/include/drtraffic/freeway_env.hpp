#pragma once

#include <optional>

#include "drtraffic/env.hpp"

namespace drtraffic {

inline constexpr std::size_t kFreewayObsDim = 10;

/// Two-lane freeway traversal with a hybrid action: continuous acceleration
/// plus keep (0) / change (1) lane.
class FreewayEnv final : public Env {
 public:
  explicit FreewayEnv(EnvConfig config);

  Scene scene() const override { return Scene::kFreeway; }
  std::size_t observation_dim() const override { return kFreewayObsDim; }
  ActionSpace action_space() const override;
  std::vector<double> observation_scale() const override;
  std::vector<double> reset(std::uint64_t seed) override;
  StepResult step(const EnvAction& action) override;
  bool done() const override { return done_; }
  double ego_speed() const override;
  const World& world() const override { return *world_; }
  void set_trace(std::ostream* out) override;

  /// [d_p, d_f, d_adj_p, d_adj_f, v_p, v_f, v_adj_p, v_adj_f, v_ego, a_ego].
  std::vector<double> observe() const;
  /// Gap to the leader in the ego lane, padded with the sensing horizon.
  double leader_gap() const;

 private:
  EnvConfig config_;
  RoadNetwork network_;
  std::optional<World> world_;
  std::ostream* trace_ = nullptr;
  int agent_ = -1;
  double start_time_ = 0.0;
  bool done_ = true;
};

}  // namespace drtraffic
