#pragma once

#include "drtraffic/env.hpp"
#include "drtraffic/rng.hpp"

namespace drtraffic {

/// 1-D regulator: x' = x + 0.1 a, a in [-1, 1], reward 1 - x'^2, 50 steps.
/// Starts uniformly in [-1, 1] unless a start is pinned.
class ToyRegulatorEnv final : public RlEnv {
 public:
  static constexpr int kHorizon = 50;
  static constexpr double kGain = 0.1;

  std::size_t observation_dim() const override { return 1; }
  ActionSpace action_space() const override { return {{-1.0}, {1.0}, 0}; }
  std::vector<double> observation_scale() const override { return {1.0}; }
  std::vector<double> reset(std::uint64_t seed) override;
  StepResult step(const EnvAction& action) override;
  bool done() const override { return t_ >= kHorizon; }

  void pin_start(double x0) { pinned_ = x0; pin_ = true; }
  double position() const { return x_; }

 private:
  double x_ = 0.0;
  int t_ = kHorizon;
  bool pin_ = false;
  double pinned_ = 0.0;
};

}  // namespace drtraffic
