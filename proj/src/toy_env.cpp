#include "drtraffic/toy_env.hpp"

#include <algorithm>

#include "drtraffic/errors.hpp"

namespace drtraffic {

std::vector<double> ToyRegulatorEnv::reset(std::uint64_t seed) {
  RngStream rng(seed, StreamId::kEnv);
  x_ = pin_ ? pinned_ : rng.uniform(-1.0, 1.0);
  t_ = 0;
  return {x_};
}

StepResult ToyRegulatorEnv::step(const EnvAction& action) {
  if (done()) throw EpisodeFinished("toy episode already finished");
  const double a = std::clamp(action.continuous.at(0), -1.0, 1.0);
  x_ += kGain * a;
  ++t_;
  StepResult r;
  r.observation = {x_};
  r.reward = 1.0 - x_ * x_;
  r.reward_terms = {{"R_x", r.reward}};
  r.done = done();
  r.outcome = r.done ? Outcome::kTimeout : Outcome::kRunning;
  return r;
}

}  // namespace drtraffic
