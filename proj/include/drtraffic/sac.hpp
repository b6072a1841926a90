#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "drtraffic/env.hpp"
#include "drtraffic/nn.hpp"
#include "drtraffic/rng.hpp"

namespace drtraffic {

struct SacHyper {
  double gamma = 0.99;
  double tau = 0.005;
  double lr = 3e-4;
  int batch_size = 256;
  std::size_t buffer_capacity = 1'000'000;
  std::vector<int> hidden = {256, 256};
  Activation activation = Activation::kRelu;
  long warmup_steps = 1000;
  int updates_per_step = 1;
  bool auto_alpha = true;
  double initial_alpha = 1.0;
  /// Defaults to -(continuous action dim) when unset.
  std::optional<double> target_entropy;

  void validate() const;
};

/// Actions are stored in the policy's unit box [-1, 1]^k; the affine map to
/// env units happens only when acting.
struct Transition {
  std::vector<double> state;
  std::vector<double> action;
  int discrete = 0;
  double reward = 0.0;
  std::vector<double> next_state;
  bool done = false;
};

struct Batch {
  Eigen::MatrixXd state;       ///< obs_dim x B
  Eigen::MatrixXd action;      ///< act_dim x B
  Eigen::VectorXd reward;      ///< B
  Eigen::MatrixXd next_state;  ///< obs_dim x B
  Eigen::VectorXd done;        ///< B, 1.0 when terminal
  std::vector<std::size_t> indices;
};

/// Fixed-capacity FIFO ring; uniform sampling with replacement.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);
  void push(Transition t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// Logical index 0 is the oldest transition still stored.
  const Transition& at(std::size_t i) const;
  Batch sample(std::size_t n, RngStream& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  ///< physical slot of the oldest entry once full
  std::vector<Transition> data_;
};

Batch make_batch(const std::vector<Transition>& transitions);

// Squashed Gaussian head. The actor outputs [mean; raw_log_std] for k
// dimensions; log_std = lo + (hi - lo) * (tanh(raw) + 1) / 2.
inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

struct SquashedSample {
  Eigen::VectorXd unit;  ///< tanh(u), in (-1, 1)
  Eigen::VectorXd pre;   ///< u
  double log_prob = 0.0; ///< density of `unit` in the unit box
};

double squash_log_std(double raw);
/// log N(u; mean, std) - sum log(1 - tanh(u)^2), computed stably.
double squashed_log_prob(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std,
                         const Eigen::VectorXd& eps);
SquashedSample squashed_sample(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std,
                               const Eigen::VectorXd& eps);

/// Argmax over discrete-action weights; ties resolve to the lowest index.
int pasac_select(const Eigen::Ref<const Eigen::VectorXd>& weights);

/// Affine map between the unit box and an env action space.
double unit_to_env(double unit, double low, double high);
double env_to_unit(double value, double low, double high);

struct UpdateDiagnostics {
  double critic_loss = 0.0;  ///< mean of the two critics' losses
  double actor_loss = 0.0;
  double alpha = 0.0;
  double alpha_loss = 0.0;
  double mean_q = 0.0;
  double entropy = 0.0;      ///< -mean log pi over the batch
};

/// Loss and parameter gradient pieces, exposed for finite-difference tests.
/// 0.5 * mean_b (Q(s, a) - target)^2.
double critic_loss_and_grad(const Mlp& critic, const Eigen::MatrixXd& state,
                            const Eigen::MatrixXd& action, const Eigen::VectorXd& target,
                            Eigen::VectorXd* grad);
/// mean_b [alpha * log pi(a|s) - min(Q1, Q2)(s, a)] with a reparameterized by
/// fixed noise eps (k x B).
double actor_loss_and_grad(const Mlp& actor, const Mlp& q1, const Mlp& q2,
                           const Eigen::MatrixXd& state, const Eigen::MatrixXd& eps, double alpha,
                           Eigen::VectorXd* grad, double* mean_log_prob = nullptr);

struct PolicyAction {
  EnvAction env;
  Eigen::VectorXd unit;
  double log_prob = 0.0;  ///< unit-box density; NaN in deterministic mode
};

class SacAgent {
 public:
  SacAgent(std::size_t obs_dim, ActionSpace space, std::vector<double> obs_scale,
           SacHyper hyper, std::uint64_t seed);

  /// Sampled (or mean, when deterministic) action for a raw observation.
  PolicyAction act(const std::vector<double>& raw_obs, bool deterministic, RngStream& rng) const;
  /// Uniform random action for warm-up.
  PolicyAction random_action(RngStream& rng) const;
  EnvAction to_env(const Eigen::VectorXd& unit) const;
  std::vector<double> normalize(const std::vector<double>& raw_obs) const;

  /// One gradient step on critics, actor and (optionally) alpha, then Polyak
  /// target updates. Throws NonFiniteLoss after dumping the batch when
  /// `dump_path` is set.
  UpdateDiagnostics update(const Batch& batch, RngStream& rng);

  double alpha() const;
  double target_entropy() const;
  std::size_t obs_dim() const { return obs_dim_; }
  /// Actor output width per head: continuous dims plus one weight per discrete action.
  std::size_t action_dim() const { return action_dim_; }
  const ActionSpace& action_space() const { return space_; }
  const SacHyper& hyper() const { return hyper_; }
  const std::vector<double>& obs_scale() const { return obs_scale_; }

  Mlp& actor() { return actor_; }
  Mlp& q1() { return q1_; }
  Mlp& q2() { return q2_; }
  Mlp& q1_target() { return q1_target_; }
  Mlp& q2_target() { return q2_target_; }
  const Mlp& actor() const { return actor_; }
  double& log_alpha() { return log_alpha_; }

  void set_dump_path(std::filesystem::path p) { dump_path_ = std::move(p); }

  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static SacAgent load(std::istream& in);
  static SacAgent load(const std::filesystem::path& path);

 private:
  void dump_batch(const Batch& batch, const char* what) const;

  std::size_t obs_dim_;
  std::size_t action_dim_;
  ActionSpace space_;
  std::vector<double> obs_scale_;
  SacHyper hyper_;
  Mlp actor_, q1_, q2_, q1_target_, q2_target_;
  Adam actor_opt_, q1_opt_, q2_opt_;
  double log_alpha_;
  // Adam state for the scalar temperature.
  double alpha_m_ = 0.0, alpha_v_ = 0.0;
  long alpha_t_ = 0;
  std::filesystem::path dump_path_;
};

}  // namespace drtraffic
