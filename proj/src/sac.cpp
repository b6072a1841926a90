#include "drtraffic/sac.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "drtraffic/errors.hpp"

namespace drtraffic {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// log(1 - tanh(u)^2) without cancellation for large |u|.
double log_one_minus_tanh_sq(double u) {
  return 2.0 * (std::numbers::ln2 - u - softplus(-2.0 * u));
}

Eigen::MatrixXd stack(const Eigen::MatrixXd& top, const Eigen::MatrixXd& bottom) {
  Eigen::MatrixXd out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

std::vector<int> net_sizes(std::size_t in, const std::vector<int>& hidden, std::size_t out) {
  std::vector<int> s{static_cast<int>(in)};
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(static_cast<int>(out));
  return s;
}

void write_net(std::ostream& out, const char* name, const Mlp& net) {
  out << "net " << name << ' ' << net.sizes().size();
  for (int s : net.sizes()) out << ' ' << s;
  out << '\n';
  for (Eigen::Index i = 0; i < net.params().size(); ++i) out << net.params()[i] << '\n';
}

std::string expect_key(std::istream& in, const char* key) {
  std::string k;
  if (!(in >> k) || k != key) {
    throw MissingCheckpoint(std::string("checkpoint: expected '") + key + "', got '" + k + "'");
  }
  return k;
}

void read_net(std::istream& in, const char* name, Mlp& net, Activation act) {
  expect_key(in, "net");
  expect_key(in, name);
  std::size_t n = 0;
  in >> n;
  std::vector<int> sizes(n);
  for (auto& s : sizes) in >> s;
  if (!in) throw MissingCheckpoint("checkpoint: truncated layer sizes");
  net = Mlp(sizes, act);
  for (Eigen::Index i = 0; i < net.params().size(); ++i) {
    if (!(in >> net.params()[i])) throw MissingCheckpoint("checkpoint: truncated parameters");
  }
}

}  // namespace

void SacHyper::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in (0, 1]");
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (buffer_capacity < 1) throw ConfigError("buffer capacity must be at least 1");
  if (initial_alpha < 0.0) throw ConfigError("alpha must be non-negative");
  if (updates_per_step < 1) throw ConfigError("updates per step must be at least 1");
  if (warmup_steps < 0) throw ConfigError("warmup must be non-negative");
}

// ---------------------------------------------------------------- replay

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("replay capacity must be positive");
  data_.reserve(std::min<std::size_t>(capacity_, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
    return;
  }
  data_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  return data_[(head_ + i) % data_.size()];
}

Batch ReplayBuffer::sample(std::size_t n, RngStream& rng) const {
  if (data_.empty()) throw std::logic_error("sampling from an empty replay buffer");
  std::vector<Transition> picked;
  std::vector<std::size_t> idx;
  picked.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(rng.below(data_.size()));
    idx.push_back(k);
    picked.push_back(at(k));
  }
  Batch b = make_batch(picked);
  b.indices = std::move(idx);
  return b;
}

Batch make_batch(const std::vector<Transition>& ts) {
  Batch b;
  if (ts.empty()) return b;
  const auto n = static_cast<Eigen::Index>(ts.size());
  const auto sd = static_cast<Eigen::Index>(ts[0].state.size());
  const auto ad = static_cast<Eigen::Index>(ts[0].action.size());
  b.state.resize(sd, n);
  b.next_state.resize(sd, n);
  b.action.resize(ad, n);
  b.reward.resize(n);
  b.done.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& t = ts[static_cast<std::size_t>(j)];
    b.state.col(j) = Eigen::Map<const Eigen::VectorXd>(t.state.data(), sd);
    b.next_state.col(j) = Eigen::Map<const Eigen::VectorXd>(t.next_state.data(), sd);
    b.action.col(j) = Eigen::Map<const Eigen::VectorXd>(t.action.data(), ad);
    b.reward[j] = t.reward;
    b.done[j] = t.done ? 1.0 : 0.0;
  }
  return b;
}

// ---------------------------------------------------------------- policy head

double squash_log_std(double raw) {
  return kLogStdMin + 0.5 * (kLogStdMax - kLogStdMin) * (std::tanh(raw) + 1.0);
}

double squashed_log_prob(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std,
                         const Eigen::VectorXd& eps) {
  double lp = 0.0;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    const double u = mean[i] + std::exp(log_std[i]) * eps[i];
    lp += -0.5 * eps[i] * eps[i] - log_std[i] - kHalfLog2Pi - log_one_minus_tanh_sq(u);
  }
  return lp;
}

SquashedSample squashed_sample(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std,
                               const Eigen::VectorXd& eps) {
  SquashedSample s;
  s.pre = mean + (log_std.array().exp() * eps.array()).matrix();
  s.unit = s.pre.array().tanh().matrix();
  s.log_prob = squashed_log_prob(mean, log_std, eps);
  return s;
}

int pasac_select(const Eigen::Ref<const Eigen::VectorXd>& w) {
  int best = 0;
  for (Eigen::Index i = 1; i < w.size(); ++i) {
    if (w[i] > w[best]) best = static_cast<int>(i);
  }
  return best;
}

double unit_to_env(double unit, double low, double high) {
  return low + 0.5 * (unit + 1.0) * (high - low);
}

double env_to_unit(double value, double low, double high) {
  return 2.0 * (value - low) / (high - low) - 1.0;
}

// ---------------------------------------------------------------- losses

double critic_loss_and_grad(const Mlp& critic, const Eigen::MatrixXd& state,
                            const Eigen::MatrixXd& action, const Eigen::VectorXd& target,
                            Eigen::VectorXd* grad) {
  const double n = static_cast<double>(state.cols());
  Mlp::Cache cache;
  const Eigen::MatrixXd q = critic.forward(stack(state, action), grad ? &cache : nullptr);
  const Eigen::RowVectorXd diff = q.row(0) - target.transpose();
  const double loss = 0.5 * diff.squaredNorm() / n;
  if (grad) critic.backward(cache, diff / n, *grad);
  return loss;
}

double actor_loss_and_grad(const Mlp& actor, const Mlp& q1, const Mlp& q2,
                           const Eigen::MatrixXd& state, const Eigen::MatrixXd& eps, double alpha,
                           Eigen::VectorXd* grad, double* mean_log_prob) {
  const Eigen::Index k = eps.rows();
  const Eigen::Index n = state.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double half_span = 0.5 * (kLogStdMax - kLogStdMin);

  Mlp::Cache actor_cache;
  const Eigen::MatrixXd out = actor.forward(state, &actor_cache);
  const Eigen::MatrixXd raw = out.bottomRows(k);
  const Eigen::MatrixXd log_std = raw.unaryExpr([](double r) { return squash_log_std(r); });
  const Eigen::MatrixXd sigma = log_std.array().exp().matrix();
  const Eigen::MatrixXd u = out.topRows(k) + sigma.cwiseProduct(eps);
  const Eigen::MatrixXd y = u.array().tanh().matrix();

  Eigen::VectorXd log_prob(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    log_prob[j] = squashed_log_prob(out.col(j).head(k), log_std.col(j), eps.col(j));
  }

  Mlp::Cache c1, c2;
  const Eigen::MatrixXd x = stack(state, y);
  const Eigen::MatrixXd v1 = q1.forward(x, &c1);
  const Eigen::MatrixXd v2 = q2.forward(x, &c2);
  Eigen::MatrixXd g1 = Eigen::MatrixXd::Zero(1, n);
  Eigen::MatrixXd g2 = Eigen::MatrixXd::Zero(1, n);
  double loss = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const bool first = v1(0, j) <= v2(0, j);
    loss += alpha * log_prob[j] - (first ? v1(0, j) : v2(0, j));
    (first ? g1 : g2)(0, j) = -inv_n;
  }
  loss *= inv_n;
  if (mean_log_prob) *mean_log_prob = log_prob.mean();
  if (!grad) return loss;

  // Input gradients of the critics; their parameter gradients are discarded.
  Eigen::VectorXd scratch1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(q1.param_count()));
  Eigen::VectorXd scratch2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(q2.param_count()));
  const Eigen::MatrixXd dx = q1.backward(c1, g1, scratch1) + q2.backward(c2, g2, scratch2);
  const Eigen::MatrixXd dy = dx.bottomRows(k);

  // d log_prob / du = 2 tanh(u); d log_prob / d log_std = -1 (direct).
  const Eigen::MatrixXd gu =
      (alpha * inv_n * 2.0) * y + dy.cwiseProduct((1.0 - y.array().square()).matrix());
  Eigen::MatrixXd g_out(2 * k, n);
  g_out.topRows(k) = gu;
  const Eigen::MatrixXd g_log_std =
      (gu.array() * sigma.array() * eps.array() - alpha * inv_n).matrix();
  g_out.bottomRows(k) =
      (g_log_std.array() * half_span * (1.0 - raw.array().tanh().square())).matrix();
  actor.backward(actor_cache, g_out, *grad);
  return loss;
}

// ---------------------------------------------------------------- agent

SacAgent::SacAgent(std::size_t obs_dim, ActionSpace space, std::vector<double> obs_scale,
                   SacHyper hyper, std::uint64_t seed)
    : obs_dim_(obs_dim),
      action_dim_(space.low.size() + static_cast<std::size_t>(space.discrete_count)),
      space_(std::move(space)),
      obs_scale_(std::move(obs_scale)),
      hyper_(std::move(hyper)),
      log_alpha_(std::log(hyper_.initial_alpha)) {
  hyper_.validate();
  if (obs_scale_.size() != obs_dim_) throw ConfigError("observation scale has the wrong size");
  actor_ = Mlp(net_sizes(obs_dim_, hyper_.hidden, 2 * action_dim_), hyper_.activation);
  q1_ = Mlp(net_sizes(obs_dim_ + action_dim_, hyper_.hidden, 1), hyper_.activation);
  q2_ = q1_;
  RngStream init(seed, StreamId::kInit);
  actor_.init(init);
  q1_.init(init);
  q2_.init(init);
  q1_target_ = q1_;
  q2_target_ = q2_;
  actor_opt_ = Adam(actor_.param_count(), hyper_.lr);
  q1_opt_ = Adam(q1_.param_count(), hyper_.lr);
  q2_opt_ = Adam(q2_.param_count(), hyper_.lr);
}

double SacAgent::alpha() const { return std::exp(log_alpha_); }

double SacAgent::target_entropy() const {
  return hyper_.target_entropy.value_or(-static_cast<double>(action_dim_));
}

std::vector<double> SacAgent::normalize(const std::vector<double>& raw) const {
  if (raw.size() != obs_dim_) {
    throw std::invalid_argument("observation has " + std::to_string(raw.size()) +
                                " entries, policy expects " + std::to_string(obs_dim_));
  }
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] / obs_scale_[i];
  return out;
}

EnvAction SacAgent::to_env(const Eigen::VectorXd& unit) const {
  EnvAction a;
  const std::size_t nc = space_.low.size();
  for (std::size_t i = 0; i < nc; ++i) {
    a.continuous.push_back(unit_to_env(unit[static_cast<Eigen::Index>(i)], space_.low[i], space_.high[i]));
  }
  if (space_.discrete_count > 0) {
    a.discrete = pasac_select(unit.tail(space_.discrete_count));
  }
  return a;
}

PolicyAction SacAgent::act(const std::vector<double>& raw_obs, bool deterministic,
                           RngStream& rng) const {
  const std::vector<double> x = normalize(raw_obs);
  const Eigen::VectorXd out =
      actor_.forward(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())));
  const auto k = static_cast<Eigen::Index>(action_dim_);
  PolicyAction pa;
  if (deterministic) {
    pa.unit = out.head(k).array().tanh().matrix();
    pa.log_prob = std::numeric_limits<double>::quiet_NaN();
  } else {
    Eigen::VectorXd eps(k);
    for (Eigen::Index i = 0; i < k; ++i) eps[i] = rng.normal();
    const Eigen::VectorXd log_std = out.tail(k).unaryExpr([](double r) { return squash_log_std(r); });
    SquashedSample s = squashed_sample(out.head(k), log_std, eps);
    pa.unit = std::move(s.unit);
    pa.log_prob = s.log_prob;
  }
  pa.env = to_env(pa.unit);
  return pa;
}

PolicyAction SacAgent::random_action(RngStream& rng) const {
  PolicyAction pa;
  pa.unit.resize(static_cast<Eigen::Index>(action_dim_));
  for (Eigen::Index i = 0; i < pa.unit.size(); ++i) pa.unit[i] = rng.uniform(-1.0, 1.0);
  pa.log_prob = -static_cast<double>(action_dim_) * std::numbers::ln2;
  pa.env = to_env(pa.unit);
  return pa;
}

UpdateDiagnostics SacAgent::update(const Batch& batch, RngStream& rng) {
  const auto k = static_cast<Eigen::Index>(action_dim_);
  const Eigen::Index n = batch.state.cols();
  const double alpha = this->alpha();
  UpdateDiagnostics diag;

  auto draw_eps = [&] {
    Eigen::MatrixXd e(k, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < k; ++i) e(i, j) = rng.normal();
    return e;
  };

  // Soft Bellman target from the target critics.
  Eigen::VectorXd target(n);
  {
    const Eigen::MatrixXd eps = draw_eps();
    const Eigen::MatrixXd out = actor_.forward(batch.next_state);
    Eigen::MatrixXd next_action(k, n);
    Eigen::VectorXd next_lp(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::VectorXd ls = out.col(j).tail(k).unaryExpr([](double r) { return squash_log_std(r); });
      SquashedSample s = squashed_sample(out.col(j).head(k), ls, eps.col(j));
      next_action.col(j) = s.unit;
      next_lp[j] = s.log_prob;
    }
    const Eigen::MatrixXd x = stack(batch.next_state, next_action);
    const Eigen::MatrixXd t1 = q1_target_.forward(x);
    const Eigen::MatrixXd t2 = q2_target_.forward(x);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double soft = std::min(t1(0, j), t2(0, j)) - alpha * next_lp[j];
      target[j] = batch.reward[j] + hyper_.gamma * (1.0 - batch.done[j]) * soft;
    }
  }

  Eigen::VectorXd g1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(q1_.param_count()));
  Eigen::VectorXd g2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(q2_.param_count()));
  const double l1 = critic_loss_and_grad(q1_, batch.state, batch.action, target, &g1);
  const double l2 = critic_loss_and_grad(q2_, batch.state, batch.action, target, &g2);
  diag.critic_loss = 0.5 * (l1 + l2);
  if (!std::isfinite(diag.critic_loss)) dump_batch(batch, "critic loss");
  diag.mean_q = q1_.forward(stack(batch.state, batch.action)).mean();
  q1_opt_.step(q1_.params(), g1);
  q2_opt_.step(q2_.params(), g2);

  Eigen::VectorXd ga = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(actor_.param_count()));
  double mean_lp = 0.0;
  diag.actor_loss = actor_loss_and_grad(actor_, q1_, q2_, batch.state, draw_eps(), alpha, &ga, &mean_lp);
  if (!std::isfinite(diag.actor_loss)) dump_batch(batch, "actor loss");
  actor_opt_.step(actor_.params(), ga);
  diag.entropy = -mean_lp;

  if (hyper_.auto_alpha) {
    const double h = target_entropy();
    diag.alpha_loss = -log_alpha_ * (mean_lp + h);
    const double g = -(mean_lp + h);
    ++alpha_t_;
    alpha_m_ = 0.9 * alpha_m_ + 0.1 * g;
    alpha_v_ = 0.999 * alpha_v_ + 0.001 * g * g;
    const double mh = alpha_m_ / (1.0 - std::pow(0.9, static_cast<double>(alpha_t_)));
    const double vh = alpha_v_ / (1.0 - std::pow(0.999, static_cast<double>(alpha_t_)));
    log_alpha_ -= hyper_.lr * mh / (std::sqrt(vh) + 1e-8);
  }
  diag.alpha = this->alpha();

  const double tau = hyper_.tau;
  q1_target_.params() = tau * q1_.params() + (1.0 - tau) * q1_target_.params();
  q2_target_.params() = tau * q2_.params() + (1.0 - tau) * q2_target_.params();
  return diag;
}

void SacAgent::dump_batch(const Batch& batch, const char* what) const {
  std::string where = "not dumped";
  if (!dump_path_.empty()) {
    std::ofstream out(dump_path_);
    out << std::setprecision(17);
    for (Eigen::Index j = 0; j < batch.state.cols(); ++j) {
      for (Eigen::Index i = 0; i < batch.state.rows(); ++i) out << batch.state(i, j) << ',';
      for (Eigen::Index i = 0; i < batch.action.rows(); ++i) out << batch.action(i, j) << ',';
      out << batch.reward[j] << ',' << batch.done[j];
      for (Eigen::Index i = 0; i < batch.next_state.rows(); ++i) out << ',' << batch.next_state(i, j);
      out << '\n';
    }
    where = "dumped to " + dump_path_.string();
  }
  throw NonFiniteLoss(std::string("non-finite ") + what + "; batch " + where);
}

// ---------------------------------------------------------------- checkpoint

void SacAgent::save(std::ostream& out) const {
  out << std::setprecision(17);
  out << "drtraffic-checkpoint 1\n";
  out << "obs_dim " << obs_dim_ << '\n';
  out << "obs_scale";
  for (double s : obs_scale_) out << ' ' << s;
  out << '\n';
  out << "action_continuous " << space_.low.size();
  for (std::size_t i = 0; i < space_.low.size(); ++i) out << ' ' << space_.low[i] << ' ' << space_.high[i];
  out << '\n';
  out << "action_discrete " << space_.discrete_count << '\n';
  out << "hyper gamma " << hyper_.gamma << " tau " << hyper_.tau << " lr " << hyper_.lr
      << " batch " << hyper_.batch_size << " buffer " << hyper_.buffer_capacity << " warmup "
      << hyper_.warmup_steps << " utd " << hyper_.updates_per_step << " auto_alpha "
      << (hyper_.auto_alpha ? 1 : 0) << " initial_alpha " << hyper_.initial_alpha
      << " target_entropy " << target_entropy() << " activation "
      << activation_name(hyper_.activation) << '\n';
  out << "log_alpha " << log_alpha_ << '\n';
  write_net(out, "actor", actor_);
  write_net(out, "q1", q1_);
  write_net(out, "q2", q2_);
  write_net(out, "q1_target", q1_target_);
  write_net(out, "q2_target", q2_target_);
  out << "end\n";
}

void SacAgent::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  save(out);
}

SacAgent SacAgent::load(std::istream& in) {
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "drtraffic-checkpoint" || version != 1) throw MissingCheckpoint("not a checkpoint file");
  std::size_t obs_dim = 0, nc = 0;
  expect_key(in, "obs_dim");
  in >> obs_dim;
  expect_key(in, "obs_scale");
  std::vector<double> scale(obs_dim);
  for (auto& s : scale) in >> s;
  ActionSpace space;
  expect_key(in, "action_continuous");
  in >> nc;
  space.low.resize(nc);
  space.high.resize(nc);
  for (std::size_t i = 0; i < nc; ++i) in >> space.low[i] >> space.high[i];
  expect_key(in, "action_discrete");
  in >> space.discrete_count;

  SacHyper h;
  std::string act;
  int auto_alpha = 1;
  double target_entropy = 0.0;
  expect_key(in, "hyper");
  expect_key(in, "gamma"); in >> h.gamma;
  expect_key(in, "tau"); in >> h.tau;
  expect_key(in, "lr"); in >> h.lr;
  expect_key(in, "batch"); in >> h.batch_size;
  expect_key(in, "buffer"); in >> h.buffer_capacity;
  expect_key(in, "warmup"); in >> h.warmup_steps;
  expect_key(in, "utd"); in >> h.updates_per_step;
  expect_key(in, "auto_alpha"); in >> auto_alpha;
  expect_key(in, "initial_alpha"); in >> h.initial_alpha;
  expect_key(in, "target_entropy"); in >> target_entropy;
  expect_key(in, "activation"); in >> act;
  if (!in) throw MissingCheckpoint("checkpoint: truncated header");
  h.auto_alpha = auto_alpha != 0;
  h.target_entropy = target_entropy;
  h.activation = parse_activation(act);

  double log_alpha = 0.0;
  expect_key(in, "log_alpha");
  in >> log_alpha;

  Mlp actor, q1, q2, q1t, q2t;
  read_net(in, "actor", actor, h.activation);
  read_net(in, "q1", q1, h.activation);
  read_net(in, "q2", q2, h.activation);
  read_net(in, "q1_target", q1t, h.activation);
  read_net(in, "q2_target", q2t, h.activation);
  expect_key(in, "end");

  h.hidden.assign(actor.sizes().begin() + 1, actor.sizes().end() - 1);
  SacAgent agent(obs_dim, space, scale, h, 0);
  agent.actor_ = std::move(actor);
  agent.q1_ = std::move(q1);
  agent.q2_ = std::move(q2);
  agent.q1_target_ = std::move(q1t);
  agent.q2_target_ = std::move(q2t);
  agent.log_alpha_ = log_alpha;
  return agent;
}

SacAgent SacAgent::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingCheckpoint("missing checkpoint " + path.string());
  return load(in);
}

}  // namespace drtraffic
