#pragma once
// Central finite-difference checks of the analytic SAC gradients.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>

#include "drtraffic/nn.hpp"
#include "drtraffic/rng.hpp"
#include "drtraffic/sac.hpp"

namespace gradcheck {

/// ||analytic - numeric|| / max(||analytic||, ||numeric||, 1e-12).
inline double relative_error(const Eigen::VectorXd& analytic, const std::function<double()>& loss,
                             Eigen::VectorXd& params, double h = 1e-6) {
  Eigen::VectorXd numeric(params.size());
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + h;
    const double up = loss();
    params[i] = keep - h;
    const double down = loss();
    params[i] = keep;
    numeric[i] = (up - down) / (2 * h);
  }
  const double scale = std::max({analytic.norm(), numeric.norm(), 1e-12});
  return (analytic - numeric).norm() / scale;
}

inline Eigen::MatrixXd gaussian(Eigen::Index r, Eigen::Index c, drtraffic::RngStream& rng,
                                double scale = 1.0) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = scale * rng.normal();
  return m;
}

struct InstanceErrors {
  double critic = 0.0;
  double actor = 0.0;
  double mlp_input = 0.0;
};

/// One random instance: small networks, random batch, random alpha. Uses
/// tanh hidden units when `smooth`, otherwise ReLU.
inline InstanceErrors check_instance(std::uint64_t seed, bool smooth) {
  using namespace drtraffic;
  RngStream rng(seed, StreamId::kInit);
  const int obs = 2 + static_cast<int>(rng.below(4));
  const int k = 1 + static_cast<int>(rng.below(3));
  const int hidden = 4 + static_cast<int>(rng.below(8));
  const int batch = 3 + static_cast<int>(rng.below(6));
  const Activation act = smooth ? Activation::kTanh : Activation::kRelu;
  Mlp actor({obs, hidden, hidden, 2 * k}, act);
  Mlp q1({obs + k, hidden, hidden, 1}, act);
  Mlp q2({obs + k, hidden, hidden, 1}, act);
  actor.init(rng);
  q1.init(rng);
  q2.init(rng);
  const Eigen::MatrixXd state = gaussian(obs, batch, rng);
  const Eigen::MatrixXd action = gaussian(k, batch, rng, 0.5).array().tanh().matrix();
  const Eigen::VectorXd target = gaussian(batch, 1, rng);
  const Eigen::MatrixXd eps = gaussian(k, batch, rng);
  const double alpha = 0.05 + rng.uniform();

  InstanceErrors e;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(q1.param_count()));
  critic_loss_and_grad(q1, state, action, target, &g);
  e.critic = relative_error(
      g, [&] { return critic_loss_and_grad(q1, state, action, target, nullptr); }, q1.params());

  Eigen::VectorXd ga = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(actor.param_count()));
  actor_loss_and_grad(actor, q1, q2, state, eps, alpha, &ga);
  e.actor = relative_error(
      ga, [&] { return actor_loss_and_grad(actor, q1, q2, state, eps, alpha, nullptr); },
      actor.params());

  // Input gradient of a scalar readout sum(w .* f(x)).
  Mlp::Cache cache;
  Eigen::MatrixXd x = state;
  const Eigen::MatrixXd w = gaussian(2 * k, batch, rng);
  actor.forward(x, &cache);
  Eigen::VectorXd scratch = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(actor.param_count()));
  const Eigen::MatrixXd dx = actor.backward(cache, w, scratch);
  Eigen::VectorXd flat = Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
  const Eigen::VectorXd dflat = Eigen::Map<const Eigen::VectorXd>(dx.data(), dx.size());
  e.mlp_input = relative_error(
      dflat,
      [&] {
        const Eigen::MatrixXd xx = Eigen::Map<const Eigen::MatrixXd>(flat.data(), obs, batch);
        return actor.forward(xx).cwiseProduct(w).sum();
      },
      flat);
  return e;
}

}  // namespace gradcheck
