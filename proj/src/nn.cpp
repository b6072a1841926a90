#include "drtraffic/nn.hpp"

#include <cmath>
#include <string>

#include "drtraffic/errors.hpp"

namespace drtraffic {

std::string_view activation_name(Activation a) { return a == Activation::kRelu ? "relu" : "tanh"; }

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

Mlp::Mlp(std::vector<int> sizes, Activation activation)
    : sizes_(std::move(sizes)), activation_(activation) {
  if (sizes_.size() < 2) throw ConfigError("an MLP needs at least input and output sizes");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(total);
    total += static_cast<std::size_t>(sizes_[l + 1]) * (static_cast<std::size_t>(sizes_[l]) + 1);
  }
  params_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(total));
}

void Mlp::init(RngStream& rng) {
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
    const std::size_t count =
        static_cast<std::size_t>(sizes_[l + 1]) * (static_cast<std::size_t>(sizes_[l]) + 1);
    for (std::size_t i = 0; i < count; ++i) {
      params_[static_cast<Eigen::Index>(offsets_[l] + i)] = rng.uniform(-bound, bound);
    }
  }
}

Eigen::Map<const Mlp::RowMajor> Mlp::weight(std::size_t layer) const {
  return {params_.data() + offsets_[layer], sizes_[layer + 1], sizes_[layer]};
}

Eigen::Map<const Eigen::VectorXd> Mlp::bias(std::size_t layer) const {
  const auto w = static_cast<std::size_t>(sizes_[layer + 1]) * static_cast<std::size_t>(sizes_[layer]);
  return {params_.data() + offsets_[layer] + w, sizes_[layer + 1]};
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Cache* cache) const {
  const std::size_t layers = sizes_.size() - 1;
  if (cache) {
    cache->pre.assign(layers, {});
    cache->post.assign(layers + 1, {});
    cache->post[0] = x;
  }
  Eigen::MatrixXd h = x;
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = weight(l) * h;
    z.colwise() += bias(l);
    if (l + 1 == layers) {
      h = z;
    } else if (activation_ == Activation::kRelu) {
      h = z.cwiseMax(0.0);
    } else {
      h = z.array().tanh().matrix();
    }
    if (cache) {
      cache->pre[l] = std::move(z);
      cache->post[l + 1] = h;
    }
  }
  return h;
}

Eigen::MatrixXd Mlp::backward(const Cache& cache, const Eigen::MatrixXd& grad_out,
                              Eigen::VectorXd& grad) const {
  const std::size_t layers = sizes_.size() - 1;
  Eigen::MatrixXd delta = grad_out;
  for (std::size_t l = layers; l-- > 0;) {
    if (l + 1 != layers) {
      if (activation_ == Activation::kRelu) {
        delta = delta.cwiseProduct((cache.pre[l].array() > 0.0).cast<double>().matrix());
      } else {
        delta = delta.cwiseProduct(
            (1.0 - cache.post[l + 1].array().square()).matrix());
      }
    }
    const int out = sizes_[l + 1];
    const int in = sizes_[l];
    Eigen::Map<RowMajor> gw(grad.data() + offsets_[l], out, in);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + offsets_[l] + static_cast<std::size_t>(out) * in, out);
    gw.noalias() += delta * cache.post[l].transpose();
    gb += delta.rowwise().sum();
    delta = weight(l).transpose() * delta;
  }
  return delta;
}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

}  // namespace drtraffic
