#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string_view>
#include <vector>

#include "drtraffic/rng.hpp"

namespace drtraffic {

enum class Activation { kRelu, kTanh };

std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view name);

/// Fully connected network with a linear output layer. All parameters live in
/// one flat vector: per layer, the weight matrix (row-major, out x in)
/// followed by the bias. Batches are column-major, one sample per column.
class Mlp {
 public:
  struct Cache {
    std::vector<Eigen::MatrixXd> pre;   ///< pre-activations per layer
    std::vector<Eigen::MatrixXd> post;  ///< post[0] is the input
  };

  Mlp() = default;
  Mlp(std::vector<int> sizes, Activation activation);
  /// PyTorch-style default init: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  void init(RngStream& rng);

  const std::vector<int>& sizes() const { return sizes_; }
  Activation activation() const { return activation_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  std::size_t param_count() const { return static_cast<std::size_t>(params_.size()); }
  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Cache* cache = nullptr) const;

  /// Reverse pass. Adds dL/dparams into grad (sized param_count) and
  /// returns dL/dinput.
  Eigen::MatrixXd backward(const Cache& cache, const Eigen::MatrixXd& grad_out,
                           Eigen::VectorXd& grad) const;

 private:
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMajor> weight(std::size_t layer) const;
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const;

  std::vector<int> sizes_;
  Activation activation_ = Activation::kRelu;
  std::vector<std::size_t> offsets_;
  Eigen::VectorXd params_;
};

class Adam {
 public:
  Adam() = default;
  Adam(std::size_t n, double lr) : lr_(lr), m_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))),
                                   v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))) {}
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);
  long steps() const { return t_; }

 private:
  double lr_ = 3e-4;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  Eigen::VectorXd m_, v_;
  long t_ = 0;
};

}  // namespace drtraffic
