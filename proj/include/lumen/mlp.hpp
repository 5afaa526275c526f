#pragma once

#include "lumen/dataset.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lumen {

/// Fully connected layer, y = x W + b with W stored fan_in x fan_out.
template <typename Scalar>
struct DenseLayer {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> weights;
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> bias;

  Eigen::Index fan_in() const { return weights.rows(); }
  Eigen::Index fan_out() const { return weights.cols(); }

  static DenseLayer zeros(Eigen::Index fan_in, Eigen::Index fan_out)
  {
    return {decltype(weights)::Zero(fan_in, fan_out), decltype(bias)::Zero(fan_out)};
  }
};

/// ReLU hidden layers, identity on the last layer. Also used to hold
/// gradients and optimizer moments, which share the parameter shapes.
template <typename Scalar>
struct BasicNetwork {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  std::vector<DenseLayer<Scalar>> layers;

  Eigen::Index input_dim() const { return layers.empty() ? 0 : layers.front().fan_in(); }

  BasicNetwork zeros_like() const
  {
    BasicNetwork out;
    for (const auto& l : layers)
      out.layers.push_back(DenseLayer<Scalar>::zeros(l.fan_in(), l.fan_out()));
    return out;
  }

  /// Batch forward pass: one input per row, returns one output per row.
  template <typename Derived>
  Vector forward(const Eigen::MatrixBase<Derived>& inputs) const
  {
    if (inputs.cols() != input_dim())
      throw std::invalid_argument("forward: input arity does not match the network");
    Matrix a = inputs.template cast<Scalar>();
    for (std::size_t i = 0; i < layers.size(); ++i) {
      Matrix z = a * layers[i].weights;
      z.rowwise() += layers[i].bias;
      a = (i + 1 < layers.size()) ? Matrix(z.cwiseMax(Scalar(0))) : std::move(z);
    }
    return a.col(0);
  }
};

/// Mean squared error over a batch and its gradient with respect to every
/// parameter. The ReLU derivative at exactly zero is taken as 0.
template <typename Scalar, typename DerivedX, typename DerivedY>
std::pair<Scalar, BasicNetwork<Scalar>> loss_and_gradients(const BasicNetwork<Scalar>& net,
                                                           const Eigen::MatrixBase<DerivedX>& inputs,
                                                           const Eigen::MatrixBase<DerivedY>& targets)
{
  using Matrix = typename BasicNetwork<Scalar>::Matrix;
  const Eigen::Index batch = inputs.rows();
  if (batch == 0 || targets.size() != batch)
    throw std::invalid_argument("loss_and_gradients: need a non-empty batch with one target per row");
  if (inputs.cols() != net.input_dim())
    throw std::invalid_argument("loss_and_gradients: input arity does not match the network");

  const std::size_t depth = net.layers.size();
  std::vector<Matrix> activations; // activations[i] feeds layer i
  std::vector<Matrix> pre;         // pre-activations of layer i
  activations.reserve(depth + 1);
  pre.reserve(depth);
  activations.push_back(inputs.template cast<Scalar>());
  for (std::size_t i = 0; i < depth; ++i) {
    Matrix z = activations.back() * net.layers[i].weights;
    z.rowwise() += net.layers[i].bias;
    pre.push_back(std::move(z));
    if (i + 1 < depth)
      activations.push_back(pre.back().cwiseMax(Scalar(0)));
  }

  const Matrix residual = pre.back().col(0) - targets.template cast<Scalar>();
  const Scalar loss = residual.squaredNorm() / Scalar(batch);

  BasicNetwork<Scalar> grads = net.zeros_like();
  Matrix delta = residual * (Scalar(2) / Scalar(batch));
  for (std::size_t k = depth; k-- > 0;) {
    grads.layers[k].weights.noalias() = activations[k].transpose() * delta;
    grads.layers[k].bias = delta.colwise().sum();
    if (k > 0) {
      Matrix upstream = delta * net.layers[k].weights.transpose();
      delta = (pre[k - 1].array() > Scalar(0)).select(upstream, Scalar(0));
    }
  }
  return {loss, std::move(grads)};
}

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename Scalar>
struct BasicAdamState {
  BasicNetwork<Scalar> m;
  BasicNetwork<Scalar> v;
  std::int64_t t = 0;

  static BasicAdamState for_network(const BasicNetwork<Scalar>& net)
  {
    return {net.zeros_like(), net.zeros_like(), 0};
  }
};

namespace detail {

template <typename Param, typename Grad, typename Moment>
void adam_update(Param& param, const Grad& grad, Moment& m, Moment& v, const AdamConfig& cfg,
                 double correction1, double correction2)
{
  using Scalar = typename Param::Scalar;
  const auto b1 = Scalar(cfg.beta1), b2 = Scalar(cfg.beta2);
  m = b1 * m + (Scalar(1) - b1) * grad;
  v = b2 * v + (Scalar(1) - b2) * grad.cwiseAbs2();
  param.array() -= Scalar(cfg.learning_rate) * (m.array() / Scalar(correction1))
                   / ((v.array() / Scalar(correction2)).sqrt() + Scalar(cfg.epsilon));
}

} // namespace detail

/// One bias-corrected Adam update of every parameter.
template <typename Scalar>
void adam_step(BasicAdamState<Scalar>& state, BasicNetwork<Scalar>& params,
               const BasicNetwork<Scalar>& grads, const AdamConfig& cfg)
{
  if (state.m.layers.size() != params.layers.size() || grads.layers.size() != params.layers.size())
    throw std::invalid_argument("adam_step: state, parameter and gradient shapes disagree");
  ++state.t;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    auto& p = params.layers[i];
    const auto& g = grads.layers[i];
    detail::adam_update(p.weights, g.weights, state.m.layers[i].weights, state.v.layers[i].weights,
                        cfg, c1, c2);
    detail::adam_update(p.bias, g.bias, state.m.layers[i].bias, state.v.layers[i].bias, cfg, c1, c2);
  }
}

using Network = BasicNetwork<double>;
using AdamState = BasicAdamState<double>;

struct MlpConfig {
  int input_dim = 3;
  std::vector<int> hidden{32, 128};
  AdamConfig adam;
  int epochs = 250;
  int batch_size = 128;
  std::uint64_t seed = 0;

  void validate() const;
};

/// "mlp32x128" or "mlp64x256"; other training fields keep their defaults.
MlpConfig mlp_preset(std::string_view name, int input_dim);

struct TrainingLog {
  std::vector<double> train_mse;
  std::vector<double> validation_mse;
};

struct MlpModel {
  MlpConfig config;
  Network network;
  NormStats norm;
  TrainingLog log;
};

/// He-normal weights (std sqrt(2 / fan_in)) and zero biases.
MlpModel init(const MlpConfig& config);

/// Forward pass in the normalized domain for one normalized input vector.
double forward(const MlpModel& model, const Eigen::VectorXd& normalized_features);

/// Fixed-epoch minibatch Adam on the training split; the validation split is
/// only logged. Normalization statistics are fit on the training split.
MlpModel train(const MlpConfig& config, const SplitSets& splits);

/// RSS in dBm for raw (un-normalized) features.
double predict(const MlpModel& model, const Eigen::VectorXd& raw_features);
Eigen::VectorXd predict(const MlpModel& model, const Eigen::MatrixXd& raw_features);

inline constexpr int kMlpFormatVersion = 1;

nlohmann::json mlp_to_json(const MlpModel& model);
MlpModel mlp_from_json(const nlohmann::json& doc);

void save_model(const MlpModel& model, const std::string& path);
/// Throws ModelFormatError or ModelVersionError.
MlpModel load_model(const std::string& path);

} // namespace lumen
