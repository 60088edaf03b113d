#include "bluff/network.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bluff {
namespace {

void CheckSizes(std::span<const int> sizes) {
  if (sizes.size() < 2) throw std::invalid_argument("network needs at least two layer sizes");
  for (int s : sizes) {
    if (s <= 0) throw std::invalid_argument("layer sizes must be positive");
  }
}

}  // namespace

double XavierBound(int fan_in, int fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

MlpParams MlpParams::Zeros(std::span<const int> sizes) {
  CheckSizes(sizes);
  MlpParams p;
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    p.weights.push_back(Eigen::MatrixXd::Zero(sizes[l + 1], sizes[l]));
    p.biases.push_back(Eigen::VectorXd::Zero(sizes[l + 1]));
  }
  return p;
}

MlpParams MlpParams::XavierUniform(std::span<const int> sizes, Rng& rng) {
  MlpParams p = Zeros(sizes);
  for (auto& w : p.weights) {
    const double bound = XavierBound(static_cast<int>(w.cols()), static_cast<int>(w.rows()));
    // Row-major draw order, fixed so a seed always yields the same network.
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = UniformReal(rng, -bound, bound);
    }
  }
  return p;
}

std::vector<int> MlpParams::LayerSizes() const {
  std::vector<int> sizes;
  if (weights.empty()) return sizes;
  sizes.push_back(static_cast<int>(weights.front().cols()));
  for (const auto& w : weights) sizes.push_back(static_cast<int>(w.rows()));
  return sizes;
}

int64_t MlpParams::NumParams() const {
  int64_t n = 0;
  for (size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

bool MlpParams::AllFinite() const {
  for (size_t l = 0; l < weights.size(); ++l) {
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  }
  return true;
}

MlpParams MlpParams::ZerosLike() const {
  const auto sizes = LayerSizes();
  return Zeros(sizes);
}

bool operator==(const MlpParams& a, const MlpParams& b) {
  if (a.weights.size() != b.weights.size()) return false;
  for (size_t l = 0; l < a.weights.size(); ++l) {
    if (a.weights[l].rows() != b.weights[l].rows() ||
        a.weights[l].cols() != b.weights[l].cols() || a.weights[l] != b.weights[l] ||
        a.biases[l] != b.biases[l]) {
      return false;
    }
  }
  return true;
}

InputNorm InputNorm::Identity(int features) {
  return InputNorm{Eigen::VectorXd::Zero(features), Eigen::VectorXd::Ones(features)};
}

Eigen::MatrixXd InputNorm::Apply(const Eigen::MatrixXd& inputs, Mode mode) const {
  if (mode == Mode::kEval) {
    const Eigen::ArrayXd inv_std = (running_var.array() + kEpsilon).rsqrt();
    return ((inputs.colwise() - running_mean).array().colwise() * inv_std).matrix();
  }
  const Eigen::VectorXd mean = inputs.rowwise().mean();
  const Eigen::MatrixXd centered = inputs.colwise() - mean;
  const Eigen::ArrayXd var = centered.array().square().rowwise().mean();
  const Eigen::ArrayXd inv_std = (var + kEpsilon).rsqrt();
  return (centered.array().colwise() * inv_std).matrix();
}

void InputNorm::Update(const Eigen::MatrixXd& inputs) {
  const Eigen::Index n = inputs.cols();
  const Eigen::VectorXd mean = inputs.rowwise().mean();
  Eigen::VectorXd var = (inputs.colwise() - mean).array().square().rowwise().sum().matrix();
  var /= static_cast<double>(n > 1 ? n - 1 : 1);
  running_mean = kMomentum * running_mean + (1.0 - kMomentum) * mean;
  running_var = kMomentum * running_var + (1.0 - kMomentum) * var;
}

bool operator==(const InputNorm& a, const InputNorm& b) {
  return a.running_mean.size() == b.running_mean.size() &&
         a.running_mean == b.running_mean && a.running_var == b.running_var;
}

Eigen::MatrixXd MlpForward(const MlpParams& params, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd h = x;
  const size_t last = params.weights.size() - 1;
  for (size_t l = 0; l <= last; ++l) {
    Eigen::MatrixXd z = params.weights[l] * h;
    z.colwise() += params.biases[l];
    h = l == last ? std::move(z) : Eigen::MatrixXd(z.array().tanh());
  }
  return h;
}

double TdLossAndGradient(const MlpParams& params, const Eigen::MatrixXd& x,
                         std::span<const int> actions, const Eigen::VectorXd& targets,
                         MlpParams* grad) {
  const Eigen::Index batch = x.cols();
  if (static_cast<Eigen::Index>(actions.size()) != batch || targets.size() != batch) {
    throw std::invalid_argument("batch, actions and targets must have equal length");
  }
  const size_t layers = params.weights.size();

  // activations[l] is the input to layer l.
  std::vector<Eigen::MatrixXd> activations;
  activations.reserve(layers);
  activations.push_back(x);
  Eigen::MatrixXd out;
  for (size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = params.weights[l] * activations.back();
    z.colwise() += params.biases[l];
    if (l + 1 == layers) {
      out = std::move(z);
    } else {
      activations.push_back(z.array().tanh().matrix());
    }
  }

  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(out.rows(), batch);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < batch; ++i) {
    const int a = actions[i];
    if (a < 0 || a >= out.rows()) throw std::invalid_argument("action index out of range");
    const double err = out(a, i) - targets[i];
    loss += err * err;
    delta(a, i) = 2.0 * err / static_cast<double>(batch);
  }
  loss /= static_cast<double>(batch);

  if (grad == nullptr) return loss;
  grad->weights.resize(layers);
  grad->biases.resize(layers);
  for (size_t l = layers; l-- > 0;) {
    grad->weights[l] = delta * activations[l].transpose();
    grad->biases[l] = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = params.weights[l].transpose() * delta;
    delta = (back.array() * (1.0 - activations[l].array().square())).matrix();
  }
  return loss;
}

QNetwork QNetwork::Create(std::span<const int> sizes, Rng& rng) {
  QNetwork net;
  net.params = MlpParams::XavierUniform(sizes, rng);
  net.norm = InputNorm::Identity(sizes.front());
  return net;
}

Eigen::MatrixXd QNetwork::Forward(const Eigen::MatrixXd& inputs, Mode mode) const {
  if (inputs.rows() != input_size()) {
    throw std::invalid_argument("expected input of size " + std::to_string(input_size()) +
                                ", got " + std::to_string(inputs.rows()));
  }
  return MlpForward(params, norm.Apply(inputs, mode));
}

Eigen::VectorXd QNetwork::Forward(std::span<const double> input) const {
  const Eigen::Map<const Eigen::MatrixXd> x(input.data(), static_cast<Eigen::Index>(input.size()), 1);
  return Forward(Eigen::MatrixXd(x), Mode::kEval).col(0);
}

Adam::Adam(const MlpParams& shape, AdamConfig config)
    : config_(config), m_(shape.ZerosLike()), v_(shape.ZerosLike()) {}

void Adam::Step(MlpParams& params, const MlpParams& grad) {
  ++step_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const double lr = config_.learning_rate;
  const double eps = config_.epsilon;
  for (size_t l = 0; l < params.weights.size(); ++l) {
    auto update = [&](auto p, auto g, auto m, auto v) {
      m = b1 * m + (1.0 - b1) * g;
      v = b2 * v + (1.0 - b2) * g.square();
      p -= lr * (m / correction1) / ((v / correction2).sqrt() + eps);
    };
    update(params.weights[l].array(), grad.weights[l].array(), m_.weights[l].array(),
           v_.weights[l].array());
    update(params.biases[l].array(), grad.biases[l].array(), m_.biases[l].array(),
           v_.biases[l].array());
  }
}

void Adam::Restore(int64_t step, MlpParams m, MlpParams v) {
  step_ = step;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace bluff
