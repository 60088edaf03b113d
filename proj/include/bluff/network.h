#ifndef BLUFF_NETWORK_H_
#define BLUFF_NETWORK_H_

// Small fully connected Q-network: input normalisation, tanh hidden layers,
// linear output head. Batches are stored column-per-sample.

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "bluff/rng.h"

namespace bluff {

enum class Mode { kTrain, kEval };

// Trainable parameters. weights[l] is (out x in); biases[l] has `out` rows.
struct MlpParams {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  // sizes = {input, hidden..., output}
  static MlpParams Zeros(std::span<const int> sizes);
  // Weights ~ U(-b, b) with b = sqrt(6 / (fan_in + fan_out)); biases zero.
  static MlpParams XavierUniform(std::span<const int> sizes, Rng& rng);

  std::vector<int> LayerSizes() const;
  int64_t NumParams() const;
  bool AllFinite() const;
  MlpParams ZerosLike() const;

  friend bool operator==(const MlpParams& a, const MlpParams& b);
};

double XavierBound(int fan_in, int fan_out);

// Per-feature normalisation of the input layer. Training batches are
// normalised with their own (biased) statistics; evaluation uses running
// averages, updated as running = momentum * running + (1 - momentum) * batch
// with the unbiased batch variance.
struct InputNorm {
  static constexpr double kMomentum = 0.9;
  static constexpr double kEpsilon = 1e-5;

  Eigen::VectorXd running_mean;
  Eigen::VectorXd running_var;

  static InputNorm Identity(int features);
  Eigen::MatrixXd Apply(const Eigen::MatrixXd& inputs, Mode mode) const;
  void Update(const Eigen::MatrixXd& inputs);

  friend bool operator==(const InputNorm& a, const InputNorm& b);
};

// Forward pass from already-normalised inputs.
Eigen::MatrixXd MlpForward(const MlpParams& params, const Eigen::MatrixXd& x);

// Loss = mean_i (Q(x_i)[a_i] - y_i)^2. Only the chosen action's output
// receives gradient. `grad` is resized to match `params`.
double TdLossAndGradient(const MlpParams& params, const Eigen::MatrixXd& x,
                         std::span<const int> actions, const Eigen::VectorXd& targets,
                         MlpParams* grad);

struct QNetwork {
  MlpParams params;
  InputNorm norm;

  static QNetwork Create(std::span<const int> sizes, Rng& rng);

  int input_size() const { return static_cast<int>(params.weights.front().cols()); }
  int output_size() const { return static_cast<int>(params.weights.back().rows()); }

  // Throws std::invalid_argument on an input dimension mismatch. Does not
  // touch the running statistics.
  Eigen::MatrixXd Forward(const Eigen::MatrixXd& inputs, Mode mode) const;
  Eigen::VectorXd Forward(std::span<const double> input) const;  // eval mode

  friend bool operator==(const QNetwork& a, const QNetwork& b) {
    return a.params == b.params && a.norm == b.norm;
  }
};

struct AdamConfig {
  double learning_rate = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias-corrected moments:
//   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
//   p <- p - lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
class Adam {
 public:
  Adam() = default;
  Adam(const MlpParams& shape, AdamConfig config);

  void Step(MlpParams& params, const MlpParams& grad);

  int64_t step() const { return step_; }
  const AdamConfig& config() const { return config_; }
  const MlpParams& first_moment() const { return m_; }
  const MlpParams& second_moment() const { return v_; }
  void Restore(int64_t step, MlpParams m, MlpParams v);

 private:
  AdamConfig config_;
  int64_t step_ = 0;
  MlpParams m_;
  MlpParams v_;
};

}  // namespace bluff

#endif  // BLUFF_NETWORK_H_
