#include "bluff/dqn.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace bluff {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint layout assumes a little-endian host");

constexpr char kMagic[8] = {'B', 'L', 'U', 'F', 'F', 'D', 'Q', 'N'};
constexpr uint32_t kVersion = 1;

template <typename T>
void WritePod(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T ReadPod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("truncated DQN checkpoint");
  return value;
}

void WriteDoubles(std::ostream& out, const double* data, size_t n) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

void ReadDoubles(std::istream& in, double* data, size_t n) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw std::runtime_error("truncated DQN checkpoint");
}

void WriteParams(std::ostream& out, const MlpParams& p) {
  for (size_t l = 0; l < p.weights.size(); ++l) {
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w = p.weights[l];
    WriteDoubles(out, w.data(), static_cast<size_t>(w.size()));
    WriteDoubles(out, p.biases[l].data(), static_cast<size_t>(p.biases[l].size()));
  }
}

void ReadParams(std::istream& in, MlpParams& p) {
  for (size_t l = 0; l < p.weights.size(); ++l) {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w(
        p.weights[l].rows(), p.weights[l].cols());
    ReadDoubles(in, w.data(), static_cast<size_t>(w.size()));
    p.weights[l] = w;
    ReadDoubles(in, p.biases[l].data(), static_cast<size_t>(p.biases[l].size()));
  }
}

void WriteNet(std::ostream& out, const QNetwork& net) {
  WriteParams(out, net.params);
  WriteDoubles(out, net.norm.running_mean.data(), static_cast<size_t>(net.norm.running_mean.size()));
  WriteDoubles(out, net.norm.running_var.data(), static_cast<size_t>(net.norm.running_var.size()));
}

void ReadNet(std::istream& in, QNetwork& net) {
  ReadParams(in, net.params);
  ReadDoubles(in, net.norm.running_mean.data(), static_cast<size_t>(net.norm.running_mean.size()));
  ReadDoubles(in, net.norm.running_var.data(), static_cast<size_t>(net.norm.running_var.size()));
}

Eigen::MatrixXd StackObservations(std::span<const Transition* const> batch, bool next) {
  Eigen::MatrixXd x(kObservationSize, static_cast<Eigen::Index>(batch.size()));
  for (size_t i = 0; i < batch.size(); ++i) {
    const Observation& o = next ? batch[i]->next_obs : batch[i]->obs;
    x.col(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::VectorXd>(o.data(), kObservationSize);
  }
  return x;
}

}  // namespace

std::vector<int> DqnConfig::LayerSizes() const {
  std::vector<int> sizes = {kObservationSize};
  sizes.insert(sizes.end(), hidden_layers.begin(), hidden_layers.end());
  sizes.push_back(kNumActions);
  return sizes;
}

double EpsilonSchedule::At(int64_t step) const {
  if (step <= 0) return start;
  if (step >= decay_steps) return end;
  return start + (end - start) * static_cast<double>(step) / static_cast<double>(decay_steps);
}

ReplayBuffer::ReplayBuffer(size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
  items_.reserve(capacity);
}

void ReplayBuffer::Add(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<const Transition*> ReplayBuffer::Sample(size_t n, Rng& rng) const {
  if (n > items_.size()) throw std::invalid_argument("not enough transitions to sample");
  std::vector<size_t> chosen;
  chosen.reserve(n);
  for (size_t j = items_.size() - n; j < items_.size(); ++j) {
    const size_t t = UniformInt(rng, j + 1);
    if (std::find(chosen.begin(), chosen.end(), t) == chosen.end()) {
      chosen.push_back(t);
    } else {
      chosen.push_back(j);
    }
  }
  std::vector<const Transition*> out;
  out.reserve(n);
  for (size_t i : chosen) out.push_back(&items_[i]);
  return out;
}

Action MaskedArgmax(std::span<const double> q, ActionSet legal) {
  int best = -1;
  for (int a = 0; a < kNumActions; ++a) {
    if (!legal.Contains(static_cast<Action>(a))) continue;
    if (best < 0 || q[a] > q[best]) best = a;
  }
  if (best < 0) throw std::invalid_argument("empty legal action set");
  return static_cast<Action>(best);
}

Action MaskedSelect(std::span<const double> q, ActionSet legal, double epsilon, Rng& rng) {
  if (legal.Empty()) throw std::invalid_argument("empty legal action set");
  if (Uniform01(rng) < epsilon) {
    int pick = static_cast<int>(UniformInt(rng, static_cast<uint64_t>(legal.Size())));
    for (int a = 0; a < kNumActions; ++a) {
      if (legal.Contains(static_cast<Action>(a)) && pick-- == 0) return static_cast<Action>(a);
    }
  }
  return MaskedArgmax(q, legal);
}

ActionProbs EpsilonGreedyProbs(std::span<const double> q, ActionSet legal, double epsilon) {
  ActionProbs probs{};
  const double explore = epsilon / legal.Size();
  for (int a = 0; a < kNumActions; ++a) {
    if (legal.Contains(static_cast<Action>(a))) probs[a] = explore;
  }
  probs[Index(MaskedArgmax(q, legal))] += 1.0 - epsilon;
  return probs;
}

DqnAgent::DqnAgent(DqnConfig config, uint64_t seed)
    : config_(std::move(config)),
      schedule_{config_.epsilon_start, config_.epsilon_end, config_.epsilon_decay_steps},
      replay_(config_.replay_capacity),
      replay_rng_(MixSeed(seed, 1)) {
  if (config_.batch_size <= 0 || static_cast<size_t>(config_.batch_size) > config_.replay_min_size) {
    throw std::invalid_argument("batch size must be in [1, replay_min_size]");
  }
  Rng init_rng(MixSeed(seed, 0));
  const auto sizes = config_.LayerSizes();
  online_ = QNetwork::Create(sizes, init_rng);
  target_ = online_;
  adam_ = Adam(online_.params, AdamConfig{.learning_rate = config_.learning_rate});
}

std::array<double, kNumActions> DqnAgent::QValues(const GameState& state, int player) const {
  const Observation obs = EncodeObservation(state, player);
  const Eigen::VectorXd q = online_.Forward(obs);
  return {q[0], q[1], q[2]};
}

Action DqnAgent::Act(const GameState& state, int player, double epsilon, Rng& rng) const {
  const auto q = QValues(state, player);
  return MaskedSelect(q, LegalActions(state), epsilon, rng);
}

std::optional<double> DqnAgent::Feed(Transition t) {
  replay_.Add(std::move(t));
  ++env_steps_;
  std::optional<double> loss;
  if (replay_.size() >= config_.replay_min_size && env_steps_ % config_.train_every == 0) {
    const auto batch = replay_.Sample(static_cast<size_t>(config_.batch_size), replay_rng_);
    loss = TrainStep(batch);
  }
  if (env_steps_ % config_.target_update_every == 0) SyncTarget();
  return loss;
}

Eigen::VectorXd DqnAgent::Targets(std::span<const Transition* const> batch) const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(batch.size()));
  const Eigen::MatrixXd next_q = target_.Forward(StackObservations(batch, true), Mode::kEval);
  for (size_t i = 0; i < batch.size(); ++i) {
    const Transition& t = *batch[i];
    y[static_cast<Eigen::Index>(i)] = t.reward;
    if (t.terminal) continue;
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < kNumActions; ++a) {
      if (t.next_legal.Contains(static_cast<Action>(a))) {
        best = std::max(best, next_q(a, static_cast<Eigen::Index>(i)));
      }
    }
    y[static_cast<Eigen::Index>(i)] += config_.discount * best;
  }
  return y;
}

double DqnAgent::TrainStep(std::span<const Transition* const> batch) {
  const Eigen::VectorXd targets = Targets(batch);
  const Eigen::MatrixXd x = StackObservations(batch, false);
  const Eigen::MatrixXd normalized = online_.norm.Apply(x, Mode::kTrain);
  online_.norm.Update(x);

  std::vector<int> actions(batch.size());
  for (size_t i = 0; i < batch.size(); ++i) actions[i] = batch[i]->action;

  MlpParams grad;
  const double loss = TdLossAndGradient(online_.params, normalized, actions, targets, &grad);
  if (!std::isfinite(loss)) {
    throw std::runtime_error("DQN loss is not finite at train step " +
                             std::to_string(train_steps_ + 1));
  }
  adam_.Step(online_.params, grad);
  if (!online_.params.AllFinite()) {
    throw std::runtime_error("DQN parameters diverged at train step " +
                             std::to_string(train_steps_ + 1));
  }
  ++train_steps_;
  ++version_;
  return loss;
}

void DqnAgent::SyncTarget() { target_ = online_; }

void DqnAgent::SetOnline(QNetwork net) {
  if (net.params.LayerSizes() != online_.params.LayerSizes()) {
    throw std::invalid_argument("network layout does not match the agent");
  }
  online_ = std::move(net);
  ++version_;
}

void DqnAgent::Save(std::ostream& out) const {
  out.write(kMagic, sizeof(kMagic));
  WritePod<uint32_t>(out, kVersion);
  const auto& weights = online_.params.weights;
  WritePod<uint32_t>(out, static_cast<uint32_t>(weights.size()));
  for (const auto& w : weights) {
    WritePod<uint32_t>(out, static_cast<uint32_t>(w.rows()));
    WritePod<uint32_t>(out, static_cast<uint32_t>(w.cols()));
  }
  WriteNet(out, online_);
  WriteNet(out, target_);
  WritePod<uint64_t>(out, static_cast<uint64_t>(adam_.step()));
  WriteParams(out, adam_.first_moment());
  WriteParams(out, adam_.second_moment());
  WritePod<int64_t>(out, env_steps_);
  WritePod<int64_t>(out, train_steps_);
}

void DqnAgent::Load(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a DQN checkpoint");
  }
  const auto version = ReadPod<uint32_t>(in);
  if (version != kVersion) {
    throw std::runtime_error("unsupported DQN checkpoint version " + std::to_string(version));
  }
  const auto layers = ReadPod<uint32_t>(in);
  const auto& expected = online_.params.weights;
  if (layers != expected.size()) {
    throw std::runtime_error("DQN checkpoint has " + std::to_string(layers) +
                             " layers, configuration expects " + std::to_string(expected.size()));
  }
  for (uint32_t l = 0; l < layers; ++l) {
    const auto rows = ReadPod<uint32_t>(in);
    const auto cols = ReadPod<uint32_t>(in);
    if (rows != expected[l].rows() || cols != expected[l].cols()) {
      throw std::runtime_error("DQN checkpoint layer " + std::to_string(l) + " is " +
                               std::to_string(rows) + "x" + std::to_string(cols) +
                               ", configuration expects " + std::to_string(expected[l].rows()) +
                               "x" + std::to_string(expected[l].cols()));
    }
  }
  ReadNet(in, online_);
  ReadNet(in, target_);
  const auto step = static_cast<int64_t>(ReadPod<uint64_t>(in));
  MlpParams m = online_.params.ZerosLike();
  MlpParams v = online_.params.ZerosLike();
  ReadParams(in, m);
  ReadParams(in, v);
  adam_.Restore(step, std::move(m), std::move(v));
  env_steps_ = ReadPod<int64_t>(in);
  train_steps_ = ReadPod<int64_t>(in);
  ++version_;
}

void DqnAgent::SaveFile(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  Save(out);
  if (!out.flush()) throw std::runtime_error("write failed: " + path);
}

void DqnAgent::LoadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  Load(in);
}

}  // namespace bluff
