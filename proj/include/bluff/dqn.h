#ifndef BLUFF_DQN_H_
#define BLUFF_DQN_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bluff/cfr.h"
#include "bluff/game.h"
#include "bluff/network.h"
#include "bluff/rng.h"

namespace bluff {

struct DqnConfig {
  std::vector<int> hidden_layers = {256, 256};
  double learning_rate = 5e-5;
  int batch_size = 64;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  int64_t epsilon_decay_steps = 10000;
  size_t replay_capacity = 20000;
  size_t replay_min_size = 500;
  int64_t target_update_every = 1000;
  double discount = 0.99;
  int64_t train_every = 1;

  std::vector<int> LayerSizes() const;  // {107, hidden..., 3}
};

// Linear decay from `start` to `end` over `decay_steps`, then flat.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  int64_t decay_steps = 10000;

  double At(int64_t step) const;
};

struct Transition {
  Observation obs{};
  int action = 0;
  double reward = 0.0;
  bool terminal = true;
  Observation next_obs{};  // unused when terminal
  ActionSet next_legal;    // empty when terminal
};

// Fixed-capacity ring buffer; the oldest transition is overwritten first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity);

  void Add(Transition t);
  size_t size() const { return items_.size(); }
  size_t capacity() const { return capacity_; }
  const Transition& at(size_t i) const { return items_[i]; }

  // `n` distinct transitions drawn uniformly (Floyd's algorithm).
  std::vector<const Transition*> Sample(size_t n, Rng& rng) const;

 private:
  size_t capacity_;
  size_t next_ = 0;
  std::vector<Transition> items_;
};

// Epsilon-greedy over legal actions: with probability epsilon uniform over
// `legal`, otherwise the highest Q among legal actions (illegal entries are
// treated as -infinity; ties go to the lowest index).
Action MaskedSelect(std::span<const double> q, ActionSet legal, double epsilon, Rng& rng);
Action MaskedArgmax(std::span<const double> q, ActionSet legal);
// The distribution MaskedSelect samples from.
ActionProbs EpsilonGreedyProbs(std::span<const double> q, ActionSet legal, double epsilon);

class DqnAgent {
 public:
  DqnAgent(DqnConfig config, uint64_t seed);

  const DqnConfig& config() const { return config_; }
  const QNetwork& online() const { return online_; }
  const QNetwork& target() const { return target_; }
  const ReplayBuffer& replay() const { return replay_; }
  int64_t env_steps() const { return env_steps_; }
  int64_t train_steps() const { return train_steps_; }
  // Increments whenever the online parameters or statistics change.
  uint64_t version() const { return version_; }

  double epsilon() const { return schedule_.At(env_steps_); }

  // Eval-mode Q-values of the online network for `player`'s view of `state`.
  std::array<double, kNumActions> QValues(const GameState& state, int player) const;
  Action Act(const GameState& state, int player, double epsilon, Rng& rng) const;

  // Stores a transition and advances the step counter; trains on a sampled
  // batch once the buffer holds replay_min_size transitions, and copies the
  // online network into the target every target_update_every steps.
  // Returns the training loss when a train step ran.
  std::optional<double> Feed(Transition t);

  // One gradient step on `batch`. y = r for terminal transitions, otherwise
  // r + discount * max over next_legal of Q_target(next_obs).
  // Throws std::runtime_error if the loss is not finite.
  double TrainStep(std::span<const Transition* const> batch);

  // Bootstrap targets for `batch` (exposed for tests).
  Eigen::VectorXd Targets(std::span<const Transition* const> batch) const;

  void SyncTarget();

  // Replaces the online network (shapes must match). Target is left alone.
  void SetOnline(QNetwork net);

  // Binary checkpoint, little-endian:
  //   "BLUFFDQN" | u32 version (1) | u32 layer count L | L x (u32 rows, u32 cols)
  //   | online net | target net | u64 adam step | adam m | adam v
  //   | i64 env_steps | i64 train_steps
  // where a net is, per layer, the weights (row-major) then biases, followed
  // by running mean and running variance; adam m / v use the per-layer
  // weights-then-biases layout. All values are IEEE-754 doubles.
  void Save(std::ostream& out) const;
  void Load(std::istream& in);
  void SaveFile(const std::string& path) const;
  void LoadFile(const std::string& path);

 private:
  DqnConfig config_;
  EpsilonSchedule schedule_;
  QNetwork online_;
  QNetwork target_;
  Adam adam_;
  ReplayBuffer replay_;
  Rng replay_rng_;
  int64_t env_steps_ = 0;
  int64_t train_steps_ = 0;
  uint64_t version_ = 0;
};

}  // namespace bluff

#endif  // BLUFF_DQN_H_
