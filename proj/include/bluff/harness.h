#ifndef BLUFF_HARNESS_H_
#define BLUFF_HARNESS_H_

// Simultaneous CFR-vs-DQN training, frozen-policy evaluation and the
// checkpoint directory that connects them.
//
// Checkpoint directory layout:
//   cfr.ckpt        CfrSolver::Save text format
//   dqn.ckpt        DqnAgent::Save binary format
//   run-meta.json   {"config": {...}, "seed": N, "logs": {"<name>": "<sha1>"}}
// where the hash is the git blob id of the log file.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bluff/cfr.h"
#include "bluff/dqn.h"
#include "bluff/step_record.h"

namespace bluff {

struct RunConfig {
  int64_t train_episodes = 100000;
  int64_t eval_games = 100000;
  int cfr_iters_per_episode = 10;
  uint64_t seed = 0;
  int64_t checkpoint_every = 0;  // 0: only at the end of training
  int winrate_window = 1000;
  bool gzip_logs = false;
  std::string out_dir = "run";
  DqnConfig dqn;

  static RunConfig Full();  // 100,000 / 100,000
  static RunConfig Desk();   // 20,000 / 20,000

  // JSON object or flat `key = value` lines ('#' starts a comment). Keys:
  // preset (full|desk, applied first), train_episodes, eval_games,
  // cfr_iters_per_episode, seed, checkpoint_every, winrate_window, gzip_logs,
  // out_dir.
  static RunConfig FromFile(const std::string& path);
  static RunConfig FromText(const std::string& text);

  void Validate() const;  // throws std::invalid_argument
  nlohmann::json ToJson() const;

  std::string train_log_name() const { return gzip_logs ? "train.jsonl.gz" : "train.jsonl"; }
  std::string eval_log_name() const { return gzip_logs ? "eval.jsonl.gz" : "eval.jsonl"; }
};

// CFR's view of the DQN: the epsilon-greedy mixture over the online network's
// masked argmax. Q-values are cached per observation and invalidated when the
// agent's parameters change, so the agent must outlive the policy.
OpponentPolicy DqnAsOpponentPolicy(const DqnAgent& agent, double epsilon);

struct RunResult {
  std::string log_path;
  int64_t games = 0;
  std::array<int64_t, kNumPlayers> wins{};
};

// Writes <out_dir>/train.jsonl, cfr.ckpt, dqn.ckpt and run-meta.json.
// `progress`, when set, is called after every episode.
RunResult RunTraining(const RunConfig& config,
                      const std::function<void(int64_t)>& progress = nullptr);

// Loads the checkpoints in `checkpoint_dir`, plays config.eval_games games
// with both policies frozen (CFR average strategy, greedy DQN) and writes
// <out_dir>/eval.jsonl plus eval-meta.json.
RunResult RunEvaluation(const RunConfig& config, const std::string& checkpoint_dir,
                        const std::function<void(int64_t)>& progress = nullptr);

// Win fractions per non-overlapping window of games; the final window may be
// shorter. A game is won by the seat with a positive payoff.
struct WinRateWindow {
  int64_t first_game = 0;  // 0-based index into the log's games
  int64_t games = 0;
  std::array<double, kNumPlayers> win_rate{};
};

struct WinRateSeries {
  int window = 0;
  std::vector<WinRateWindow> windows;
};

WinRateSeries ComputeWinRates(std::span<const StepRecord> log, int window);

// Win fractions over the last `games` games (all games if fewer).
std::array<double, kNumPlayers> TrailingWinRates(std::span<const StepRecord> log, int64_t games);

// git blob id (SHA-1 of "blob <size>\0" + contents).
std::string GitBlobHash(const std::string& path);

}  // namespace bluff

#endif  // BLUFF_HARNESS_H_
