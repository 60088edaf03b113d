#ifndef BLUFF_STEP_RECORD_H_
#define BLUFF_STEP_RECORD_H_

// Decision logs. One JSON object per line, one line per decision:
//
//   {"episode":12,"step":0,"phase":"preflop","actor":0,"action":"raise",
//    "legal":["fold","call","raise"],"actor_card":"9s","opponent_card":"Kd",
//    "public_card":null,"contrib":[1,2],"raises":[0,0],"epsilon":0.95,
//    "payoffs":[-4,4]}
//
// contrib / raises are indexed by seat and describe the state before the
// action; raises count the current round only. epsilon is null for the CFR
// seat. payoffs are the final chip results of the episode, identical on every
// line of that episode. Files ending in ".gz" are gzip-compressed; readers
// accept either form regardless of name.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bluff/game.h"

namespace bluff {

inline constexpr int kDqnSeat = 0;
inline constexpr int kCfrSeat = 1;
std::string_view AgentName(int seat);  // "dqn" / "cfr"

struct StepRecord {
  int64_t episode = 0;
  int step = 0;
  Phase phase = Phase::kPreFlop;
  int actor = 0;
  Action action = Action::kCallCheck;
  ActionSet legal;
  Card actor_card;
  Card opponent_card;
  std::optional<Card> public_card;
  std::array<int, kNumPlayers> contributions{};
  std::array<int, kNumPlayers> raises{};
  std::optional<double> epsilon;
  std::array<int, kNumPlayers> payoffs{};

  HandScore actor_score() const { return ComputeHandScore(actor_card, public_card); }

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

// Builds the record for the decision `a` about to be taken in `state`.
StepRecord MakeStepRecord(const GameState& state, Action a, int64_t episode, int step,
                          std::optional<double> epsilon);

std::string ToJsonLine(const StepRecord& r);

class LogParseError : public std::runtime_error {
 public:
  LogParseError(const std::string& source, size_t line, const std::string& what);
  size_t line() const { return line_; }

 private:
  size_t line_;
};

StepRecord ParseStepRecord(std::string_view line);

// Line-oriented writer; gzip when the path ends in ".gz".
class LineWriter {
 public:
  explicit LineWriter(const std::string& path);
  ~LineWriter();
  LineWriter(const LineWriter&) = delete;
  LineWriter& operator=(const LineWriter&) = delete;

  void Write(std::string_view line);  // appends '\n'
  void Close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Reads every line of a plain or gzip file.
std::vector<std::string> ReadLines(const std::string& path);

// Throws LogParseError (with the 1-based line number) on malformed input,
// including records that break episode contiguity or step order.
std::vector<StepRecord> ReadLog(const std::string& path);

// Records of one episode, in step order.
using EpisodeView = std::span<const StepRecord>;

// Splits a contiguous log into episodes.
std::vector<EpisodeView> SplitEpisodes(std::span<const StepRecord> log);

// Formats doubles with the shortest representation that round-trips.
std::string FormatDouble(double v);

}  // namespace bluff

#endif  // BLUFF_STEP_RECORD_H_
