#ifndef BLUFF_DETECT_H_
#define BLUFF_DETECT_H_

// Bluff detection over decision logs.
//
// Both detectors inspect Raise records only. A detected raise is an attempt;
// it succeeds when the opponent's very next action is Fold.
//
//  * Threshold: the raiser's hand score is at most DetectorConfig::score_threshold
//    (with the default 32 this is exactly a non-pair rank 2-9).
//  * Statistical: the raise misrepresents strength relative to the hands that
//    usually raise in the same context, and raising has the higher empirical
//    payoff than checking/calling for that context and pair flag.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "bluff/game.h"
#include "bluff/step_record.h"

namespace bluff {

enum class Detector : uint8_t { kThreshold, kStatistical };

std::string_view DetectorName(Detector d);  // "threshold" / "statistical"
Detector ParseDetector(std::string_view name);

struct BluffEvent {
  int64_t episode = 0;
  int step = 0;  // step of the raise within its episode
  int seat = 0;  // bluffer
  Detector detector = Detector::kThreshold;
  Phase phase = Phase::kPreFlop;
  Card private_card;
  std::optional<Card> public_card;
  HandScore score;
  bool attempt = true;
  bool success = false;
  Action reaction = Action::kCallCheck;  // opponent's next action

  friend bool operator==(const BluffEvent&, const BluffEvent&) = default;
};

std::string ToJsonLine(const BluffEvent& e);
BluffEvent ParseBluffEvent(std::string_view line);
std::vector<BluffEvent> ReadEvents(const std::string& path);
void WriteEvents(const std::string& path, std::span<const BluffEvent> events);

struct ContextKey {
  Phase phase = Phase::kPreFlop;
  int seat = 0;
  int raises = 0;       // both players' raises so far in the current round
  int public_rank = 0;  // 0 when no public card is showing

  static ContextKey Of(const StepRecord& r);
  std::string ToString() const;

  friend auto operator<=>(const ContextKey&, const ContextKey&) = default;
};

// Count / sum / sum-of-squares accumulator; mergeable across shards.
struct ScoreMoments {
  int64_t count = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void Add(double x);
  void Merge(const ScoreMoments& other);
  double mean() const;
  double stddev() const;  // population
};

struct ScoreSplit {
  ScoreMoments pair;
  ScoreMoments non_pair;
};

class ContextStats {
 public:
  void Add(const StepRecord& r);
  void Set(const ContextKey& key, Action a, const ScoreSplit& split);  // fixtures

  const ScoreSplit* Find(const ContextKey& key, Action a) const;
  // Fraction of the context's raises made with a pair; nullopt without raises.
  std::optional<double> PairShare(const ContextKey& key) const;

  const std::map<std::pair<ContextKey, Action>, ScoreSplit>& cells() const { return cells_; }

 private:
  std::map<std::pair<ContextKey, Action>, ScoreSplit> cells_;
};

ContextStats BuildContextStats(std::span<const StepRecord> log);

class EvTable {
 public:
  using Cell = std::tuple<ContextKey, Action, bool>;  // bool: actor holds a pair

  void Add(const StepRecord& r);
  void Set(const ContextKey& key, Action a, bool pair, double mean);  // fixtures

  std::optional<double> Mean(const ContextKey& key, Action a, bool pair) const;
  const std::map<Cell, ScoreMoments>& cells() const { return cells_; }

 private:
  std::map<Cell, ScoreMoments> cells_;
};

EvTable BuildEvTable(std::span<const StepRecord> log);

struct DetectorConfig {
  int score_threshold = 32;
  double sigma_multiplier = 0.5;
  double pair_share_cutoff = 0.70;
  int64_t min_sigma_count = 30;

  // JSON object or `key = value` lines with the field names above.
  static DetectorConfig FromFile(const std::string& path);
  static DetectorConfig FromText(const std::string& text);
  void Validate() const;
  nlohmann::json ToJson() const;
};

struct DetectDiagnostics {
  int64_t raises_inspected = 0;
  int64_t truncated = 0;        // raise without a following opponent action
  int64_t sparse_skipped = 0;   // sigma rule needed but sub-population too small
  int64_t ev_fail_closed = 0;   // misrepresentation held but an EV cell was missing
  int64_t ev_rejected = 0;      // misrepresentation held, raise not EV-preferred
  std::map<std::string, int64_t> sparse_cells;  // context/pair-flag -> skips

  nlohmann::json ToJson() const;
};

std::vector<BluffEvent> ThresholdDetect(std::span<const StepRecord> log,
                                        const DetectorConfig& config = {},
                                        DetectDiagnostics* diagnostics = nullptr);

// Clause A of the statistical rule for a single raise. `sparse` is set when
// the sigma rule applied but the sub-population was below min_sigma_count.
bool Misrepresents(const StepRecord& raise, const ContextStats& stats,
                   const DetectorConfig& config, bool* sparse = nullptr);

std::vector<BluffEvent> StatisticalDetect(std::span<const StepRecord> log,
                                          const ContextStats& stats, const EvTable& ev,
                                          const DetectorConfig& config = {},
                                          DetectDiagnostics* diagnostics = nullptr);

}  // namespace bluff

#endif  // BLUFF_DETECT_H_
