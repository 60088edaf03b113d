#ifndef BLUFF_REPORT_H_
#define BLUFF_REPORT_H_

// Aggregation of logs and bluff events into tables and plot series.
//
// Output files (CSV headers are stable; JSON files hold the same rows as
// arrays of objects keyed by the CSV column names):
//   winrate.csv        first_game,games,dqn_win_rate,cfr_win_rate
//   bluff_summary.csv  agent,detector,attempts,successes,success_rate
//   rank_breakdown.csv agent,detector,rank,attempts,successes
//   reactions.csv      agent,detector,scope,fold,call,raise
// success_rate is empty when there were no attempts. In reactions.csv `agent`
// is the reacting agent, i.e. the opponent of the bluffer.
//
// With plot data enabled, plot/ additionally receives x,y,series files:
//   winrate.csv, bluff_counts.csv, rank_threshold.csv, rank_statistical.csv,
//   reactions_threshold.csv, reactions_statistical.csv

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bluff/detect.h"
#include "bluff/harness.h"
#include "bluff/step_record.h"

namespace bluff {

struct SummaryRow {
  int seat = 0;
  Detector detector = Detector::kThreshold;
  int64_t attempts = 0;
  int64_t successes = 0;

  std::optional<double> rate() const;  // nullopt without attempts
};

struct BluffSummary {
  std::vector<SummaryRow> rows;  // ordered by (detector, seat)

  const SummaryRow* Find(int seat, Detector d) const;
};

// Rows for both agents under every detector that appears in `events`.
BluffSummary SummarizeBluffs(std::span<const BluffEvent> events);

struct RankRow {
  int seat = 0;
  Detector detector = Detector::kThreshold;
  int rank = 2;
  int64_t attempts = 0;
  int64_t successes = 0;
};

struct RankBreakdown {
  std::vector<RankRow> rows;  // ordered by (detector, seat, rank)
};

// Threshold rows cover ranks 2-9 (zero-filled); statistical rows cover the
// observed ranks only.
RankBreakdown ComputeRankBreakdown(std::span<const BluffEvent> events);

enum class Scope : uint8_t { kOverall, kPreFlop, kPostFlop };
std::string_view ScopeName(Scope s);  // "overall", "preflop", "postflop"

struct ReactionRow {
  int seat = 0;  // reacting agent
  Detector detector = Detector::kThreshold;
  Scope scope = Scope::kOverall;
  std::array<int64_t, kNumActions> counts{};  // indexed by Action
};

struct ReactionProfile {
  std::vector<ReactionRow> rows;  // ordered by (detector, seat, scope)

  const ReactionRow* Find(int seat, Detector d, Scope s) const;
};

// Joins every event with the opponent's next logged action. Throws
// std::runtime_error when an event has no such action in `log` or when the
// logged action disagrees with the event.
ReactionProfile ComputeReactionProfile(std::span<const BluffEvent> events,
                                       std::span<const StepRecord> log);

struct Report {
  WinRateSeries winrate;
  BluffSummary summary;
  RankBreakdown ranks;
  ReactionProfile reactions;
};

Report BuildReport(std::span<const StepRecord> log, std::span<const BluffEvent> events,
                   int winrate_window);

enum class ReportFormat : uint8_t { kCsv, kJson };
ReportFormat ParseReportFormat(std::string_view name);

// Writes the report into `dir` (created if needed). Returns the written paths.
std::vector<std::string> EmitReport(const Report& report, const std::string& dir,
                                    ReportFormat format, bool plotdata);

}  // namespace bluff

#endif  // BLUFF_REPORT_H_
