#include "bluff/report.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace bluff {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::array<Detector, 2> kDetectors = {Detector::kThreshold, Detector::kStatistical};
constexpr std::array<Scope, 3> kScopes = {Scope::kOverall, Scope::kPreFlop, Scope::kPostFlop};
constexpr int kThresholdMaxRank = 9;

std::set<Detector> DetectorsIn(std::span<const BluffEvent> events) {
  std::set<Detector> out;
  for (const BluffEvent& e : events) out.insert(e.detector);
  return out;
}

// A table cell is a string, integer, double or null (empty in CSV).
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
};

std::string CsvCell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return FormatDouble(v.get<double>());
  return v.dump();
}

void WriteFile(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << body;
  if (!out.flush()) throw std::runtime_error("write failed: " + path.string());
}

std::string RenderCsv(const Table& t) {
  std::string out;
  for (size_t c = 0; c < t.columns.size(); ++c) out += (c ? "," : "") + t.columns[c];
  out += '\n';
  for (const auto& row : t.rows) {
    for (size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + CsvCell(row[c]);
    out += '\n';
  }
  return out;
}

std::string RenderJson(const Table& t) {
  json arr = json::array();
  for (const auto& row : t.rows) {
    json obj = json::object();
    for (size_t c = 0; c < row.size(); ++c) obj[t.columns[c]] = row[c];
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

json Name(std::string_view s) { return json(std::string(s)); }

Table WinRateTable(const WinRateSeries& s) {
  Table t{{"first_game", "games", "dqn_win_rate", "cfr_win_rate"}, {}};
  for (const WinRateWindow& w : s.windows) {
    t.rows.push_back({w.first_game, w.games, w.win_rate[kDqnSeat], w.win_rate[kCfrSeat]});
  }
  return t;
}

Table SummaryTable(const BluffSummary& s) {
  Table t{{"agent", "detector", "attempts", "successes", "success_rate"}, {}};
  for (const SummaryRow& r : s.rows) {
    const auto rate = r.rate();
    t.rows.push_back({Name(AgentName(r.seat)), Name(DetectorName(r.detector)), r.attempts,
                      r.successes, rate ? json(*rate) : json(nullptr)});
  }
  return t;
}

Table RankTable(const RankBreakdown& b) {
  Table t{{"agent", "detector", "rank", "attempts", "successes"}, {}};
  for (const RankRow& r : b.rows) {
    t.rows.push_back({Name(AgentName(r.seat)), Name(DetectorName(r.detector)), r.rank,
                      r.attempts, r.successes});
  }
  return t;
}

Table ReactionTable(const ReactionProfile& p) {
  Table t{{"agent", "detector", "scope", "fold", "call", "raise"}, {}};
  for (const ReactionRow& r : p.rows) {
    t.rows.push_back({Name(AgentName(r.seat)), Name(DetectorName(r.detector)),
                      Name(ScopeName(r.scope)), r.counts[Index(Action::kFold)],
                      r.counts[Index(Action::kCallCheck)], r.counts[Index(Action::kRaise)]});
  }
  return t;
}

Table PlotTable() { return Table{{"x", "y", "series"}, {}}; }

Table WinRatePlot(const WinRateSeries& s) {
  Table t = PlotTable();
  for (int seat : {kDqnSeat, kCfrSeat}) {
    for (const WinRateWindow& w : s.windows) {
      t.rows.push_back({w.first_game + w.games, w.win_rate[seat], Name(AgentName(seat))});
    }
  }
  return t;
}

Table BluffCountPlot(const BluffSummary& s) {
  Table t = PlotTable();
  for (const SummaryRow& r : s.rows) {
    const std::string x = std::string(AgentName(r.seat)) + "/" + std::string(DetectorName(r.detector));
    t.rows.push_back({x, r.attempts, "attempts"});
    t.rows.push_back({x, r.successes, "successes"});
  }
  return t;
}

Table RankPlot(const RankBreakdown& b, Detector d) {
  Table t = PlotTable();
  for (const RankRow& r : b.rows) {
    if (r.detector != d) continue;
    const std::string agent(AgentName(r.seat));
    t.rows.push_back({r.rank, r.attempts, agent + "/attempts"});
    t.rows.push_back({r.rank, r.successes, agent + "/successes"});
  }
  return t;
}

Table ReactionPlot(const ReactionProfile& p, Detector d) {
  Table t = PlotTable();
  for (const ReactionRow& r : p.rows) {
    if (r.detector != d) continue;
    const std::string series = std::string(AgentName(r.seat)) + "/" + std::string(ScopeName(r.scope));
    for (int a = 0; a < kNumActions; ++a) {
      t.rows.push_back({Name(ActionName(static_cast<Action>(a))), r.counts[a], series});
    }
  }
  return t;
}

}  // namespace

std::optional<double> SummaryRow::rate() const {
  if (attempts == 0) return std::nullopt;
  return static_cast<double>(successes) / static_cast<double>(attempts);
}

const SummaryRow* BluffSummary::Find(int seat, Detector d) const {
  for (const SummaryRow& r : rows) {
    if (r.seat == seat && r.detector == d) return &r;
  }
  return nullptr;
}

BluffSummary SummarizeBluffs(std::span<const BluffEvent> events) {
  BluffSummary s;
  const auto detectors = DetectorsIn(events);
  for (Detector d : kDetectors) {
    if (!detectors.contains(d)) continue;
    for (int seat = 0; seat < kNumPlayers; ++seat) s.rows.push_back({seat, d, 0, 0});
  }
  for (const BluffEvent& e : events) {
    auto it = std::find_if(s.rows.begin(), s.rows.end(), [&](const SummaryRow& r) {
      return r.seat == e.seat && r.detector == e.detector;
    });
    ++it->attempts;
    it->successes += e.success ? 1 : 0;
  }
  return s;
}

RankBreakdown ComputeRankBreakdown(std::span<const BluffEvent> events) {
  std::map<std::tuple<Detector, int, int>, std::pair<int64_t, int64_t>> cells;
  const auto detectors = DetectorsIn(events);
  if (detectors.contains(Detector::kThreshold)) {
    for (int seat = 0; seat < kNumPlayers; ++seat) {
      for (int rank = kMinRank; rank <= kThresholdMaxRank; ++rank) {
        cells[{Detector::kThreshold, seat, rank}];
      }
    }
  }
  for (const BluffEvent& e : events) {
    auto& cell = cells[{e.detector, e.seat, e.private_card.rank}];
    ++cell.first;
    cell.second += e.success ? 1 : 0;
  }
  RankBreakdown b;
  for (const auto& [key, counts] : cells) {
    const auto& [d, seat, rank] = key;
    b.rows.push_back({seat, d, rank, counts.first, counts.second});
  }
  return b;
}

std::string_view ScopeName(Scope s) {
  switch (s) {
    case Scope::kOverall:
      return "overall";
    case Scope::kPreFlop:
      return "preflop";
    case Scope::kPostFlop:
      return "postflop";
  }
  return "?";
}

const ReactionRow* ReactionProfile::Find(int seat, Detector d, Scope s) const {
  for (const ReactionRow& r : rows) {
    if (r.seat == seat && r.detector == d && r.scope == s) return &r;
  }
  return nullptr;
}

ReactionProfile ComputeReactionProfile(std::span<const BluffEvent> events,
                                       std::span<const StepRecord> log) {
  const auto episodes = SplitEpisodes(log);
  auto find_episode = [&](int64_t id) -> const EpisodeView* {
    auto it = std::lower_bound(episodes.begin(), episodes.end(), id,
                               [](const EpisodeView& e, int64_t v) { return e.front().episode < v; });
    return it != episodes.end() && it->front().episode == id ? &*it : nullptr;
  };

  ReactionProfile p;
  const auto detectors = DetectorsIn(events);
  for (Detector d : kDetectors) {
    if (!detectors.contains(d)) continue;
    for (int seat = 0; seat < kNumPlayers; ++seat) {
      for (Scope s : kScopes) p.rows.push_back({seat, d, s, {}});
    }
  }
  auto row = [&](int seat, Detector d, Scope s) -> ReactionRow& {
    return *std::find_if(p.rows.begin(), p.rows.end(), [&](const ReactionRow& r) {
      return r.seat == seat && r.detector == d && r.scope == s;
    });
  };

  for (const BluffEvent& e : events) {
    const std::string where =
        "event at episode " + std::to_string(e.episode) + " step " + std::to_string(e.step);
    const EpisodeView* episode = find_episode(e.episode);
    if (episode == nullptr) throw std::runtime_error(where + ": episode not in log");
    const auto step = static_cast<size_t>(e.step);
    if (step + 1 >= episode->size()) throw std::runtime_error(where + ": no following action");
    const StepRecord& raise = (*episode)[step];
    const StepRecord& next = (*episode)[step + 1];
    if (raise.action != Action::kRaise || raise.actor != e.seat) {
      throw std::runtime_error(where + ": does not reference a raise by the bluffer");
    }
    if (next.actor == e.seat || next.action != e.reaction) {
      throw std::runtime_error(where + ": reaction disagrees with the log");
    }
    const int reacting = 1 - e.seat;
    const Scope phase_scope = e.phase == Phase::kPreFlop ? Scope::kPreFlop : Scope::kPostFlop;
    ++row(reacting, e.detector, Scope::kOverall).counts[Index(next.action)];
    ++row(reacting, e.detector, phase_scope).counts[Index(next.action)];
  }
  return p;
}

Report BuildReport(std::span<const StepRecord> log, std::span<const BluffEvent> events,
                   int winrate_window) {
  Report r;
  r.winrate = ComputeWinRates(log, winrate_window);
  r.summary = SummarizeBluffs(events);
  r.ranks = ComputeRankBreakdown(events);
  r.reactions = ComputeReactionProfile(events, log);
  return r;
}

ReportFormat ParseReportFormat(std::string_view name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  throw std::invalid_argument("unknown report format: " + std::string(name));
}

std::vector<std::string> EmitReport(const Report& report, const std::string& dir,
                                    ReportFormat format, bool plotdata) {
  const fs::path root(dir);
  fs::create_directories(root);
  std::vector<std::string> written;
  auto emit = [&](const fs::path& path, const std::string& body) {
    WriteFile(path, body);
    written.push_back(path.string());
  };
  const std::string ext = format == ReportFormat::kCsv ? ".csv" : ".json";
  auto render = [&](const Table& t) { return format == ReportFormat::kCsv ? RenderCsv(t) : RenderJson(t); };
  emit(root / ("winrate" + ext), render(WinRateTable(report.winrate)));
  emit(root / ("bluff_summary" + ext), render(SummaryTable(report.summary)));
  emit(root / ("rank_breakdown" + ext), render(RankTable(report.ranks)));
  emit(root / ("reactions" + ext), render(ReactionTable(report.reactions)));
  if (plotdata) {
    const fs::path plot = root / "plot";
    fs::create_directories(plot);
    emit(plot / "winrate.csv", RenderCsv(WinRatePlot(report.winrate)));
    emit(plot / "bluff_counts.csv", RenderCsv(BluffCountPlot(report.summary)));
    emit(plot / "rank_threshold.csv", RenderCsv(RankPlot(report.ranks, Detector::kThreshold)));
    emit(plot / "rank_statistical.csv", RenderCsv(RankPlot(report.ranks, Detector::kStatistical)));
    emit(plot / "reactions_threshold.csv",
         RenderCsv(ReactionPlot(report.reactions, Detector::kThreshold)));
    emit(plot / "reactions_statistical.csv",
         RenderCsv(ReactionPlot(report.reactions, Detector::kStatistical)));
  }
  return written;
}

}  // namespace bluff
