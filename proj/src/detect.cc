#include "bluff/detect.h"

#include <cmath>
#include <stdexcept>

#include "bluff/config_text.h"

namespace bluff {
namespace {

using nlohmann::json;

// The opponent's reply to the raise at log[i], or nullopt when the episode
// ends (or the log is cut) before a reply.
std::optional<Action> NextOpponentAction(std::span<const StepRecord> log, size_t i) {
  if (i + 1 >= log.size()) return std::nullopt;
  const StepRecord& next = log[i + 1];
  if (next.episode != log[i].episode || next.actor == log[i].actor) return std::nullopt;
  return next.action;
}

BluffEvent MakeEvent(const StepRecord& r, Detector d, Action reaction) {
  BluffEvent e;
  e.episode = r.episode;
  e.step = r.step;
  e.seat = r.actor;
  e.detector = d;
  e.phase = r.phase;
  e.private_card = r.actor_card;
  e.public_card = r.public_card;
  e.score = r.actor_score();
  e.success = reaction == Action::kFold;
  e.reaction = reaction;
  return e;
}

std::string CellName(const ContextKey& key, bool pair) {
  return key.ToString() + (pair ? "/pair" : "/nonpair");
}

}  // namespace

std::string_view DetectorName(Detector d) {
  return d == Detector::kThreshold ? "threshold" : "statistical";
}

Detector ParseDetector(std::string_view name) {
  if (name == "threshold") return Detector::kThreshold;
  if (name == "statistical") return Detector::kStatistical;
  throw std::invalid_argument("unknown detector: " + std::string(name));
}

std::string ToJsonLine(const BluffEvent& e) {
  std::string out = "{\"episode\":" + std::to_string(e.episode);
  out += ",\"step\":" + std::to_string(e.step);
  out += ",\"seat\":" + std::to_string(e.seat);
  out += ",\"agent\":\"" + std::string(AgentName(e.seat)) + "\"";
  out += ",\"detector\":\"" + std::string(DetectorName(e.detector)) + "\"";
  out += ",\"phase\":\"" + std::string(PhaseName(e.phase)) + "\"";
  out += ",\"private_card\":\"" + e.private_card.ToString() + "\"";
  out += ",\"public_card\":" + (e.public_card ? "\"" + e.public_card->ToString() + "\"" : "null");
  out += ",\"score\":" + std::to_string(e.score.value);
  out += std::string(",\"attempt\":") + (e.attempt ? "true" : "false");
  out += std::string(",\"success\":") + (e.success ? "true" : "false");
  out += ",\"reaction\":\"" + std::string(ActionName(e.reaction)) + "\"}";
  return out;
}

BluffEvent ParseBluffEvent(std::string_view line) {
  const json j = json::parse(line);
  BluffEvent e;
  e.episode = j.at("episode").get<int64_t>();
  e.step = j.at("step").get<int>();
  e.seat = j.at("seat").get<int>();
  if (e.seat != 0 && e.seat != 1) throw std::invalid_argument("seat must be 0 or 1");
  e.detector = ParseDetector(j.at("detector").get<std::string>());
  e.phase = ParsePhase(j.at("phase").get<std::string>());
  e.private_card = Card::Parse(j.at("private_card").get<std::string>());
  if (const auto& pub = j.at("public_card"); !pub.is_null()) {
    e.public_card = Card::Parse(pub.get<std::string>());
  }
  e.score.value = j.at("score").get<int>();
  e.attempt = j.at("attempt").get<bool>();
  e.success = j.at("success").get<bool>();
  e.reaction = ParseAction(j.at("reaction").get<std::string>());
  if (e.success != (e.reaction == Action::kFold)) {
    throw std::invalid_argument("success flag disagrees with the reaction");
  }
  return e;
}

std::vector<BluffEvent> ReadEvents(const std::string& path) {
  const auto lines = ReadLines(path);
  std::vector<BluffEvent> events;
  events.reserve(lines.size());
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    try {
      events.push_back(ParseBluffEvent(lines[i]));
    } catch (const std::exception& e) {
      throw LogParseError(path, i + 1, e.what());
    }
  }
  return events;
}

void WriteEvents(const std::string& path, std::span<const BluffEvent> events) {
  LineWriter out(path);
  for (const BluffEvent& e : events) out.Write(ToJsonLine(e));
  out.Close();
}

ContextKey ContextKey::Of(const StepRecord& r) {
  return ContextKey{r.phase, r.actor, r.raises[0] + r.raises[1],
                    r.public_card ? r.public_card->rank : 0};
}

std::string ContextKey::ToString() const {
  std::string s(PhaseName(phase));
  s += "/seat" + std::to_string(seat) + "/r" + std::to_string(raises) + "/";
  if (public_rank == 0) {
    s += "none";
  } else {
    s += Card{static_cast<int8_t>(public_rank), Suit::kClubs}.ToString().substr(0, 1);
  }
  return s;
}

void ScoreMoments::Add(double x) {
  ++count;
  sum += x;
  sum_sq += x * x;
}

void ScoreMoments::Merge(const ScoreMoments& other) {
  count += other.count;
  sum += other.sum;
  sum_sq += other.sum_sq;
}

double ScoreMoments::mean() const { return count == 0 ? 0.0 : sum / static_cast<double>(count); }

double ScoreMoments::stddev() const {
  if (count == 0) return 0.0;
  const double m = mean();
  const double var = sum_sq / static_cast<double>(count) - m * m;
  return var > 0.0 ? std::sqrt(var) : 0.0;
}

void ContextStats::Add(const StepRecord& r) {
  const HandScore score = r.actor_score();
  ScoreSplit& split = cells_[{ContextKey::Of(r), r.action}];
  (score.IsPair() ? split.pair : split.non_pair).Add(score.value);
}

void ContextStats::Set(const ContextKey& key, Action a, const ScoreSplit& split) {
  cells_[{key, a}] = split;
}

const ScoreSplit* ContextStats::Find(const ContextKey& key, Action a) const {
  const auto it = cells_.find({key, a});
  return it == cells_.end() ? nullptr : &it->second;
}

std::optional<double> ContextStats::PairShare(const ContextKey& key) const {
  const ScoreSplit* raises = Find(key, Action::kRaise);
  if (raises == nullptr) return std::nullopt;
  const int64_t total = raises->pair.count + raises->non_pair.count;
  if (total == 0) return std::nullopt;
  return static_cast<double>(raises->pair.count) / static_cast<double>(total);
}

ContextStats BuildContextStats(std::span<const StepRecord> log) {
  if (log.empty()) throw std::invalid_argument("cannot build statistics from an empty log");
  ContextStats stats;
  for (const StepRecord& r : log) stats.Add(r);
  return stats;
}

void EvTable::Add(const StepRecord& r) {
  cells_[{ContextKey::Of(r), r.action, r.actor_score().IsPair()}].Add(r.payoffs[r.actor]);
}

void EvTable::Set(const ContextKey& key, Action a, bool pair, double mean) {
  ScoreMoments m;
  m.Add(mean);
  cells_[{key, a, pair}] = m;
}

std::optional<double> EvTable::Mean(const ContextKey& key, Action a, bool pair) const {
  const auto it = cells_.find({key, a, pair});
  if (it == cells_.end() || it->second.count == 0) return std::nullopt;
  return it->second.mean();
}

EvTable BuildEvTable(std::span<const StepRecord> log) {
  EvTable ev;
  for (const StepRecord& r : log) ev.Add(r);
  return ev;
}

DetectorConfig DetectorConfig::FromText(const std::string& text) {
  const json settings = ParseConfigText(text);
  if (!settings.is_object()) throw std::invalid_argument("detector config must be an object");
  DetectorConfig c;
  for (const auto& [key, value] : settings.items()) {
    if (key == "score_threshold") {
      c.score_threshold = static_cast<int>(ConfigInt(value));
    } else if (key == "sigma_multiplier") {
      c.sigma_multiplier = ConfigDouble(value);
    } else if (key == "pair_share_cutoff") {
      c.pair_share_cutoff = ConfigDouble(value);
    } else if (key == "min_sigma_count") {
      c.min_sigma_count = ConfigInt(value);
    } else {
      throw std::invalid_argument("unknown detector config key: " + key);
    }
  }
  c.Validate();
  return c;
}

DetectorConfig DetectorConfig::FromFile(const std::string& path) {
  return FromText(ReadTextFile(path));
}

void DetectorConfig::Validate() const {
  if (score_threshold <= 0) throw std::invalid_argument("score_threshold must be positive");
  if (!(sigma_multiplier > 0.0)) throw std::invalid_argument("sigma_multiplier must be positive");
  if (!(pair_share_cutoff > 0.0 && pair_share_cutoff <= 1.0)) {
    throw std::invalid_argument("pair_share_cutoff must be in (0, 1]");
  }
  if (min_sigma_count <= 0) throw std::invalid_argument("min_sigma_count must be positive");
}

json DetectorConfig::ToJson() const {
  return json{{"score_threshold", score_threshold},
              {"sigma_multiplier", sigma_multiplier},
              {"pair_share_cutoff", pair_share_cutoff},
              {"min_sigma_count", min_sigma_count}};
}

json DetectDiagnostics::ToJson() const {
  return json{{"raises_inspected", raises_inspected},
              {"truncated", truncated},
              {"sparse_skipped", sparse_skipped},
              {"ev_fail_closed", ev_fail_closed},
              {"ev_rejected", ev_rejected},
              {"sparse_cells", sparse_cells}};
}

std::vector<BluffEvent> ThresholdDetect(std::span<const StepRecord> log,
                                        const DetectorConfig& config,
                                        DetectDiagnostics* diagnostics) {
  DetectDiagnostics local;
  DetectDiagnostics& diag = diagnostics ? *diagnostics : local;
  std::vector<BluffEvent> events;
  for (size_t i = 0; i < log.size(); ++i) {
    const StepRecord& r = log[i];
    if (r.action != Action::kRaise) continue;
    ++diag.raises_inspected;
    if (r.actor_score().value > config.score_threshold) continue;
    const auto reaction = NextOpponentAction(log, i);
    if (!reaction) {
      ++diag.truncated;
      continue;
    }
    events.push_back(MakeEvent(r, Detector::kThreshold, *reaction));
  }
  return events;
}

bool Misrepresents(const StepRecord& raise, const ContextStats& stats,
                   const DetectorConfig& config, bool* sparse) {
  if (sparse) *sparse = false;
  const ContextKey key = ContextKey::Of(raise);
  const HandScore score = raise.actor_score();
  if (!score.IsPair()) {
    const auto share = stats.PairShare(key);
    if (share && *share > config.pair_share_cutoff) return true;
  }
  const ScoreSplit* split = stats.Find(key, Action::kRaise);
  if (split == nullptr) {
    if (sparse) *sparse = true;
    return false;
  }
  const ScoreMoments& m = score.IsPair() ? split->pair : split->non_pair;
  if (m.count < config.min_sigma_count) {
    if (sparse) *sparse = true;
    return false;
  }
  return score.value < m.mean() - config.sigma_multiplier * m.stddev();
}

std::vector<BluffEvent> StatisticalDetect(std::span<const StepRecord> log,
                                          const ContextStats& stats, const EvTable& ev,
                                          const DetectorConfig& config,
                                          DetectDiagnostics* diagnostics) {
  DetectDiagnostics local;
  DetectDiagnostics& diag = diagnostics ? *diagnostics : local;
  std::vector<BluffEvent> events;
  for (size_t i = 0; i < log.size(); ++i) {
    const StepRecord& r = log[i];
    if (r.action != Action::kRaise) continue;
    ++diag.raises_inspected;
    const ContextKey key = ContextKey::Of(r);
    const bool pair = r.actor_score().IsPair();
    bool sparse = false;
    if (!Misrepresents(r, stats, config, &sparse)) {
      if (sparse) {
        ++diag.sparse_skipped;
        ++diag.sparse_cells[CellName(key, pair)];
      }
      continue;
    }
    const auto ev_raise = ev.Mean(key, Action::kRaise, pair);
    const auto ev_passive = ev.Mean(key, Action::kCallCheck, pair);
    if (!ev_raise || !ev_passive) {
      ++diag.ev_fail_closed;
      continue;
    }
    if (!(*ev_raise > *ev_passive)) {
      ++diag.ev_rejected;
      continue;
    }
    const auto reaction = NextOpponentAction(log, i);
    if (!reaction) {
      ++diag.truncated;
      continue;
    }
    events.push_back(MakeEvent(r, Detector::kStatistical, *reaction));
  }
  return events;
}

}  // namespace bluff
