#include "bluff/step_record.h"

#include <zlib.h>

#include <charconv>
#include <cstdio>
#include <json.hpp>

namespace bluff {
namespace {

using nlohmann::json;

bool EndsWith(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string IntPair(const std::array<int, kNumPlayers>& v) {
  return "[" + std::to_string(v[0]) + "," + std::to_string(v[1]) + "]";
}

std::array<int, kNumPlayers> ParseIntPair(const json& j, const char* field) {
  if (!j.is_array() || j.size() != kNumPlayers) {
    throw std::invalid_argument(std::string("field '") + field + "' must be a 2-element array");
  }
  return {j[0].get<int>(), j[1].get<int>()};
}

std::optional<Card> ParseOptionalCard(const json& j) {
  if (j.is_null()) return std::nullopt;
  return Card::Parse(j.get<std::string>());
}

}  // namespace

std::string_view AgentName(int seat) { return seat == kDqnSeat ? "dqn" : "cfr"; }

std::string FormatDouble(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

StepRecord MakeStepRecord(const GameState& state, Action a, int64_t episode, int step,
                          std::optional<double> epsilon) {
  StepRecord r;
  const int p = state.current_player();
  r.episode = episode;
  r.step = step;
  r.phase = state.phase();
  r.actor = p;
  r.action = a;
  r.legal = LegalActions(state);
  r.actor_card = state.private_card(p);
  r.opponent_card = state.private_card(1 - p);
  r.public_card = state.public_card();
  r.contributions = state.contributions();
  r.raises = {state.raise_count(0, state.phase()), state.raise_count(1, state.phase())};
  r.epsilon = epsilon;
  return r;
}

std::string ToJsonLine(const StepRecord& r) {
  std::string out;
  out.reserve(256);
  out += "{\"episode\":" + std::to_string(r.episode);
  out += ",\"step\":" + std::to_string(r.step);
  out += ",\"phase\":\"" + std::string(PhaseName(r.phase)) + "\"";
  out += ",\"actor\":" + std::to_string(r.actor);
  out += ",\"action\":\"" + std::string(ActionName(r.action)) + "\"";
  out += ",\"legal\":[";
  bool first = true;
  for (int a = 0; a < kNumActions; ++a) {
    if (!r.legal.Contains(static_cast<Action>(a))) continue;
    if (!first) out += ',';
    out += "\"" + std::string(ActionName(static_cast<Action>(a))) + "\"";
    first = false;
  }
  out += "]";
  out += ",\"actor_card\":\"" + r.actor_card.ToString() + "\"";
  out += ",\"opponent_card\":\"" + r.opponent_card.ToString() + "\"";
  out += ",\"public_card\":" + (r.public_card ? "\"" + r.public_card->ToString() + "\"" : "null");
  out += ",\"contrib\":" + IntPair(r.contributions);
  out += ",\"raises\":" + IntPair(r.raises);
  out += ",\"epsilon\":" + (r.epsilon ? FormatDouble(*r.epsilon) : "null");
  out += ",\"payoffs\":" + IntPair(r.payoffs);
  out += "}";
  return out;
}

LogParseError::LogParseError(const std::string& source, size_t line, const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

StepRecord ParseStepRecord(std::string_view line) {
  const json j = json::parse(line);
  StepRecord r;
  r.episode = j.at("episode").get<int64_t>();
  r.step = j.at("step").get<int>();
  r.phase = ParsePhase(j.at("phase").get<std::string>());
  r.actor = j.at("actor").get<int>();
  if (r.actor != 0 && r.actor != 1) throw std::invalid_argument("actor must be 0 or 1");
  r.action = ParseAction(j.at("action").get<std::string>());
  for (const auto& name : j.at("legal")) r.legal.Insert(ParseAction(name.get<std::string>()));
  r.actor_card = Card::Parse(j.at("actor_card").get<std::string>());
  r.opponent_card = Card::Parse(j.at("opponent_card").get<std::string>());
  r.public_card = ParseOptionalCard(j.at("public_card"));
  r.contributions = ParseIntPair(j.at("contrib"), "contrib");
  r.raises = ParseIntPair(j.at("raises"), "raises");
  if (const auto& eps = j.at("epsilon"); !eps.is_null()) r.epsilon = eps.get<double>();
  r.payoffs = ParseIntPair(j.at("payoffs"), "payoffs");
  if (!r.legal.Contains(r.action)) throw std::invalid_argument("action outside its legal set");
  if ((r.phase == Phase::kPostFlop) != r.public_card.has_value()) {
    throw std::invalid_argument("public card must be present exactly post-flop");
  }
  return r;
}

struct LineWriter::Impl {
  std::string path;
  gzFile gz = nullptr;
  std::FILE* file = nullptr;
};

LineWriter::LineWriter(const std::string& path) : impl_(std::make_unique<Impl>()) {
  impl_->path = path;
  if (EndsWith(path, ".gz")) {
    impl_->gz = gzopen(path.c_str(), "wb6");
    if (impl_->gz == nullptr) throw std::runtime_error("cannot open " + path + " for writing");
  } else {
    impl_->file = std::fopen(path.c_str(), "wb");
    if (impl_->file == nullptr) throw std::runtime_error("cannot open " + path + " for writing");
  }
}

LineWriter::~LineWriter() {
  try {
    Close();
  } catch (...) {
  }
}

void LineWriter::Write(std::string_view line) {
  bool ok;
  if (impl_->gz != nullptr) {
    ok = gzwrite(impl_->gz, line.data(), static_cast<unsigned>(line.size())) ==
             static_cast<int>(line.size()) &&
         gzputc(impl_->gz, '\n') == '\n';
  } else if (impl_->file != nullptr) {
    ok = std::fwrite(line.data(), 1, line.size(), impl_->file) == line.size() &&
         std::fputc('\n', impl_->file) == '\n';
  } else {
    throw std::logic_error("write to closed log " + impl_->path);
  }
  if (!ok) throw std::runtime_error("write failed: " + impl_->path);
}

void LineWriter::Close() {
  bool ok = true;
  if (impl_->gz != nullptr) {
    ok = gzclose(impl_->gz) == Z_OK;
    impl_->gz = nullptr;
  }
  if (impl_->file != nullptr) {
    ok = std::fclose(impl_->file) == 0;
    impl_->file = nullptr;
  }
  if (!ok) throw std::runtime_error("close failed: " + impl_->path);
}

std::vector<std::string> ReadLines(const std::string& path) {
  // gzopen reads uncompressed files transparently.
  gzFile gz = gzopen(path.c_str(), "rb");
  if (gz == nullptr) throw std::runtime_error("cannot open " + path);
  gzbuffer(gz, 1 << 16);
  std::vector<std::string> lines;
  std::string current;
  char buf[1 << 14];
  int n;
  while ((n = gzread(gz, buf, sizeof(buf))) > 0) {
    for (int i = 0; i < n; ++i) {
      if (buf[i] == '\n') {
        lines.push_back(std::move(current));
        current.clear();
      } else {
        current += buf[i];
      }
    }
  }
  const bool failed = n < 0;
  gzclose(gz);
  if (failed) throw std::runtime_error("read failed: " + path);
  if (!current.empty()) lines.push_back(std::move(current));
  return lines;
}

std::vector<StepRecord> ReadLog(const std::string& path) {
  const auto lines = ReadLines(path);
  std::vector<StepRecord> records;
  records.reserve(lines.size());
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    StepRecord r;
    try {
      r = ParseStepRecord(lines[i]);
    } catch (const std::exception& e) {
      throw LogParseError(path, i + 1, e.what());
    }
    if (!records.empty()) {
      const StepRecord& prev = records.back();
      if (r.episode == prev.episode) {
        if (r.step != prev.step + 1) throw LogParseError(path, i + 1, "step out of order");
        if (r.payoffs != prev.payoffs) {
          throw LogParseError(path, i + 1, "payoffs differ within an episode");
        }
      } else if (r.episode < prev.episode) {
        throw LogParseError(path, i + 1, "episode ids must increase");
      } else if (r.step != 0) {
        throw LogParseError(path, i + 1, "episode does not start at step 0");
      }
    } else if (r.step != 0) {
      throw LogParseError(path, i + 1, "episode does not start at step 0");
    }
    records.push_back(r);
  }
  return records;
}

std::vector<EpisodeView> SplitEpisodes(std::span<const StepRecord> log) {
  std::vector<EpisodeView> episodes;
  size_t begin = 0;
  for (size_t i = 1; i <= log.size(); ++i) {
    if (i == log.size() || log[i].episode != log[begin].episode) {
      episodes.push_back(log.subspan(begin, i - begin));
      begin = i;
    }
  }
  return episodes;
}

}  // namespace bluff
