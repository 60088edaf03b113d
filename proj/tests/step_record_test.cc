#include "bluff/step_record.h"

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

namespace bluff {
namespace {

namespace fs = std::filesystem;

Card C(const char* text) { return Card::Parse(text); }

fs::path TempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("bluff_step_record_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Plays a fixed line, returning its records with payoffs filled in.
std::vector<StepRecord> PlayLine(int64_t episode, std::initializer_list<Action> actions) {
  GameState s = GameState::FromDeal(C("9s"), C("Kd"), C("5d"));
  std::vector<StepRecord> out;
  int step = 0;
  for (Action a : actions) {
    const std::optional<double> eps =
        s.current_player() == kDqnSeat ? std::optional<double>(0.5) : std::nullopt;
    out.push_back(MakeStepRecord(s, a, episode, step++, eps));
    s = ApplyAction(s, a);
  }
  for (auto& r : out) r.payoffs = ShowdownPayoffs(s);
  return out;
}

TEST(StepRecordTest, JsonLineHasFixedLayout) {
  const auto records = PlayLine(12, {Action::kRaise, Action::kFold});
  EXPECT_EQ(ToJsonLine(records[0]),
            "{\"episode\":12,\"step\":0,\"phase\":\"preflop\",\"actor\":0,\"action\":\"raise\","
            "\"legal\":[\"fold\",\"call\",\"raise\"],\"actor_card\":\"9s\",\"opponent_card\":\"Kd\","
            "\"public_card\":null,\"contrib\":[1,2],\"raises\":[0,0],\"epsilon\":0.5,"
            "\"payoffs\":[2,-2]}");
  EXPECT_EQ(ToJsonLine(records[1]),
            "{\"episode\":12,\"step\":1,\"phase\":\"preflop\",\"actor\":1,\"action\":\"fold\","
            "\"legal\":[\"fold\",\"call\",\"raise\"],\"actor_card\":\"Kd\",\"opponent_card\":\"9s\","
            "\"public_card\":null,\"contrib\":[4,2],\"raises\":[1,0],\"epsilon\":null,"
            "\"payoffs\":[2,-2]}");
}

TEST(StepRecordTest, RoundTripsThroughJson) {
  const auto records = PlayLine(3, {Action::kCallCheck, Action::kRaise, Action::kCallCheck,
                                    Action::kRaise, Action::kRaise, Action::kCallCheck});
  for (const StepRecord& r : records) EXPECT_EQ(ParseStepRecord(ToJsonLine(r)), r);
  EXPECT_EQ(records[3].phase, Phase::kPostFlop);
  EXPECT_EQ(records[3].public_card, C("5d"));
  EXPECT_EQ(records[4].raises, (std::array<int, 2>{1, 0}));
}

TEST(StepRecordTest, ParseRejectsInconsistentRecords) {
  const StepRecord r =
      PlayLine(0, {Action::kCallCheck, Action::kCallCheck, Action::kCallCheck, Action::kCallCheck})[1];
  std::string line = ToJsonLine(r);
  EXPECT_NO_THROW(ParseStepRecord(line));
  std::string illegal = line;
  illegal.replace(illegal.find("\"action\":\"call\""), 15, "\"action\":\"fold\"");
  EXPECT_THROW(ParseStepRecord(illegal), std::invalid_argument);
  std::string with_board = line;
  with_board.replace(with_board.find("\"public_card\":null"), 18, "\"public_card\":\"5d\"");
  EXPECT_THROW(ParseStepRecord(with_board), std::invalid_argument);
  EXPECT_ANY_THROW(ParseStepRecord("{\"episode\":1}"));
  EXPECT_ANY_THROW(ParseStepRecord("not json"));
}

TEST(LogIoTest, PlainAndGzipLogsReadBackIdentically) {
  const fs::path dir = TempDir("io");
  std::vector<StepRecord> all;
  for (int64_t e = 0; e < 20; ++e) {
    const auto ep = PlayLine(e, {Action::kCallCheck, Action::kRaise, Action::kFold});
    all.insert(all.end(), ep.begin(), ep.end());
  }
  for (const char* name : {"log.jsonl", "log.jsonl.gz"}) {
    LineWriter w((dir / name).string());
    for (const auto& r : all) w.Write(ToJsonLine(r));
    w.Close();
    EXPECT_EQ(ReadLog((dir / name).string()), all) << name;
  }
  // gzip output is actually compressed.
  EXPECT_LT(fs::file_size(dir / "log.jsonl.gz"), fs::file_size(dir / "log.jsonl") / 4);
  // Readers ignore the file name: a gzip stream under a plain name still reads.
  fs::copy_file(dir / "log.jsonl.gz", dir / "renamed.jsonl");
  EXPECT_EQ(ReadLog((dir / "renamed.jsonl").string()), all);

  const auto episodes = SplitEpisodes(all);
  ASSERT_EQ(episodes.size(), 20u);
  EXPECT_EQ(episodes[7].size(), 3u);
  EXPECT_EQ(episodes[7].front().episode, 7);
}

TEST(LogIoTest, ReportsLineNumberOfBadRecords) {
  const fs::path dir = TempDir("bad");
  const auto ep = PlayLine(0, {Action::kCallCheck, Action::kRaise, Action::kFold});
  {
    std::ofstream out(dir / "skip.jsonl");
    out << ToJsonLine(ep[0]) << '\n' << ToJsonLine(ep[2]) << '\n';
  }
  try {
    ReadLog((dir / "skip.jsonl").string());
    FAIL() << "expected LogParseError";
  } catch (const LogParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  {
    std::ofstream out(dir / "garbage.jsonl");
    out << ToJsonLine(ep[0]) << '\n' << ToJsonLine(ep[1]) << '\n' << "{oops\n";
  }
  try {
    ReadLog((dir / "garbage.jsonl").string());
    FAIL() << "expected LogParseError";
  } catch (const LogParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(ReadLog((dir / "missing.jsonl").string()), std::runtime_error);
}

TEST(FormatDoubleTest, ShortestRoundTrip) {
  EXPECT_EQ(FormatDouble(0.5), "0.5");
  EXPECT_EQ(FormatDouble(0.05), "0.05");
  EXPECT_EQ(FormatDouble(1.0), "1");
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::stod(FormatDouble(x)), x);
}

}  // namespace
}  // namespace bluff
