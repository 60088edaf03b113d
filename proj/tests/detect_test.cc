#include "bluff/detect.h"

#include <cmath>
#include <filesystem>
#include <map>

#include <gtest/gtest.h>

namespace bluff {
namespace {

namespace fs = std::filesystem;

Card C(const char* text) { return Card::Parse(text); }

std::vector<StepRecord> PlayLine(int64_t episode, const char* p0, const char* p1, const char* board,
                                 std::initializer_list<Action> actions) {
  GameState s = GameState::FromDeal(C(p0), C(p1), C(board));
  std::vector<StepRecord> out;
  int step = 0;
  for (Action a : actions) {
    out.push_back(MakeStepRecord(s, a, episode, step++, std::nullopt));
    s = ApplyAction(s, a);
  }
  for (auto& r : out) r.payoffs = ShowdownPayoffs(s);
  return out;
}

std::vector<StepRecord> RandomLog(int games, uint64_t seed) {
  Rng rng(seed);
  std::vector<StepRecord> log;
  for (int g = 0; g < games; ++g) {
    GameState s = DealGame(rng);
    std::vector<StepRecord> ep;
    int step = 0;
    while (!s.is_terminal()) {
      const ActionSet legal = LegalActions(s);
      // Raise-heavy random play so every context sees plenty of raises.
      Action a;
      do {
        const uint64_t u = UniformInt(rng, 5);
        a = u < 2 ? Action::kRaise : (u < 4 ? Action::kCallCheck : Action::kFold);
      } while (!legal.Contains(a));
      ep.push_back(MakeStepRecord(s, a, g, step++, std::nullopt));
      s = ApplyAction(s, a);
    }
    for (auto& r : ep) r.payoffs = ShowdownPayoffs(s);
    log.insert(log.end(), ep.begin(), ep.end());
  }
  return log;
}

ScoreMoments Moments(int64_t count, double mean, double sigma) {
  ScoreMoments m;
  m.count = count;
  m.sum = static_cast<double>(count) * mean;
  m.sum_sq = static_cast<double>(count) * (sigma * sigma + mean * mean);
  return m;
}

TEST(ThresholdDetectTest, LowRaiseFollowedByFoldSucceeds) {
  // P0 raises holding 7d (score 22); P1 folds.
  const auto log = PlayLine(0, "7d", "Kd", "5c", {Action::kRaise, Action::kFold});
  const auto events = ThresholdDetect(log);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].score.value, 22);
  EXPECT_EQ(events[0].seat, 0);
  EXPECT_TRUE(events[0].attempt);
  EXPECT_TRUE(events[0].success);
  EXPECT_EQ(events[0].reaction, Action::kFold);
  EXPECT_EQ(events[0].detector, Detector::kThreshold);
}

TEST(ThresholdDetectTest, IgnoresStrongRaisesAndPassiveActions) {
  EXPECT_TRUE(ThresholdDetect(PlayLine(0, "As", "Kd", "5c", {Action::kRaise, Action::kFold})).empty());
  EXPECT_TRUE(ThresholdDetect(PlayLine(0, "2c", "Kd", "5c", {Action::kCallCheck, Action::kRaise,
                                                              Action::kFold}))
                  .empty());
  // A pair never counts, however low the rank.
  const auto pair = PlayLine(0, "2c", "Kd", "2d",
                             {Action::kCallCheck, Action::kCallCheck, Action::kRaise, Action::kFold});
  EXPECT_TRUE(ThresholdDetect(pair).empty());
}

TEST(ThresholdDetectTest, AttemptsAreExactlyLowNonPairRaises) {
  const auto log = RandomLog(3000, 1);
  const auto events = ThresholdDetect(log);
  std::vector<std::pair<int64_t, int>> expected;
  for (size_t i = 0; i < log.size(); ++i) {
    const StepRecord& r = log[i];
    const bool pair = r.public_card && r.public_card->rank == r.actor_card.rank;
    if (r.action == Action::kRaise && !pair && r.actor_card.rank <= 9) {
      expected.push_back({r.episode, r.step});
    }
  }
  ASSERT_EQ(events.size(), expected.size());
  for (size_t i = 0; i < events.size(); ++i) {
    EXPECT_EQ(std::make_pair(events[i].episode, events[i].step), expected[i]);
    const StepRecord& next = *std::find_if(log.begin(), log.end(), [&](const StepRecord& r) {
      return r.episode == events[i].episode && r.step == events[i].step + 1;
    });
    EXPECT_EQ(events[i].success, next.action == Action::kFold);
    EXPECT_EQ(events[i].reaction, next.action);
  }
}

TEST(ThresholdDetectTest, SkipsTruncatedEpisodes) {
  auto log = PlayLine(0, "7d", "Kd", "5c", {Action::kRaise, Action::kFold});
  log.pop_back();
  DetectDiagnostics diag;
  EXPECT_TRUE(ThresholdDetect(log, {}, &diag).empty());
  EXPECT_EQ(diag.truncated, 1);
}

TEST(ContextStatsTest, PopulationMomentsAndPairShare) {
  ScoreMoments m;
  for (double x : {10.0, 20.0, 30.0}) m.Add(x);
  EXPECT_DOUBLE_EQ(m.mean(), 20.0);
  EXPECT_NEAR(m.stddev(), 8.165, 5e-4);
  ScoreMoments a, b;
  a.Add(10.0);
  b.Add(20.0);
  b.Add(30.0);
  a.Merge(b);
  EXPECT_DOUBLE_EQ(a.mean(), m.mean());
  EXPECT_DOUBLE_EQ(a.stddev(), m.stddev());

  // Eight pair raises and two non-pair raises in one post-flop context.
  std::vector<StepRecord> log;
  const char* pairs[] = {"5h", "5s", "5c", "5h", "5s", "5c", "5h", "5s"};
  for (int i = 0; i < 10; ++i) {
    const char* p0 = i < 8 ? pairs[i] : "9c";
    const auto ep = PlayLine(i, p0, "Kd", "5d",
                             {Action::kCallCheck, Action::kCallCheck, Action::kRaise, Action::kFold});
    log.insert(log.end(), ep.begin(), ep.end());
  }
  const ContextStats stats = BuildContextStats(log);
  const ContextKey key = ContextKey::Of(log[2]);
  EXPECT_EQ(key.phase, Phase::kPostFlop);
  EXPECT_EQ(key.public_rank, 5);
  EXPECT_EQ(key.raises, 0);
  EXPECT_DOUBLE_EQ(*stats.PairShare(key), 0.8);
  const ScoreSplit* split = stats.Find(key, Action::kRaise);
  ASSERT_NE(split, nullptr);
  EXPECT_EQ(split->pair.count, 8);
  EXPECT_EQ(split->non_pair.count, 2);
  EXPECT_EQ(split->non_pair.mean(), ComputeHandScore(C("9c"), C("5d")).value);

  ContextKey empty = key;
  empty.raises = 3;
  EXPECT_FALSE(stats.PairShare(empty).has_value());
  EXPECT_EQ(stats.Find(empty, Action::kRaise), nullptr);
  EXPECT_THROW(BuildContextStats({}), std::invalid_argument);
}

TEST(ContextStatsTest, MatchesTwoPassOracle) {
  const auto log = RandomLog(2000, 2);
  const ContextStats stats = BuildContextStats(log);
  std::map<std::tuple<ContextKey, Action, bool>, std::vector<double>> groups;
  for (const StepRecord& r : log) {
    const HandScore s = r.actor_score();
    groups[{ContextKey::Of(r), r.action, s.IsPair()}].push_back(s.value);
  }
  for (const auto& [key, xs] : groups) {
    const auto& [ctx, action, pair] = key;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size());
    const ScoreSplit* split = stats.Find(ctx, action);
    ASSERT_NE(split, nullptr);
    const ScoreMoments& m = pair ? split->pair : split->non_pair;
    EXPECT_EQ(m.count, static_cast<int64_t>(xs.size()));
    EXPECT_NEAR(m.mean(), mean, 1e-9);
    EXPECT_NEAR(m.stddev(), std::sqrt(var), 1e-6);
  }
}

TEST(EvTableTest, SingleGameAndTwoPassOracle) {
  // P0 raises, P1 calls, both check down and P0 (Kd) wins 4.
  const auto one = PlayLine(0, "Kd", "9s", "5c",
                            {Action::kRaise, Action::kCallCheck, Action::kCallCheck,
                             Action::kCallCheck});
  ASSERT_EQ(one[0].payoffs[0], 4);
  const EvTable ev1 = BuildEvTable(one);
  EXPECT_EQ(ev1.Mean(ContextKey::Of(one[0]), Action::kRaise, false), 4.0);
  EXPECT_EQ(ev1.Mean(ContextKey::Of(one[1]), Action::kCallCheck, false), -4.0);
  EXPECT_FALSE(ev1.Mean(ContextKey::Of(one[0]), Action::kFold, false).has_value());
  EXPECT_FALSE(ev1.Mean(ContextKey::Of(one[0]), Action::kRaise, true).has_value());

  const auto log = RandomLog(2000, 3);
  const EvTable ev = BuildEvTable(log);
  std::map<EvTable::Cell, std::pair<double, int64_t>> oracle;
  for (const StepRecord& r : log) {
    auto& [sum, n] = oracle[{ContextKey::Of(r), r.action, r.actor_score().IsPair()}];
    sum += r.payoffs[r.actor];
    ++n;
  }
  EXPECT_EQ(ev.cells().size(), oracle.size());
  for (const auto& [cell, acc] : oracle) {
    const auto& [ctx, action, pair] = cell;
    EXPECT_NEAR(*ev.Mean(ctx, action, pair), acc.first / static_cast<double>(acc.second), 1e-12);
  }
}

TEST(EvTableTest, AllFoldLogHasOnlyObservedCells) {
  std::vector<StepRecord> log;
  for (int i = 0; i < 5; ++i) {
    const auto ep = PlayLine(i, "Kd", "9s", "5c", {Action::kFold});
    log.insert(log.end(), ep.begin(), ep.end());
  }
  const EvTable ev = BuildEvTable(log);
  ASSERT_EQ(ev.cells().size(), 1u);
  EXPECT_EQ(ev.Mean(ContextKey::Of(log[0]), Action::kFold, false), -1.0);
}

class StatisticalDetectTest : public ::testing::Test {
 protected:
  // P0 raises post-flop (first to act, no raises yet) on a 5d board; P1 folds.
  std::vector<StepRecord> Raise(const char* p0) {
    return PlayLine(0, p0, "Kd", "5d",
                    {Action::kCallCheck, Action::kCallCheck, Action::kRaise, Action::kFold});
  }
  ContextKey Key(const std::vector<StepRecord>& log) { return ContextKey::Of(log[2]); }
};

TEST_F(StatisticalDetectTest, PairDominatedContextFlagsNonPairRaise) {
  const auto log = Raise("Qc");
  ContextStats stats;
  ScoreSplit split;
  split.pair = Moments(8, 1014, 1);
  split.non_pair = Moments(2, 40, 2);
  stats.Set(Key(log), Action::kRaise, split);
  EvTable ev;
  ev.Set(Key(log), Action::kRaise, false, 0.8);
  ev.Set(Key(log), Action::kCallCheck, false, 0.2);
  const auto events = StatisticalDetect(log, stats, ev);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].detector, Detector::kStatistical);
  EXPECT_TRUE(events[0].success);
  EXPECT_EQ(events[0].step, 2);
}

TEST_F(StatisticalDetectTest, PairBelowSigmaBoundary) {
  const auto log = Raise("5h");  // pair, score 1015
  ASSERT_EQ(log[2].actor_score().value, 1015);
  ContextStats stats;
  ScoreSplit split;
  split.pair = Moments(40, 1030, 20);  // boundary 1020
  stats.Set(Key(log), Action::kRaise, split);
  EvTable ev;
  ev.Set(Key(log), Action::kRaise, true, 3.0);
  ev.Set(Key(log), Action::kCallCheck, true, 1.0);
  EXPECT_TRUE(Misrepresents(log[2], stats, DetectorConfig{}));
  EXPECT_EQ(StatisticalDetect(log, stats, ev).size(), 1u);

  split.pair = Moments(40, 1020, 20);  // boundary 1010: 1015 is not below it
  stats.Set(Key(log), Action::kRaise, split);
  EXPECT_FALSE(Misrepresents(log[2], stats, DetectorConfig{}));
  EXPECT_TRUE(StatisticalDetect(log, stats, ev).empty());
}

TEST_F(StatisticalDetectTest, RequiresEvPreference) {
  const auto log = Raise("5h");
  ContextStats stats;
  ScoreSplit split;
  split.pair = Moments(40, 1030, 20);
  stats.Set(Key(log), Action::kRaise, split);
  EvTable ev;
  ev.Set(Key(log), Action::kRaise, true, 1.0);
  ev.Set(Key(log), Action::kCallCheck, true, 1.0);
  DetectDiagnostics diag;
  EXPECT_TRUE(StatisticalDetect(log, stats, ev, {}, &diag).empty());
  EXPECT_EQ(diag.ev_rejected, 1);
}

TEST_F(StatisticalDetectTest, MissingPassiveEvFailsClosed) {
  const auto log = Raise("5h");
  ContextStats stats;
  ScoreSplit split;
  split.pair = Moments(40, 1030, 20);
  stats.Set(Key(log), Action::kRaise, split);
  EvTable ev;
  ev.Set(Key(log), Action::kRaise, true, 5.0);
  DetectDiagnostics diag;
  EXPECT_TRUE(StatisticalDetect(log, stats, ev, {}, &diag).empty());
  EXPECT_EQ(diag.ev_fail_closed, 1);
}

TEST_F(StatisticalDetectTest, SparseSubPopulationFailsClosed) {
  const auto log = Raise("9c");
  ContextStats stats;
  ScoreSplit split;
  split.non_pair = Moments(29, 40, 10);  // one short of the minimum
  stats.Set(Key(log), Action::kRaise, split);
  EvTable ev;
  ev.Set(Key(log), Action::kRaise, false, 5.0);
  ev.Set(Key(log), Action::kCallCheck, false, 0.0);
  DetectDiagnostics diag;
  EXPECT_TRUE(StatisticalDetect(log, stats, ev, {}, &diag).empty());
  EXPECT_EQ(diag.sparse_skipped, 1);
  EXPECT_EQ(diag.sparse_cells.size(), 1u);

  split.non_pair = Moments(30, 40, 10);  // boundary 35; 9c scores 29
  stats.Set(Key(log), Action::kRaise, split);
  EXPECT_EQ(StatisticalDetect(log, stats, ev).size(), 1u);
}

// Every emitted event satisfies both clauses when replayed against the tables.
TEST_F(StatisticalDetectTest, EventsReplayAgainstTables) {
  const auto log = RandomLog(20000, 4);
  const ContextStats stats = BuildContextStats(log);
  const EvTable ev = BuildEvTable(log);
  DetectDiagnostics diag;
  const auto events = StatisticalDetect(log, stats, ev, {}, &diag);
  ASSERT_FALSE(events.empty());
  std::map<std::pair<int64_t, int>, const StepRecord*> index;
  for (const StepRecord& r : log) index[{r.episode, r.step}] = &r;
  for (const BluffEvent& e : events) {
    const StepRecord& r = *index.at({e.episode, e.step});
    ASSERT_EQ(r.action, Action::kRaise);
    const ContextKey key = ContextKey::Of(r);
    const bool pair = r.actor_score().IsPair();
    EXPECT_TRUE(Misrepresents(r, stats, DetectorConfig{}));
    EXPECT_GT(*ev.Mean(key, Action::kRaise, pair), *ev.Mean(key, Action::kCallCheck, pair));
    const StepRecord& next = *index.at({e.episode, e.step + 1});
    EXPECT_EQ(e.success, next.action == Action::kFold);
  }
  // Pure function of its inputs.
  EXPECT_EQ(StatisticalDetect(log, stats, ev), events);
  EXPECT_EQ(diag.raises_inspected,
            std::count_if(log.begin(), log.end(),
                          [](const StepRecord& r) { return r.action == Action::kRaise; }));
}

TEST(BluffEventTest, JsonRoundTripAndFile) {
  const auto log = PlayLine(4, "7d", "Kd", "5c",
                            {Action::kCallCheck, Action::kCallCheck, Action::kRaise,
                             Action::kCallCheck});
  auto events = ThresholdDetect(log);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(ToJsonLine(events[0]),
            "{\"episode\":4,\"step\":2,\"seat\":0,\"agent\":\"dqn\",\"detector\":\"threshold\","
            "\"phase\":\"postflop\",\"private_card\":\"7d\",\"public_card\":\"5c\",\"score\":22,"
            "\"attempt\":true,\"success\":false,\"reaction\":\"call\"}");
  EXPECT_EQ(ParseBluffEvent(ToJsonLine(events[0])), events[0]);

  const fs::path path = fs::temp_directory_path() / "bluff_detect_events.jsonl";
  WriteEvents(path.string(), events);
  EXPECT_EQ(ReadEvents(path.string()), events);

  std::string bad = ToJsonLine(events[0]);
  bad.replace(bad.find("\"success\":false"), 15, "\"success\":true ");
  EXPECT_THROW(ParseBluffEvent(bad), std::invalid_argument);
}

TEST(DetectorConfigTest, ParsesAndValidates) {
  const DetectorConfig c = DetectorConfig::FromText("sigma_multiplier = 1.0\nmin_sigma_count = 5\n");
  EXPECT_EQ(c.sigma_multiplier, 1.0);
  EXPECT_EQ(c.min_sigma_count, 5);
  EXPECT_EQ(c.score_threshold, 32);
  EXPECT_EQ(c.pair_share_cutoff, 0.70);
  EXPECT_EQ(DetectorConfig::FromText(c.ToJson().dump()).ToJson(), c.ToJson());
  EXPECT_THROW(DetectorConfig::FromText("sigma_multiplier = -1"), std::invalid_argument);
  EXPECT_THROW(DetectorConfig::FromText("pair_share_cutoff = 1.5"), std::invalid_argument);
  EXPECT_THROW(DetectorConfig::FromText("threshold = 3"), std::invalid_argument);
}

}  // namespace
}  // namespace bluff
