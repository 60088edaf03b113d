#include "bluff/dqn.h"

#include <set>
#include <sstream>

#include <gtest/gtest.h>

namespace bluff {
namespace {

Card C(const char* text) { return Card::Parse(text); }

DqnConfig SmallConfig() {
  DqnConfig c;
  c.hidden_layers = {16};
  c.replay_capacity = 200;
  c.replay_min_size = 20;
  c.batch_size = 8;
  c.target_update_every = 50;
  c.epsilon_decay_steps = 100;
  c.learning_rate = 1e-3;
  return c;
}

Transition RandomTransition(Rng& rng) {
  GameState s = DealGame(rng);
  if (UniformInt(rng, 2) == 1) s = ApplyAction(s, Action::kCallCheck);
  Transition t;
  t.obs = EncodeObservation(s, s.current_player());
  t.action = static_cast<int>(UniformInt(rng, 3));
  t.reward = UniformReal(rng, -4.0, 4.0);
  t.terminal = UniformInt(rng, 2) == 0;
  if (!t.terminal) {
    const GameState next = ApplyAction(s, Action::kRaise);
    t.next_obs = EncodeObservation(next, next.current_player());
    t.next_legal = LegalActions(next);
  }
  return t;
}

TEST(EpsilonScheduleTest, DecaysLinearlyThenHolds) {
  const EpsilonSchedule s{1.0, 0.05, 10000};
  EXPECT_EQ(s.At(0), 1.0);
  EXPECT_DOUBLE_EQ(s.At(5000), 0.525);
  EXPECT_DOUBLE_EQ(s.At(10000), 0.05);
  EXPECT_DOUBLE_EQ(s.At(25000), 0.05);
  for (int64_t t = 1; t < 10000; t += 97) EXPECT_LT(s.At(t), s.At(t - 1));
}

TEST(MaskedSelectTest, GreedyPicksBestLegalWithLowestIndexTies) {
  const std::vector<double> q = {5.0, 1.0, 1.0};
  EXPECT_EQ(MaskedArgmax(q, ActionSet::All()), Action::kFold);
  EXPECT_EQ(MaskedArgmax(q, ActionSet::FromMask(0b110)), Action::kCallCheck);
  EXPECT_THROW(MaskedArgmax(q, ActionSet()), std::invalid_argument);
}

TEST(MaskedSelectTest, AlwaysLegalOverManyTrials) {
  Rng rng(1);
  for (int i = 0; i < 100000; ++i) {
    ActionSet legal = ActionSet::FromMask(static_cast<uint8_t>(1 + UniformInt(rng, 7)));
    const std::vector<double> q = {UniformReal(rng, -5, 5), UniformReal(rng, -5, 5),
                                   UniformReal(rng, -5, 5)};
    const Action a = MaskedSelect(q, legal, Uniform01(rng), rng);
    ASSERT_TRUE(legal.Contains(a));
  }
}

TEST(MaskedSelectTest, FrequenciesMatchEpsilonGreedyProbabilities) {
  Rng rng(2);
  const std::vector<double> q = {0.0, 3.0, 1.0};
  const ActionSet legal = ActionSet::FromMask(0b110);
  const double eps = 0.3;
  const ActionProbs p = EpsilonGreedyProbs(q, legal, eps);
  EXPECT_DOUBLE_EQ(p[0], 0.0);
  EXPECT_DOUBLE_EQ(p[1], 0.85);
  EXPECT_DOUBLE_EQ(p[2], 0.15);
  std::array<int, 3> counts{};
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[Index(MaskedSelect(q, legal, eps, rng))];
  EXPECT_EQ(counts[0], 0);
  EXPECT_NEAR(counts[1] / double(n), 0.85, 0.006);
  EXPECT_NEAR(counts[2] / double(n), 0.15, 0.006);
}

TEST(ReplayBufferTest, OverwritesOldestWhenFull) {
  ReplayBuffer buf(3);
  for (int i = 0; i < 5; ++i) {
    Transition t;
    t.reward = i;
    buf.Add(t);
  }
  EXPECT_EQ(buf.size(), 3u);
  std::multiset<double> rewards;
  for (size_t i = 0; i < 3; ++i) rewards.insert(buf.at(i).reward);
  EXPECT_EQ(rewards, (std::multiset<double>{2, 3, 4}));
  EXPECT_THROW(ReplayBuffer(0), std::invalid_argument);
}

TEST(ReplayBufferTest, SamplesDistinctItemsUniformly) {
  ReplayBuffer buf(10);
  for (int i = 0; i < 10; ++i) {
    Transition t;
    t.reward = i;
    buf.Add(t);
  }
  Rng rng(3);
  std::array<int, 10> counts{};
  for (int trial = 0; trial < 20000; ++trial) {
    const auto batch = buf.Sample(4, rng);
    std::set<const Transition*> unique(batch.begin(), batch.end());
    ASSERT_EQ(unique.size(), 4u);
    for (const Transition* t : batch) ++counts[static_cast<size_t>(t->reward)];
  }
  for (int c : counts) EXPECT_NEAR(c, 8000, 400);
  EXPECT_THROW(buf.Sample(11, rng), std::invalid_argument);
}

// Target network with zero weights outputs its bias (2, 1, 5) everywhere.
TEST(DqnAgentTest, TargetsUseMaskedMaxOfTargetNetwork) {
  DqnAgent agent(SmallConfig(), 7);
  QNetwork net = agent.online();
  for (auto& w : net.params.weights) w.setZero();
  for (auto& b : net.params.biases) b.setZero();
  net.params.biases.back() << 2.0, 1.0, 5.0;
  agent.SetOnline(net);
  agent.SyncTarget();

  Transition terminal;
  terminal.reward = 3.0;
  Transition bootstrap;
  bootstrap.reward = 0.0;
  bootstrap.terminal = false;
  bootstrap.next_legal = ActionSet::FromMask(0b011);  // raise (5.0) is masked out
  const std::vector<const Transition*> batch = {&terminal, &bootstrap};
  const Eigen::VectorXd y = agent.Targets(batch);
  EXPECT_DOUBLE_EQ(y[0], 3.0);
  EXPECT_DOUBLE_EQ(y[1], 1.98);
}

TEST(DqnAgentTest, FrozenBatchLossDecreasesEveryStep) {
  DqnConfig config;  // full-size network, default learning rate
  DqnAgent agent(config, 11);
  Rng rng(12);
  std::vector<Transition> data;
  for (int i = 0; i < 64; ++i) data.push_back(RandomTransition(rng));
  std::vector<const Transition*> batch;
  for (const auto& t : data) batch.push_back(&t);
  double prev = agent.TrainStep(batch);
  for (int step = 0; step < 100; ++step) {
    const double loss = agent.TrainStep(batch);
    ASSERT_LT(loss, prev) << "step " << step;
    prev = loss;
  }
}

TEST(DqnAgentTest, FeedTrainsAfterWarmupAndSyncsTarget) {
  const DqnConfig config = SmallConfig();
  DqnAgent agent(config, 13);
  Rng rng(14);
  const uint64_t v0 = agent.version();
  for (int i = 0; i < 19; ++i) EXPECT_FALSE(agent.Feed(RandomTransition(rng)).has_value());
  EXPECT_EQ(agent.version(), v0);
  EXPECT_DOUBLE_EQ(agent.epsilon(), 1.0 - 0.95 * 0.19);
  EXPECT_TRUE(agent.Feed(RandomTransition(rng)).has_value());
  EXPECT_EQ(agent.train_steps(), 1);
  EXPECT_NE(agent.version(), v0);
  EXPECT_FALSE(agent.target() == agent.online());
  for (int i = 20; i < 49; ++i) agent.Feed(RandomTransition(rng));
  EXPECT_FALSE(agent.target() == agent.online());
  agent.Feed(RandomTransition(rng));  // env step 50
  EXPECT_TRUE(agent.target() == agent.online());
  EXPECT_EQ(agent.env_steps(), 50);
  EXPECT_EQ(agent.train_steps(), 31);
}

TEST(DqnAgentTest, ActIsLegalAndGreedyAtZeroEpsilon) {
  DqnAgent agent(SmallConfig(), 15);
  Rng rng(16);
  GameState s = GameState::FromDeal(C("9s"), C("Kd"), C("5c"));
  s = ApplyAction(s, Action::kCallCheck);
  const auto q = agent.QValues(s, 1);
  EXPECT_EQ(agent.Act(s, 1, 0.0, rng), MaskedArgmax(q, LegalActions(s)));
  EXPECT_NE(agent.Act(s, 1, 0.0, rng), Action::kFold);
}

TEST(DqnAgentTest, CheckpointRoundTripResumesIdentically) {
  const DqnConfig config = SmallConfig();
  DqnAgent a(config, 17);
  Rng rng(18);
  for (int i = 0; i < 60; ++i) a.Feed(RandomTransition(rng));
  std::stringstream buf;
  a.Save(buf);
  DqnAgent b(config, 999);
  b.Load(buf);
  EXPECT_TRUE(a.online() == b.online());
  EXPECT_TRUE(a.target() == b.target());
  EXPECT_EQ(a.env_steps(), b.env_steps());
  EXPECT_EQ(a.train_steps(), b.train_steps());

  // Training on the same batch keeps the two agents identical.
  Rng r1(19);
  std::vector<Transition> data;
  for (int i = 0; i < 8; ++i) data.push_back(RandomTransition(r1));
  std::vector<const Transition*> batch;
  for (const auto& t : data) batch.push_back(&t);
  EXPECT_EQ(a.TrainStep(batch), b.TrainStep(batch));
  EXPECT_TRUE(a.online() == b.online());
}

TEST(DqnAgentTest, LoadRejectsMismatchedArchitecture) {
  DqnAgent a(SmallConfig(), 1);
  std::stringstream buf;
  a.Save(buf);
  DqnConfig other = SmallConfig();
  other.hidden_layers = {8};
  DqnAgent b(other, 1);
  EXPECT_THROW(b.Load(buf), std::runtime_error);
  std::stringstream junk("definitely not a checkpoint");
  EXPECT_THROW(b.Load(junk), std::runtime_error);
}

}  // namespace
}  // namespace bluff
