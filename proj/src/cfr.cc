#include "bluff/cfr.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace bluff {
namespace {

constexpr std::string_view kCheckpointMagic = "bluff-cfr";
constexpr int kCheckpointVersion = 1;

std::string FormatProbs(const ActionProbs& p) {
  std::ostringstream os;
  os << '(' << p[0] << ", " << p[1] << ", " << p[2] << ')';
  return os.str();
}

}  // namespace

ActionProbs UniformOver(ActionSet legal) {
  if (legal.Empty()) throw std::invalid_argument("empty legal action set");
  ActionProbs probs{};
  const double p = 1.0 / legal.Size();
  for (int a = 0; a < kNumActions; ++a) {
    if (legal.Contains(static_cast<Action>(a))) probs[a] = p;
  }
  return probs;
}

ActionProbs RegretMatching(const std::array<double, kNumActions>& regrets,
                           ActionSet legal) {
  if (legal.Empty()) throw std::invalid_argument("empty legal action set");
  ActionProbs probs{};
  double positive_sum = 0.0;
  for (int a = 0; a < kNumActions; ++a) {
    if (legal.Contains(static_cast<Action>(a)) && regrets[a] > 0.0) {
      probs[a] = regrets[a];
      positive_sum += regrets[a];
    }
  }
  if (positive_sum <= 0.0) return UniformOver(legal);
  for (double& p : probs) p /= positive_sum;
  return probs;
}

bool IsDistributionOver(const ActionProbs& probs, ActionSet legal) {
  double sum = 0.0;
  for (int a = 0; a < kNumActions; ++a) {
    const double p = probs[a];
    if (!std::isfinite(p) || p < 0.0) return false;
    if (!legal.Contains(static_cast<Action>(a)) && p != 0.0) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) <= 1e-9;
}

void ValidateDistribution(const ActionProbs& probs, ActionSet legal,
                          const std::string& context) {
  double sum = 0.0;
  for (int a = 0; a < kNumActions; ++a) {
    const double p = probs[a];
    const bool is_legal = legal.Contains(static_cast<Action>(a));
    if (!std::isfinite(p) || p < 0.0 || (!is_legal && p != 0.0)) {
      throw std::runtime_error("invalid policy distribution " + FormatProbs(probs) +
                               " (legal mask " + std::to_string(legal.mask()) +
                               ") at " + context);
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::runtime_error("policy distribution " + FormatProbs(probs) +
                             " does not sum to 1 at " + context);
  }
}

Action SampleAction(const ActionProbs& probs, ActionSet legal, Rng& rng) {
  const double u = Uniform01(rng);
  double cumulative = 0.0;
  int last = -1;
  for (int a = 0; a < kNumActions; ++a) {
    if (!legal.Contains(static_cast<Action>(a)) || probs[a] <= 0.0) continue;
    cumulative += probs[a];
    last = a;
    if (u < cumulative) return static_cast<Action>(a);
  }
  if (last < 0) throw std::invalid_argument("no action with positive probability");
  return static_cast<Action>(last);
}

CfrSolver::CfrSolver(int seat, Deck deck) : seat_(seat), deck_(deck) {
  if (seat != 0 && seat != 1) throw std::invalid_argument("seat must be 0 or 1");
}

InfoSetEntry& CfrSolver::Lookup(const GameState& state, ActionSet legal) {
  auto [it, inserted] =
      table_.try_emplace(MakeInfoSetKey(state, state.current_player()));
  if (inserted) it->second.legal = legal;
  return it->second;
}

double CfrSolver::Traverse(const GameState& state, int learner, double reach_learner,
                           double reach_opponent, const OpponentPolicy& opponent) {
  if (state.is_terminal()) return ShowdownPayoffs(state)[learner];

  const ActionSet legal = LegalActions(state);
  const int player = state.current_player();

  if (player != learner) {
    const ActionProbs probs = opponent(state, player);
    if (!IsDistributionOver(probs, legal)) {
      ValidateDistribution(probs, legal,
                           "opponent infoset " + MakeInfoSetKey(state, player).ToString());
    }
    double value = 0.0;
    for (int a = 0; a < kNumActions; ++a) {
      if (!legal.Contains(static_cast<Action>(a))) continue;
      value += probs[a] * Traverse(ApplyAction(state, static_cast<Action>(a)), learner,
                                   reach_learner, reach_opponent * probs[a], opponent);
    }
    return value;
  }

  // References into the node-based map survive insertions made below.
  InfoSetEntry& entry = Lookup(state, legal);
  const ActionProbs sigma = RegretMatching(entry.regret, legal);
  std::array<double, kNumActions> action_values{};
  double value = 0.0;
  for (int a = 0; a < kNumActions; ++a) {
    if (!legal.Contains(static_cast<Action>(a))) continue;
    action_values[a] = Traverse(ApplyAction(state, static_cast<Action>(a)), learner,
                                reach_learner * sigma[a], reach_opponent, opponent);
    value += sigma[a] * action_values[a];
  }
  for (int a = 0; a < kNumActions; ++a) {
    if (!legal.Contains(static_cast<Action>(a))) continue;
    entry.regret[a] += reach_opponent * (action_values[a] - value);
    entry.strategy_weight[a] += reach_learner * sigma[a];
  }
  return value;
}

void CfrSolver::TrainIterations(int n, const OpponentPolicy& opponent, Rng& rng) {
  if (n < 1) throw std::invalid_argument("TrainIterations requires n >= 1");
  for (int i = 0; i < n; ++i) {
    const GameState root = DealGame(rng, deck_);
    Traverse(root, seat_, 1.0, 1.0, opponent);
    ++iterations_;
  }
}

void CfrSolver::SelfPlayIterations(int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("SelfPlayIterations requires n >= 1");
  const OpponentPolicy current = [this](const GameState& s, int) {
    return CurrentPolicy(s);
  };
  for (int i = 0; i < n; ++i) {
    const GameState root = DealGame(rng, deck_);
    for (int learner = 0; learner < kNumPlayers; ++learner) {
      Traverse(root, learner, 1.0, 1.0, current);
    }
    ++iterations_;
  }
}

ActionProbs CfrSolver::CurrentPolicy(const GameState& state) const {
  const ActionSet legal = LegalActions(state);
  auto it = table_.find(MakeInfoSetKey(state, state.current_player()));
  if (it == table_.end()) return UniformOver(legal);
  return RegretMatching(it->second.regret, legal);
}

ActionProbs CfrSolver::AveragePolicy(const GameState& state) const {
  const ActionSet legal = LegalActions(state);
  auto it = table_.find(MakeInfoSetKey(state, state.current_player()));
  if (it == table_.end()) return UniformOver(legal);
  const auto& w = it->second.strategy_weight;
  double total = 0.0;
  for (int a = 0; a < kNumActions; ++a) {
    if (legal.Contains(static_cast<Action>(a))) total += w[a];
  }
  if (total <= 0.0) return UniformOver(legal);
  ActionProbs probs{};
  for (int a = 0; a < kNumActions; ++a) {
    if (legal.Contains(static_cast<Action>(a))) probs[a] = w[a] / total;
  }
  return probs;
}

Action CfrSolver::Act(const GameState& state, Rng& rng) const {
  return SampleAction(AveragePolicy(state), LegalActions(state), rng);
}

void CfrSolver::Save(std::ostream& out) const {
  std::vector<const InfoSetTable::value_type*> entries;
  entries.reserve(table_.size());
  for (const auto& kv : table_) entries.push_back(&kv);
  std::sort(entries.begin(), entries.end(),
            [](auto* a, auto* b) { return a->first < b->first; });

  out << kCheckpointMagic << " v" << kCheckpointVersion << '\n';
  out << "seat " << seat_ << " deck " << DeckName(deck_) << " iterations "
      << iterations_ << " entries " << entries.size() << '\n';
  out << std::setprecision(17);
  for (const auto* kv : entries) {
    const InfoSetEntry& e = kv->second;
    out << kv->first.ToString() << ' ' << static_cast<int>(e.legal.mask());
    for (double r : e.regret) out << ' ' << r;
    for (double w : e.strategy_weight) out << ' ' << w;
    out << '\n';
  }
}

CfrSolver CfrSolver::Load(std::istream& in) {
  std::string magic, version;
  in >> magic >> version;
  if (magic != kCheckpointMagic || version != "v" + std::to_string(kCheckpointVersion)) {
    throw std::runtime_error("not a CFR checkpoint (header '" + magic + " " + version + "')");
  }
  std::string tag_seat, tag_deck, deck_name, tag_iter, tag_entries;
  int seat = 0;
  int64_t iterations = 0;
  size_t count = 0;
  in >> tag_seat >> seat >> tag_deck >> deck_name >> tag_iter >> iterations >>
      tag_entries >> count;
  if (!in || tag_seat != "seat" || tag_deck != "deck" || tag_iter != "iterations" ||
      tag_entries != "entries") {
    throw std::runtime_error("malformed CFR checkpoint header");
  }
  CfrSolver solver(seat, ParseDeck(deck_name));
  solver.iterations_ = iterations;
  solver.table_.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    std::string key;
    int mask = 0;
    InfoSetEntry e;
    in >> key >> mask;
    for (double& r : e.regret) in >> r;
    for (double& w : e.strategy_weight) in >> w;
    if (!in) {
      throw std::runtime_error("truncated CFR checkpoint at entry " + std::to_string(i));
    }
    e.legal = ActionSet::FromMask(static_cast<uint8_t>(mask));
    solver.table_.emplace(InfoSetKey::Parse(key), e);
  }
  return solver;
}

void CfrSolver::SaveFile(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  Save(out);
  if (!out.flush()) throw std::runtime_error("write failed: " + path);
}

CfrSolver CfrSolver::LoadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return Load(in);
}

}  // namespace bluff
