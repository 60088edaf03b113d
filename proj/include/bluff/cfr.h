#ifndef BLUFF_CFR_H_
#define BLUFF_CFR_H_

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <unordered_map>

#include "bluff/game.h"
#include "bluff/rng.h"

namespace bluff {

// Probability per action, indexed by Index(Action). Illegal actions carry 0.
using ActionProbs = std::array<double, kNumActions>;

// An externally supplied strategy for the seat CFR is not learning.
// Called with the state and the acting player; must return a distribution
// supported on LegalActions(state).
using OpponentPolicy = std::function<ActionProbs(const GameState&, int player)>;

// Positive-part normalisation of regrets; uniform over `legal` when no regret
// is positive. Throws std::invalid_argument if `legal` is empty.
ActionProbs RegretMatching(const std::array<double, kNumActions>& regrets,
                           ActionSet legal);

ActionProbs UniformOver(ActionSet legal);

bool IsDistributionOver(const ActionProbs& probs, ActionSet legal);

// Throws std::runtime_error describing the problem if `probs` is not a
// distribution over `legal` (tolerance 1e-9 on the sum).
void ValidateDistribution(const ActionProbs& probs, ActionSet legal,
                          const std::string& context);

// Draws an action from `probs`. Consumes exactly one Uniform01 draw.
Action SampleAction(const ActionProbs& probs, ActionSet legal, Rng& rng);

struct InfoSetEntry {
  ActionSet legal;
  std::array<double, kNumActions> regret{};
  std::array<double, kNumActions> strategy_weight{};
};

using InfoSetTable = std::unordered_map<InfoSetKey, InfoSetEntry, InfoSetKeyHash>;

// Tabular chance-sampled CFR. Each iteration samples a deal and walks the
// full betting tree below it. The learning seat's regrets and average
// strategy are updated; the other seat plays an OpponentPolicy whose
// distribution is taken in expectation.
class CfrSolver {
 public:
  explicit CfrSolver(int seat, Deck deck = Deck::kFull52);

  int seat() const { return seat_; }
  Deck deck() const { return deck_; }
  const InfoSetTable& table() const { return table_; }
  int64_t iterations() const { return iterations_; }

  // Counterfactual value of `state` for `learner`, updating the learner's
  // entries on the way back up. `reach_learner` / `reach_opponent` are the
  // probabilities with which each side's strategy reaches `state`.
  double Traverse(const GameState& state, int learner, double reach_learner,
                  double reach_opponent, const OpponentPolicy& opponent);

  // `n` chance-sampled traversals for this solver's seat. n must be >= 1.
  void TrainIterations(int n, const OpponentPolicy& opponent, Rng& rng);

  // Alternating self-play over both seats, each seat's opponent being the
  // other seat's current regret-matched strategy from the same table.
  void SelfPlayIterations(int n, Rng& rng);

  // Current (regret-matched) and average strategies for the player to act.
  // Unvisited information sets default to uniform.
  ActionProbs CurrentPolicy(const GameState& state) const;
  ActionProbs AveragePolicy(const GameState& state) const;

  // Samples from the average strategy.
  Action Act(const GameState& state, Rng& rng) const;

  // Text checkpoint, entries sorted by packed key:
  //   bluff-cfr v1
  //   seat <s> deck <name> iterations <n> entries <m>
  //   <key> <legal mask> <regret x3> <weight x3>      (one per entry)
  // Values are written with 17 significant digits, which round-trips doubles.
  void Save(std::ostream& out) const;
  static CfrSolver Load(std::istream& in);
  void SaveFile(const std::string& path) const;
  static CfrSolver LoadFile(const std::string& path);

 private:
  InfoSetEntry& Lookup(const GameState& state, ActionSet legal);

  int seat_;
  Deck deck_;
  int64_t iterations_ = 0;
  InfoSetTable table_;
};

}  // namespace bluff

#endif  // BLUFF_CFR_H_
