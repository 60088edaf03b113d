#include "bluff/best_response.h"

#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bluff {
namespace {

// One deal consistent with the public betting history, weighted by chance and
// by the fixed seat's probability of having played that history.
struct World {
  GameState state;
  double weight;
};

class BestResponder {
 public:
  BestResponder(const SeatPolicy& policy, int policy_seat)
      : policy_(policy), policy_seat_(policy_seat) {}

  // Returns sum over worlds of weight * value for the responding seat.
  double Value(const std::vector<World>& worlds) const {
    const GameState& probe = worlds.front().state;
    const int responder = 1 - policy_seat_;
    if (probe.is_terminal()) {
      double total = 0.0;
      for (const World& w : worlds) total += w.weight * ShowdownPayoffs(w.state)[responder];
      return total;
    }
    // Betting structure is identical across worlds, so legality is too.
    const ActionSet legal = LegalActions(probe);

    if (probe.current_player() == policy_seat_) {
      std::array<std::vector<World>, kNumActions> children;
      for (const World& w : worlds) {
        const ActionProbs probs = policy_(w.state);
        ValidateDistribution(probs, legal, "best-response policy");
        for (int a = 0; a < kNumActions; ++a) {
          if (probs[a] > 0.0) {
            children[a].push_back(
                {ApplyAction(w.state, static_cast<Action>(a)), w.weight * probs[a]});
          }
        }
      }
      double total = 0.0;
      for (const auto& child : children) {
        if (!child.empty()) total += Value(child);
      }
      return total;
    }

    // Responder node: worlds split into its information sets, each of which
    // picks its own best action.
    std::map<std::pair<int, int>, std::vector<World>> groups;
    for (const World& w : worlds) {
      const auto board = w.state.public_card();
      groups[{w.state.private_card(responder).Id(), board ? board->Id() : -1}].push_back(w);
    }
    double total = 0.0;
    for (const auto& [unused, group] : groups) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < kNumActions; ++a) {
        if (!legal.Contains(static_cast<Action>(a))) continue;
        std::vector<World> child;
        child.reserve(group.size());
        for (const World& w : group) {
          child.push_back({ApplyAction(w.state, static_cast<Action>(a)), w.weight});
        }
        best = std::max(best, Value(child));
      }
      total += best;
    }
    return total;
  }

 private:
  const SeatPolicy& policy_;
  int policy_seat_;
};

}  // namespace

double BestResponseValue(const SeatPolicy& policy, int policy_seat, Deck deck) {
  if (deck != Deck::kClassic6) {
    throw std::invalid_argument("exact best response is only tractable on the classic6 deck");
  }
  if (policy_seat != 0 && policy_seat != 1) {
    throw std::invalid_argument("policy_seat must be 0 or 1");
  }
  const auto cards = DeckCards(deck);
  std::vector<World> worlds;
  for (const Card& c0 : cards) {
    for (const Card& c1 : cards) {
      for (const Card& board : cards) {
        if (c0 == c1 || c0 == board || c1 == board) continue;
        worlds.push_back({GameState::FromDeal(c0, c1, board), 1.0});
      }
    }
  }
  const double chance = 1.0 / static_cast<double>(worlds.size());
  for (World& w : worlds) w.weight = chance;
  return BestResponder(policy, policy_seat).Value(worlds);
}

double Exploitability(const SeatPolicy& seat0, const SeatPolicy& seat1, Deck deck) {
  return 0.5 * (BestResponseValue(seat0, 0, deck) + BestResponseValue(seat1, 1, deck));
}

double Exploitability(const CfrSolver& solver) {
  const SeatPolicy average = [&solver](const GameState& s) {
    return solver.AveragePolicy(s);
  };
  return Exploitability(average, average, solver.deck());
}

}  // namespace bluff
