#ifndef BLUFF_BEST_RESPONSE_H_
#define BLUFF_BEST_RESPONSE_H_

#include <functional>

#include "bluff/cfr.h"
#include "bluff/game.h"

namespace bluff {

// Strategy of one fixed seat: distribution over LegalActions(state) for the
// player to act.
using SeatPolicy = std::function<ActionProbs(const GameState&)>;

// Exact expected payoff of a best response against `policy` played by
// `policy_seat`, enumerating every deal and betting line. Only the six-card
// deck is tractable; other decks throw std::invalid_argument.
double BestResponseValue(const SeatPolicy& policy, int policy_seat, Deck deck);

// Mean of both seats' best-response values against the profile. Zero exactly
// at a Nash equilibrium, positive otherwise.
double Exploitability(const SeatPolicy& seat0, const SeatPolicy& seat1, Deck deck);

// Average-strategy exploitability of a solver that holds both seats' tables.
double Exploitability(const CfrSolver& solver);

}  // namespace bluff

#endif  // BLUFF_BEST_RESPONSE_H_
