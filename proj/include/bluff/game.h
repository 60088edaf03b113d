#ifndef BLUFF_GAME_H_
#define BLUFF_GAME_H_

// Two-player, fixed-limit Leduc Hold'em dealt from a 52-card deck.
//
// Each player posts a blind (seat 0: 1 chip, seat 1: 2 chips) and receives one
// private card. Pre-flop raises are 2 chips and post-flop raises 4 chips; each
// player may raise at most twice per round. After pre-flop betting closes a
// single public card is revealed. Pairs with the public card beat high cards,
// and suits break rank ties, so a showdown always has a unique winner.

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "bluff/card.h"
#include "bluff/rng.h"

namespace bluff {

inline constexpr int kNumPlayers = 2;
inline constexpr int kNumActions = 3;
inline constexpr int kSmallBlind = 1;
inline constexpr int kBigBlind = 2;
inline constexpr int kPreFlopRaise = 2;
inline constexpr int kPostFlopRaise = 4;
inline constexpr int kMaxRaisesPerRound = 2;  // per player
inline constexpr int kMaxDecisionsPerRound = 6;
inline constexpr int kMaxHistory = 2 * kMaxDecisionsPerRound;

enum class Action : uint8_t { kFold = 0, kCallCheck = 1, kRaise = 2 };
enum class Phase : uint8_t { kPreFlop = 0, kPostFlop = 1 };

std::string_view ActionName(Action a);  // "fold", "call", "raise"
Action ParseAction(std::string_view name);
char ActionChar(Action a);  // 'f', 'c', 'r'
std::string_view PhaseName(Phase p);  // "preflop", "postflop"
Phase ParsePhase(std::string_view name);

inline constexpr int Index(Action a) { return static_cast<int>(a); }
inline constexpr int Index(Phase p) { return static_cast<int>(p); }

// Bit set over the three actions.
class ActionSet {
 public:
  constexpr ActionSet() = default;
  static constexpr ActionSet FromMask(uint8_t mask) {
    ActionSet s;
    s.mask_ = mask & 0x7;
    return s;
  }
  static constexpr ActionSet All() { return FromMask(0x7); }

  constexpr bool Contains(Action a) const { return mask_ >> Index(a) & 1; }
  constexpr void Insert(Action a) { mask_ |= uint8_t{1} << Index(a); }
  constexpr void Erase(Action a) { mask_ &= ~(uint8_t{1} << Index(a)); }
  constexpr int Size() const { return (mask_ & 1) + (mask_ >> 1 & 1) + (mask_ >> 2 & 1); }
  constexpr bool Empty() const { return mask_ == 0; }
  constexpr uint8_t mask() const { return mask_; }

  friend constexpr bool operator==(ActionSet, ActionSet) = default;

 private:
  uint8_t mask_ = 0;
};

// Hand strength: (rank - 2) * 4 + suit code, plus 1000 when the private card
// pairs the public card. Non-pair scores lie in [1, 52], pairs in [1001, 1052].
struct HandScore {
  int value = 0;

  static constexpr int kPairBonus = 1000;
  constexpr bool IsPair() const { return value > kPairBonus; }
  friend constexpr auto operator<=>(HandScore, HandScore) = default;
};

HandScore ComputeHandScore(Card private_card, std::optional<Card> public_card);

struct HistoryEntry {
  int8_t player = 0;
  Action action = Action::kFold;
  Phase phase = Phase::kPreFlop;

  friend constexpr bool operator==(HistoryEntry, HistoryEntry) = default;
};

// Full (omniscient) game record. A value type: transitions return new states.
class GameState {
 public:
  // Cards must be distinct. The public card stays hidden until pre-flop
  // betting closes.
  static GameState FromDeal(Card p0, Card p1, Card public_card);

  Card private_card(int player) const { return private_cards_[player]; }
  // Empty before the flop.
  std::optional<Card> public_card() const;
  // The card that will be (or has been) revealed; for the engine and tests.
  Card dealt_public_card() const { return public_card_; }
  Phase phase() const { return phase_; }
  int contribution(int player) const { return contributions_[player]; }
  std::array<int, kNumPlayers> contributions() const { return contributions_; }
  int pot() const { return contributions_[0] + contributions_[1]; }
  int raise_count(int player, Phase round) const {
    return raise_counts_[player][Index(round)];
  }
  // Raises by both players in the current round.
  int raises_this_round() const {
    return raise_counts_[0][Index(phase_)] + raise_counts_[1][Index(phase_)];
  }
  std::span<const HistoryEntry> history() const {
    return {history_.data(), static_cast<size_t>(history_size_)};
  }
  int current_player() const { return to_act_; }
  bool is_terminal() const { return terminal_; }
  std::optional<int> folder() const;

  // Chips the current player must add to call.
  int AmountToCall() const {
    return contributions_[1 - to_act_] - contributions_[to_act_];
  }

  friend bool operator==(const GameState&, const GameState&) = default;

 private:
  friend GameState ApplyAction(const GameState& state, Action a);

  std::array<Card, kNumPlayers> private_cards_{};
  Card public_card_{};
  Phase phase_ = Phase::kPreFlop;
  std::array<int, kNumPlayers> contributions_{kSmallBlind, kBigBlind};
  std::array<std::array<int, 2>, kNumPlayers> raise_counts_{};
  std::array<bool, kNumPlayers> acted_this_round_{};
  std::array<HistoryEntry, kMaxHistory> history_{};
  int history_size_ = 0;
  int to_act_ = 0;
  bool terminal_ = false;
  int folder_ = -1;
};

// Shuffles the deck with a generator seeded from `seed` and deals.
GameState NewGame(uint64_t seed, Deck deck = Deck::kFull52);
// Deals from an existing generator stream.
GameState DealGame(Rng& rng, Deck deck = Deck::kFull52);

// Throws std::logic_error on a terminal state.
ActionSet LegalActions(const GameState& state);

// Throws std::invalid_argument if `a` is not legal in `state`.
GameState ApplyAction(const GameState& state, Action a);

// Net chips won by each player. Sums to zero. Throws on a non-terminal state.
std::array<int, kNumPlayers> ShowdownPayoffs(const GameState& state);

// Largest contribution a single player can reach: the big blind plus every
// raise both players may make in both rounds.
inline constexpr int kMaxContribution =
    kBigBlind + kNumPlayers * kMaxRaisesPerRound * (kPreFlopRaise + kPostFlopRaise);

// Layout: [0, 52) one-hot private card, [52, 104) one-hot public card (zeros
// before the flop), 104/105 own and opponent contribution divided by
// kMaxContribution, 106 phase flag (1 post-flop).
inline constexpr int kObservationSize = 107;
using Observation = std::array<double, kObservationSize>;

Observation EncodeObservation(const GameState& state, int player);

// Canonical information-set identifier: private card, public card (if shown)
// and the ordered action history. Packed into 64 bits:
//   [0, 6) private card id, [6, 12) public card id or 63, [12, 16) history
//   length, [16, 20) number of pre-flop actions, [20, 44) two bits per action.
class InfoSetKey {
 public:
  constexpr InfoSetKey() = default;
  constexpr explicit InfoSetKey(uint64_t packed) : packed_(packed) {}

  uint64_t packed() const { return packed_; }
  // e.g. "9s|--|cr" pre-flop, "9s|5d|cr/rc" post-flop.
  std::string ToString() const;
  static InfoSetKey Parse(std::string_view text);

  friend constexpr auto operator<=>(InfoSetKey, InfoSetKey) = default;

 private:
  uint64_t packed_ = 0;
};

InfoSetKey MakeInfoSetKey(const GameState& state, int player);

struct InfoSetKeyHash {
  size_t operator()(InfoSetKey k) const noexcept {
    uint64_t z = k.packed() * 0x9e3779b97f4a7c15ULL;
    return static_cast<size_t>(z ^ (z >> 32));
  }
};

}  // namespace bluff

#endif  // BLUFF_GAME_H_
