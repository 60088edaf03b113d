#include "bluff/game.h"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace bluff {
namespace {

constexpr uint64_t kNoCard = 63;

}  // namespace

std::string_view ActionName(Action a) {
  switch (a) {
    case Action::kFold:
      return "fold";
    case Action::kCallCheck:
      return "call";
    case Action::kRaise:
      return "raise";
  }
  return "?";
}

Action ParseAction(std::string_view name) {
  if (name == "fold") return Action::kFold;
  if (name == "call") return Action::kCallCheck;
  if (name == "raise") return Action::kRaise;
  throw std::invalid_argument("unknown action: " + std::string(name));
}

char ActionChar(Action a) { return "fcr"[Index(a)]; }

std::string_view PhaseName(Phase p) {
  return p == Phase::kPreFlop ? "preflop" : "postflop";
}

Phase ParsePhase(std::string_view name) {
  if (name == "preflop") return Phase::kPreFlop;
  if (name == "postflop") return Phase::kPostFlop;
  throw std::invalid_argument("unknown phase: " + std::string(name));
}

HandScore ComputeHandScore(Card private_card, std::optional<Card> public_card) {
  int value = (private_card.rank - kMinRank) * 4 + static_cast<int>(private_card.suit);
  if (public_card && public_card->rank == private_card.rank) {
    value += HandScore::kPairBonus;
  }
  return HandScore{value};
}

GameState GameState::FromDeal(Card p0, Card p1, Card public_card) {
  if (p0 == p1 || p0 == public_card || p1 == public_card) {
    throw std::invalid_argument("dealt cards must be distinct");
  }
  GameState s;
  s.private_cards_ = {p0, p1};
  s.public_card_ = public_card;
  return s;
}

std::optional<Card> GameState::public_card() const {
  if (phase_ == Phase::kPreFlop) return std::nullopt;
  return public_card_;
}

std::optional<int> GameState::folder() const {
  if (folder_ < 0) return std::nullopt;
  return folder_;
}

GameState DealGame(Rng& rng, Deck deck) {
  const auto cards = DeckCards(deck);
  // Partial Fisher-Yates: only the first three positions are needed.
  std::vector<Card> pool(cards.begin(), cards.end());
  for (size_t i = 0; i < 3; ++i) {
    const size_t j = i + UniformInt(rng, pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  return GameState::FromDeal(pool[0], pool[1], pool[2]);
}

GameState NewGame(uint64_t seed, Deck deck) {
  Rng rng(seed);
  return DealGame(rng, deck);
}

ActionSet LegalActions(const GameState& state) {
  if (state.is_terminal()) {
    throw std::logic_error("LegalActions called on a terminal state");
  }
  ActionSet legal;
  legal.Insert(Action::kCallCheck);
  const int p = state.current_player();
  if (state.AmountToCall() > 0) legal.Insert(Action::kFold);
  if (state.raise_count(p, state.phase()) < kMaxRaisesPerRound) {
    legal.Insert(Action::kRaise);
  }
  return legal;
}

GameState ApplyAction(const GameState& state, Action a) {
  if (!LegalActions(state).Contains(a)) {
    throw std::invalid_argument("illegal action '" + std::string(ActionName(a)) +
                                "' for player " +
                                std::to_string(state.current_player()));
  }
  GameState next = state;
  const int p = state.to_act_;
  const int opp = 1 - p;
  const int round = Index(state.phase_);
  next.history_[next.history_size_++] = HistoryEntry{static_cast<int8_t>(p), a, state.phase_};
  next.acted_this_round_[p] = true;

  switch (a) {
    case Action::kFold:
      next.terminal_ = true;
      next.folder_ = p;
      return next;
    case Action::kCallCheck:
      next.contributions_[p] = next.contributions_[opp];
      break;
    case Action::kRaise:
      next.contributions_[p] = next.contributions_[opp] +
          (state.phase_ == Phase::kPreFlop ? kPreFlopRaise : kPostFlopRaise);
      ++next.raise_counts_[p][round];
      break;
  }

  const bool closed = next.acted_this_round_[0] && next.acted_this_round_[1] &&
                      next.contributions_[0] == next.contributions_[1];
  if (!closed) {
    next.to_act_ = opp;
  } else if (state.phase_ == Phase::kPreFlop) {
    next.phase_ = Phase::kPostFlop;
    next.acted_this_round_ = {false, false};
    next.to_act_ = 0;
  } else {
    next.terminal_ = true;
  }
  return next;
}

std::array<int, kNumPlayers> ShowdownPayoffs(const GameState& state) {
  if (!state.is_terminal()) {
    throw std::logic_error("ShowdownPayoffs called on a non-terminal state");
  }
  int winner;
  if (auto f = state.folder()) {
    winner = 1 - *f;
  } else {
    const auto board = state.public_card();
    winner = ComputeHandScore(state.private_card(0), board) >
                     ComputeHandScore(state.private_card(1), board)
                 ? 0
                 : 1;
  }
  std::array<int, kNumPlayers> payoffs{};
  payoffs[winner] = state.contribution(1 - winner);
  payoffs[1 - winner] = -state.contribution(1 - winner);
  return payoffs;
}

Observation EncodeObservation(const GameState& state, int player) {
  if (state.is_terminal()) {
    throw std::logic_error("EncodeObservation called on a terminal state");
  }
  Observation obs{};
  obs[state.private_card(player).Id()] = 1.0;
  if (auto board = state.public_card()) obs[kNumCards + board->Id()] = 1.0;
  obs[2 * kNumCards] = static_cast<double>(state.contribution(player)) / kMaxContribution;
  obs[2 * kNumCards + 1] =
      static_cast<double>(state.contribution(1 - player)) / kMaxContribution;
  obs[2 * kNumCards + 2] = state.phase() == Phase::kPostFlop ? 1.0 : 0.0;
  return obs;
}

InfoSetKey MakeInfoSetKey(const GameState& state, int player) {
  const auto board = state.public_card();
  uint64_t packed = static_cast<uint64_t>(state.private_card(player).Id());
  packed |= (board ? static_cast<uint64_t>(board->Id()) : kNoCard) << 6;
  const auto history = state.history();
  uint64_t preflop = 0;
  for (size_t i = 0; i < history.size(); ++i) {
    if (history[i].phase == Phase::kPreFlop) ++preflop;
    packed |= static_cast<uint64_t>(Index(history[i].action)) << (20 + 2 * i);
  }
  packed |= static_cast<uint64_t>(history.size()) << 12;
  packed |= preflop << 16;
  return InfoSetKey(packed);
}

std::string InfoSetKey::ToString() const {
  const uint64_t priv = packed_ & 63;
  const uint64_t pub = packed_ >> 6 & 63;
  const uint64_t len = packed_ >> 12 & 15;
  const uint64_t preflop = packed_ >> 16 & 15;
  std::string out = Card::FromId(static_cast<int>(priv)).ToString();
  out += '|';
  out += pub == kNoCard ? std::string("--") : Card::FromId(static_cast<int>(pub)).ToString();
  out += '|';
  for (uint64_t i = 0; i < len; ++i) {
    if (i == preflop) out += '/';
    out += ActionChar(static_cast<Action>(packed_ >> (20 + 2 * i) & 3));
  }
  if (pub != kNoCard && preflop == len) out += '/';
  return out;
}

InfoSetKey InfoSetKey::Parse(std::string_view text) {
  auto fail = [&] {
    throw std::invalid_argument("bad infoset key: '" + std::string(text) + "'");
  };
  if (text.size() < 6 || text[2] != '|' || text[5] != '|') fail();
  const Card priv = Card::Parse(text.substr(0, 2));
  const std::string_view pub = text.substr(3, 2);
  uint64_t packed = static_cast<uint64_t>(priv.Id());
  packed |= (pub == "--" ? kNoCard : static_cast<uint64_t>(Card::Parse(pub).Id())) << 6;
  const std::string_view actions = text.substr(6);
  uint64_t len = 0;
  uint64_t preflop = 0;
  bool seen_slash = false;
  for (char c : actions) {
    if (c == '/') {
      if (seen_slash) fail();
      seen_slash = true;
      continue;
    }
    const auto pos = std::string_view("fcr").find(c);
    if (pos == std::string_view::npos || len >= kMaxHistory) fail();
    packed |= static_cast<uint64_t>(pos) << (20 + 2 * len);
    ++len;
    if (!seen_slash) ++preflop;
  }
  if (seen_slash != (pub != "--")) fail();
  packed |= len << 12;
  packed |= preflop << 16;
  return InfoSetKey(packed);
}

}  // namespace bluff
