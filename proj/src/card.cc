#include "bluff/card.h"

#include <array>
#include <stdexcept>

namespace bluff {
namespace {

constexpr std::string_view kRankChars = "23456789TJQKA";
constexpr std::string_view kSuitChars = "cdhs";

constexpr std::array<Card, kNumCards> MakeFullDeck() {
  std::array<Card, kNumCards> cards{};
  for (int id = 0; id < kNumCards; ++id) cards[id] = Card::FromId(id);
  return cards;
}

constexpr std::array<Card, kNumCards> kFullDeck = MakeFullDeck();
constexpr std::array<Card, 6> kClassicDeck = {
    Card{11, Suit::kHearts}, Card{11, Suit::kSpades}, Card{12, Suit::kHearts},
    Card{12, Suit::kSpades}, Card{13, Suit::kHearts}, Card{13, Suit::kSpades}};

}  // namespace

std::string Card::ToString() const {
  std::string out;
  out += kRankChars[rank - kMinRank];
  out += kSuitChars[static_cast<int>(suit) - 1];
  return out;
}

Card Card::Parse(std::string_view text) {
  if (text.size() != 2) {
    throw std::invalid_argument("bad card: '" + std::string(text) + "'");
  }
  const auto r = kRankChars.find(text[0]);
  const auto s = kSuitChars.find(text[1]);
  if (r == std::string_view::npos || s == std::string_view::npos) {
    throw std::invalid_argument("bad card: '" + std::string(text) + "'");
  }
  return Card{static_cast<int8_t>(r + kMinRank), static_cast<Suit>(s + 1)};
}

std::span<const Card> DeckCards(Deck deck) {
  if (deck == Deck::kClassic6) return kClassicDeck;
  return kFullDeck;
}

std::string_view DeckName(Deck deck) {
  return deck == Deck::kClassic6 ? "classic6" : "full52";
}

Deck ParseDeck(std::string_view name) {
  if (name == "full52") return Deck::kFull52;
  if (name == "classic6") return Deck::kClassic6;
  throw std::invalid_argument("unknown deck: " + std::string(name));
}

}  // namespace bluff
