#ifndef BLUFF_CARD_H_
#define BLUFF_CARD_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace bluff {

inline constexpr int kNumCards = 52;
inline constexpr int kMinRank = 2;
inline constexpr int kMaxRank = 14;  // ace

// Numeric codes double as the suit term of the hand score.
enum class Suit : uint8_t { kClubs = 1, kDiamonds = 2, kHearts = 3, kSpades = 4 };

struct Card {
  int8_t rank = kMinRank;  // 2..14
  Suit suit = Suit::kClubs;

  // Dense index in [0, 52): (rank - 2) * 4 + (suit - 1).
  constexpr int Id() const {
    return (rank - kMinRank) * 4 + (static_cast<int>(suit) - 1);
  }
  static constexpr Card FromId(int id) {
    return Card{static_cast<int8_t>(id / 4 + kMinRank),
                static_cast<Suit>(id % 4 + 1)};
  }

  // "9s", "Td", "Ac", ...
  std::string ToString() const;
  static Card Parse(std::string_view text);

  friend constexpr bool operator==(Card a, Card b) = default;
};

// Which deck a game is dealt from. The six-card deck (J, Q, K in hearts and
// spades) exists for exact best-response evaluation in tests.
enum class Deck : uint8_t { kFull52, kClassic6 };

std::span<const Card> DeckCards(Deck deck);
std::string_view DeckName(Deck deck);
Deck ParseDeck(std::string_view name);

}  // namespace bluff

#endif  // BLUFF_CARD_H_
