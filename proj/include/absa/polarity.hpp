#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace absa {

// Sentiment polarity of an aspect. The ordinal order (positive=0,
// negative=1, neutral=2) is fixed: it is the canonical tie-break order used
// by every decoder and the class-index layout of the 3-way classifier head.
enum class Polarity : int {
  positive = 0,
  negative = 1,
  neutral = 2,
};

inline constexpr int kNumPolarities = 3;

inline constexpr std::array<Polarity, kNumPolarities> kAllPolarities = {
    Polarity::positive, Polarity::negative, Polarity::neutral};

constexpr std::string_view to_string(Polarity p) {
  switch (p) {
    case Polarity::positive: return "positive";
    case Polarity::negative: return "negative";
    case Polarity::neutral: return "neutral";
  }
  return "invalid";
}

constexpr int ordinal(Polarity p) { return static_cast<int>(p); }

constexpr Polarity polarity_from_ordinal(int i) {
  return static_cast<Polarity>(i);
}

std::optional<Polarity> try_polarity_from_string(std::string_view s);

// Throws std::invalid_argument naming the offending string.
Polarity polarity_from_string(std::string_view s);

}  // namespace absa
