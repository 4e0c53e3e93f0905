#include "absa/polarity.hpp"

#include <stdexcept>
#include <string>

namespace absa {

std::optional<Polarity> try_polarity_from_string(std::string_view s) {
  for (Polarity p : kAllPolarities) {
    if (s == to_string(p)) return p;
  }
  return std::nullopt;
}

Polarity polarity_from_string(std::string_view s) {
  if (auto p = try_polarity_from_string(s)) return *p;
  throw std::invalid_argument("unknown polarity '" + std::string(s) +
                              "' (expected positive|negative|neutral)");
}

}  // namespace absa
