#include "suitegen/random.hpp"

#include <limits>

#include "suitegen/error.hpp"

namespace suitegen {

std::size_t uniform_index(Rng& rng, std::size_t n) {
  if (n == 0) {
    throw InvalidArgument("uniform_index: empty range");
  }
  const std::uint64_t range = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t draw = 0;
  do {
    draw = rng();
  } while (draw >= limit);
  return static_cast<std::size_t>(draw % range);
}

} // namespace suitegen
