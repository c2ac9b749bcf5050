#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace suitegen {

// std::uniform_int_distribution and std::shuffle are implementation-defined,
// so reproducible artifacts draw through these helpers on top of mt19937_64.
using Rng = std::mt19937_64;

/// Uniform integer in [0, n) by rejection sampling. n must be > 0.
std::size_t uniform_index(Rng& rng, std::size_t n);

template <class T>
void stable_shuffle(Rng& rng, std::span<T> items) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = uniform_index(rng, i);
    std::swap(items[i - 1], items[j]);
  }
}

} // namespace suitegen
