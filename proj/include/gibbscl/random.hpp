#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "gibbscl/lattice.hpp"

namespace gibbscl {

using Rng = std::mt19937_64;

// Private stream for (seed, task path). Different paths give unrelated streams.
inline Rng make_rng(Seed seed, std::initializer_list<std::uint64_t> stream = {}) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * stream.size());
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (auto v : stream) push(v);
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

inline double uniform01(Rng& rng) {
  return std::generate_canonical<double, 53>(rng);
}

}  // namespace gibbscl
