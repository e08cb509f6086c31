#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the recursion or the likelihood code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "gibbscl/lattice.hpp"
#include "gibbscl/random.hpp"

namespace oracle {

using gibbscl::Dims;
using gibbscl::Lattice;
using gibbscl::Spin;

// All unordered first-order neighbour pairs, found by coordinate distance.
inline std::vector<std::pair<int, int>> edges(Dims d) {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < d.size(); ++a)
    for (int b = a + 1; b < d.size(); ++b) {
      const int dr = std::abs(d.row_of(a) - d.row_of(b));
      const int dc = std::abs(d.col_of(a) - d.col_of(b));
      if (dr + dc == 1) out.emplace_back(a, b);
    }
  return out;
}

inline Lattice from_bits(Dims d, std::uint64_t bits) {
  std::vector<Spin> s(d.size());
  for (int i = 0; i < d.size(); ++i) s[i] = (bits >> i) & 1 ? 1 : -1;
  return Lattice(d, s);
}

inline std::uint64_t to_bits(const Lattice& lat) {
  std::uint64_t b = 0;
  for (int i = 0; i < lat.size(); ++i)
    if (lat[i] > 0) b |= std::uint64_t{1} << i;
  return b;
}

inline std::pair<long, long> stats(const Lattice& lat) {
  long s0 = 0, s1 = 0;
  for (int i = 0; i < lat.size(); ++i) s0 += lat[i];
  for (auto [a, b] : edges(lat.dims())) s1 += lat[a] * lat[b];
  return {s0, s1};
}

inline double log_q(double t0, double t1, const Lattice& lat) {
  auto [s0, s1] = stats(lat);
  return t0 * s0 + t1 * s1;
}

inline double log_sum_exp(const std::vector<double>& xs) {
  const double mx = *std::max_element(xs.begin(), xs.end());
  double s = 0.0;
  for (double x : xs) s += std::exp(x - mx);
  return mx + std::log(s);
}

// log q for every configuration of a small lattice, indexed by bit pattern.
inline std::vector<double> all_log_q(double t0, double t1, Dims d) {
  const auto es = edges(d);
  std::vector<double> out(std::size_t{1} << d.size());
  for (std::uint64_t x = 0; x < out.size(); ++x) {
    long s0 = 0, s1 = 0;
    for (int i = 0; i < d.size(); ++i) s0 += (x >> i) & 1 ? 1 : -1;
    for (auto [a, b] : es) s1 += (((x >> a) ^ (x >> b)) & 1) ? -1 : 1;
    out[x] = t0 * s0 + t1 * s1;
  }
  return out;
}

inline Lattice random_lattice(Dims d, gibbscl::Rng& rng) {
  std::vector<Spin> s(d.size());
  for (auto& v : s) v = gibbscl::uniform01(rng) < 0.5 ? -1 : 1;
  return Lattice(d, s);
}

}  // namespace oracle
