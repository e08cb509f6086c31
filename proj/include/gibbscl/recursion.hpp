#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "gibbscl/lattice.hpp"
#include "gibbscl/random.hpp"

namespace gibbscl {

// Largest lag the exact recursion accepts (2^20 states per site).
inline constexpr int kMaxLag = 20;

// Shape of the forward recursion for a grid. The grid is transposed when it
// has more rows than columns so that the lag is min(rows, cols).
struct RecursionPlan {
  Dims dims;          // as given by the caller
  int lag = 0;        // rows of the oriented grid
  int length = 0;     // columns of the oriented grid
  bool transposed = false;

  std::size_t state_count() const { return std::size_t{1} << lag; }
  // In the caller's orientation: does site i couple to i+1 (next row) and to
  // i+rows (next column)?
  bool has_below(int i) const { return dims.row_of(i) + 1 < dims.rows; }
  bool has_right(int i) const { return dims.col_of(i) + 1 < dims.cols; }
};

namespace detail {

// exp(s * (theta0 + theta1 * t)) for spin s and total neighbour sum t in [-4, 4].
struct ExpTable {
  std::array<double, 9> minus{};
  std::array<double, 9> plus{};
  double log_growth = 0.0;  // bound on log(new max / old max) per folded site

  explicit ExpTable(const ModelParams& theta);
};

}  // namespace detail

// Evaluates many conditional normalisers at a fixed theta, reusing one table.
class FieldPartition {
 public:
  explicit FieldPartition(const ModelParams& theta) : exp_(theta) {}
  // Same as log_field_partition for a k x k grid, k <= kMaxLag.
  double log_square(int k, std::span<const std::int8_t> field);

 private:
  detail::ExpTable exp_;
  std::vector<double> buffer_;
};

// Throws UnsupportedSizeError when min(rows, cols) > kMaxLag.
RecursionPlan make_plan(Dims dims);

// log q_i = theta0*y_i + theta1*y_i*(y_{i+1} + y_{i+rows}); couplings that
// fall off the last row / last column are ignored together with their spins.
double log_factor(const ModelParams& theta, const RecursionPlan& plan, int i,
                  Spin self, Spin below, Spin right);

// log z(theta) for a free-boundary rows x cols grid.
double log_partition(const ModelParams& theta, int rows, int cols);

// log of sum over all configurations x of a rows x cols grid of
//   exp(theta0 * s0(x) + theta1 * (s1(x) + sum_i x_i * field[i]))
// with `field` column-major, one integer per site (|field| <= 4 - #inner nbrs).
double log_field_partition(const ModelParams& theta, Dims dims,
                           std::span<const std::int8_t> field);

// Sum of the realised spins adjacent to each block site from outside the
// block, column-major within the block.
std::vector<std::int8_t> block_boundary_field(const Lattice& lat, const Block& block);

// log z(theta, y_{A_i}): normaliser of the block's conditional distribution
// given its realised boundary.
double log_block_normalizer(const ModelParams& theta, const Lattice& lat,
                            const Block& block);

// Reusable exact sampler: forward pass keeping one table per column, then a
// backward pass that recomputes the in-column tables and draws sites in
// reverse order. Memory is O((cols + lag) * 2^lag).
class ExactSampler {
 public:
  explicit ExactSampler(Dims dims);

  Lattice draw(const ModelParams& theta, Rng& rng);
  Dims dims() const { return plan_.dims; }

 private:
  RecursionPlan plan_;
  std::vector<double> checkpoints_;  // length x states
  std::vector<double> column_;       // lag x states
  std::vector<double> work_;
  std::vector<Spin> oriented_;
};

Lattice exact_sample(const ModelParams& theta, int rows, int cols, Seed seed);

// Direct summation over all 2^(rows*cols) configurations, max-shifted.
// Throws UnsupportedSizeError when rows*cols > 20.
double brute_force_log_partition(const ModelParams& theta, int rows, int cols);

}  // namespace gibbscl
