#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace gibbscl {

using Seed = std::uint64_t;
using Spin = std::int8_t;

// Grid shape. Sites are indexed column-major: i = col * rows + row.
struct Dims {
  int rows = 0;
  int cols = 0;

  int size() const { return rows * cols; }
  int index(int row, int col) const { return col * rows + row; }
  int row_of(int i) const { return i % rows; }
  int col_of(int i) const { return i / rows; }
  // Number of first-order edges on the free-boundary grid.
  int edge_count() const { return cols * (rows - 1) + rows * (cols - 1); }
  bool operator==(const Dims&) const = default;
};

// Rectangular field of +-1 spins.
class Lattice {
 public:
  Lattice() = default;
  Lattice(Dims dims, std::vector<Spin> spins);

  static Lattice filled(Dims dims, Spin value);

  Dims dims() const { return dims_; }
  int rows() const { return dims_.rows; }
  int cols() const { return dims_.cols; }
  int size() const { return dims_.size(); }

  Spin operator[](int i) const { return spins_[i]; }
  Spin at(int row, int col) const { return spins_[dims_.index(row, col)]; }
  void set(int i, Spin s) { spins_[i] = s; }
  std::span<const Spin> spins() const { return spins_; }

  // Sum of the spins of the first-order neighbours of site i.
  int neighbor_sum(int i) const;

  Lattice transposed() const;
  Lattice flipped() const;

  bool operator==(const Lattice&) const = default;

 private:
  Dims dims_;
  std::vector<Spin> spins_;
};

struct ModelParams {
  double theta0 = 0.0;  // abundance
  double theta1 = 0.0;  // interaction
};

struct SufficientStats {
  long s0 = 0;  // sum of spins
  long s1 = 0;  // sum over unordered neighbour pairs of y_i * y_j
  bool operator==(const SufficientStats&) const = default;
};

// A k x k window A_i together with the sites outside it that touch it.
struct Block {
  int top_row = 0;
  int left_col = 0;
  int size = 0;
  std::vector<int> index_set;     // column-major within the block
  std::vector<int> boundary_set;  // sorted ascending
};

// First-order neighbours of site i on the free-boundary grid, ascending.
std::vector<int> neighbors(Dims dims, int i);

SufficientStats sufficient_statistics(const Lattice& lat);

Block make_block(Dims dims, int top_row, int left_col, int k);

// All (rows-k+1)*(cols-k+1) windows, raster order (left to right, then down).
std::vector<Block> enumerate_blocks(Dims dims, int k);

// Uniform sample without replacement of ceil(fraction * C) blocks, returned in
// their original order.
std::vector<Block> select_blocks(const std::vector<Block>& blocks,
                                 double fraction, Seed seed);

Lattice read_lattice(const std::filesystem::path& path);
void write_lattice(const Lattice& lat, const std::filesystem::path& path);

// Text form used by the file format: one lattice row per line.
Lattice parse_lattice(std::string_view text);
std::string format_lattice(const Lattice& lat);

}  // namespace gibbscl
