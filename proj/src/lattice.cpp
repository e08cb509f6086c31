#include "gibbscl/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "gibbscl/errors.hpp"
#include "gibbscl/random.hpp"

namespace gibbscl {

Lattice::Lattice(Dims dims, std::vector<Spin> spins)
    : dims_(dims), spins_(std::move(spins)) {
  if (dims.rows <= 0 || dims.cols <= 0)
    throw DomainError("lattice dimensions must be positive");
  if (static_cast<int>(spins_.size()) != dims.size())
    throw DomainError("spin count does not match lattice dimensions");
  for (Spin s : spins_)
    if (s != 1 && s != -1) throw DomainError("spins must be -1 or +1");
}

Lattice Lattice::filled(Dims dims, Spin value) {
  return Lattice(dims, std::vector<Spin>(std::max(dims.size(), 0), value));
}

int Lattice::neighbor_sum(int i) const {
  const int r = dims_.row_of(i);
  const int c = dims_.col_of(i);
  int sum = 0;
  if (r > 0) sum += spins_[i - 1];
  if (r + 1 < dims_.rows) sum += spins_[i + 1];
  if (c > 0) sum += spins_[i - dims_.rows];
  if (c + 1 < dims_.cols) sum += spins_[i + dims_.rows];
  return sum;
}

Lattice Lattice::transposed() const {
  Dims t{dims_.cols, dims_.rows};
  std::vector<Spin> out(spins_.size());
  for (int c = 0; c < dims_.cols; ++c)
    for (int r = 0; r < dims_.rows; ++r) out[t.index(c, r)] = at(r, c);
  return Lattice(t, std::move(out));
}

Lattice Lattice::flipped() const {
  std::vector<Spin> out(spins_);
  for (auto& s : out) s = static_cast<Spin>(-s);
  return Lattice(dims_, std::move(out));
}

std::vector<int> neighbors(Dims dims, int i) {
  if (i < 0 || i >= dims.size()) throw DomainError("site index out of range");
  const int r = dims.row_of(i);
  const int c = dims.col_of(i);
  std::vector<int> out;
  out.reserve(4);
  if (c > 0) out.push_back(i - dims.rows);
  if (r > 0) out.push_back(i - 1);
  if (r + 1 < dims.rows) out.push_back(i + 1);
  if (c + 1 < dims.cols) out.push_back(i + dims.rows);
  return out;
}

SufficientStats sufficient_statistics(const Lattice& lat) {
  const Dims d = lat.dims();
  SufficientStats st;
  for (int i = 0; i < d.size(); ++i) {
    const int r = d.row_of(i);
    const int c = d.col_of(i);
    st.s0 += lat[i];
    // count each edge from its upper/left endpoint only
    if (r + 1 < d.rows) st.s1 += lat[i] * lat[i + 1];
    if (c + 1 < d.cols) st.s1 += lat[i] * lat[i + d.rows];
  }
  return st;
}

Block make_block(Dims dims, int top_row, int left_col, int k) {
  if (k < 1 || top_row < 0 || left_col < 0 || top_row + k > dims.rows ||
      left_col + k > dims.cols)
    throw DomainError("block does not fit inside the lattice");
  Block b{top_row, left_col, k, {}, {}};
  b.index_set.reserve(static_cast<std::size_t>(k) * k);
  for (int c = left_col; c < left_col + k; ++c)
    for (int r = top_row; r < top_row + k; ++r)
      b.index_set.push_back(dims.index(r, c));

  auto inside = [&](int r, int c) {
    return r >= top_row && r < top_row + k && c >= left_col && c < left_col + k;
  };
  for (int c = left_col - 1; c <= left_col + k; ++c) {
    for (int r = top_row - 1; r <= top_row + k; ++r) {
      if (r < 0 || c < 0 || r >= dims.rows || c >= dims.cols) continue;
      if (inside(r, c)) continue;
      // corners of the surrounding ring touch the block only diagonally
      const bool row_adj = r >= top_row && r < top_row + k;
      const bool col_adj = c >= left_col && c < left_col + k;
      if (row_adj || col_adj) b.boundary_set.push_back(dims.index(r, c));
    }
  }
  std::sort(b.boundary_set.begin(), b.boundary_set.end());
  return b;
}

std::vector<Block> enumerate_blocks(Dims dims, int k) {
  if (k < 1 || k > std::min(dims.rows, dims.cols))
    throw DomainError("block size must lie in [1, min(rows, cols)]");
  std::vector<Block> out;
  out.reserve(static_cast<std::size_t>(dims.rows - k + 1) * (dims.cols - k + 1));
  for (int r = 0; r + k <= dims.rows; ++r)
    for (int c = 0; c + k <= dims.cols; ++c) out.push_back(make_block(dims, r, c, k));
  return out;
}

std::vector<Block> select_blocks(const std::vector<Block>& blocks, double fraction,
                                 Seed seed) {
  if (blocks.empty()) throw DomainError("no blocks to select from");
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw DomainError("block fraction must lie in (0, 1]");
  const auto total = blocks.size();
  // absorb rounding noise such as 0.3 * 10 = 3.0000000000000004
  auto count = static_cast<std::size_t>(std::ceil(fraction * total - 1e-9));
  count = std::clamp<std::size_t>(count, 1, total);
  if (count == total) return blocks;

  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(seed, {0x626c6f636bULL});
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, total - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  order.resize(count);
  std::sort(order.begin(), order.end());
  std::vector<Block> out;
  out.reserve(count);
  for (auto idx : order) out.push_back(blocks[idx]);
  return out;
}

Lattice parse_lattice(std::string_view text) {
  std::vector<std::vector<Spin>> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) {
      if (end == text.size()) break;
      throw ParseError("blank line inside lattice", line_no);
    }
    std::istringstream in(line);
    std::vector<Spin> row;
    std::string tok;
    while (in >> tok) {
      if (tok == "1" || tok == "+1")
        row.push_back(1);
      else if (tok == "-1")
        row.push_back(-1);
      else
        throw ParseError("invalid spin '" + tok + "', expected -1 or 1", line_no);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("ragged row: expected " + std::to_string(rows.front().size()) +
                           " entries, found " + std::to_string(row.size()),
                       line_no);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("empty lattice file", 0);

  Dims d{static_cast<int>(rows.size()), static_cast<int>(rows.front().size())};
  std::vector<Spin> spins(d.size());
  for (int r = 0; r < d.rows; ++r)
    for (int c = 0; c < d.cols; ++c) spins[d.index(r, c)] = rows[r][c];
  return Lattice(d, std::move(spins));
}

std::string format_lattice(const Lattice& lat) {
  std::string out;
  out.reserve(static_cast<std::size_t>(lat.size()) * 3);
  for (int r = 0; r < lat.rows(); ++r) {
    for (int c = 0; c < lat.cols(); ++c) {
      if (c) out += ' ';
      out += lat.at(r, c) > 0 ? "1" : "-1";
    }
    out += '\n';
  }
  return out;
}

Lattice read_lattice(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open lattice file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_lattice(buf.str());
}

void write_lattice(const Lattice& lat, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write lattice file " + path.string());
  out << format_lattice(lat);
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace gibbscl
