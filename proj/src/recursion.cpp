#include "gibbscl/recursion.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gibbscl/errors.hpp"

namespace gibbscl {
namespace {

using detail::ExpTable;

constexpr double kRescaleThreshold = 500.0;

// Folds the site at `row` of the next column position into the table. Bit
// `row` of a state holds that row's most recent spin: before the call it is
// the left neighbour (summed out here), after it is the new site's spin.
void advance(std::span<double> v, int row, bool has_left, int field,
             const ExpTable& e) {
  const std::size_t half = std::size_t{1} << row;
  const std::size_t n = v.size();
  double* p = v.data();

  auto kernel = [&](std::size_t begin, std::size_t end, int t) {
    if (has_left) {
      const double c00 = e.minus[t + 3], c01 = e.minus[t + 5];
      const double c10 = e.plus[t + 3], c11 = e.plus[t + 5];
      for (std::size_t x = begin; x < end; ++x) {
        const double a = p[x], b = p[x + half];
        p[x] = a * c00 + b * c01;
        p[x + half] = a * c10 + b * c11;
      }
    } else {
      const double cm = e.minus[t + 4], cp = e.plus[t + 4];
      for (std::size_t x = begin; x < end; ++x) {
        const double a = p[x] + p[x + half];
        p[x] = a * cm;
        p[x + half] = a * cp;
      }
    }
  };

  for (std::size_t hi = 0; hi < n; hi += 2 * half) {
    if (row == 0) {
      kernel(hi, hi + 1, field);
    } else {
      // the spin above sits in bit row-1, the top bit of the low part
      const std::size_t q = half >> 1;
      kernel(hi, hi + q, field - 1);
      kernel(hi + q, hi + half, field + 1);
    }
  }
}

double rescale(std::span<double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  const double inv = 1.0 / mx;
  for (auto& x : v) x *= inv;
  return std::log(mx);
}

// Scaled forward table: true value = exp(log_offset) * v.
struct ForwardState {
  std::span<double> v;
  double log_offset = 0.0;
  double pending = 0.0;

  void reset() {
    std::fill(v.begin(), v.end(), 0.0);
    v[0] = 1.0;
    log_offset = 0.0;
    pending = 0.0;
  }

  void fold(int row, bool has_left, int field, const ExpTable& e) {
    advance(v, row, has_left, field, e);
    pending += e.log_growth;
    if (pending > kRescaleThreshold) {
      log_offset += rescale(v);
      pending = 0.0;
    }
  }

  double log_total() const {
    return log_offset + std::log(std::accumulate(v.begin(), v.end(), 0.0));
  }
};

double forward_log_sum(const ExpTable& e, int lag, int length,
                       const std::int8_t* field, std::vector<double>& buffer) {
  buffer.resize(std::size_t{1} << lag);
  ForwardState st{buffer};
  st.reset();
  int i = 0;
  for (int c = 0; c < length; ++c)
    for (int r = 0; r < lag; ++r, ++i) st.fold(r, c > 0, field ? field[i] : 0, e);
  return st.log_total();
}

std::size_t sample_index(std::span<const double> weights, Rng& rng) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  const double target = uniform01(rng) * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    acc += weights[k];
    last_positive = k;
    if (target < acc) return k;
  }
  return last_positive;
}

}  // namespace

detail::ExpTable::ExpTable(const ModelParams& theta) {
  double largest = 0.0;
  for (int t = -4; t <= 4; ++t) {
    const double u = theta.theta0 + theta.theta1 * t;
    minus[t + 4] = std::exp(-u);
    plus[t + 4] = std::exp(u);
    largest = std::max(largest, std::abs(u));
  }
  log_growth = std::log(2.0) + largest;
}

double FieldPartition::log_square(int k, std::span<const std::int8_t> field) {
  if (k < 1 || k > kMaxLag)
    throw UnsupportedSizeError("block size must lie in [1, " + std::to_string(kMaxLag) + "]");
  return forward_log_sum(exp_, k, k, field.data(), buffer_);
}

RecursionPlan make_plan(Dims dims) {
  if (dims.rows <= 0 || dims.cols <= 0)
    throw DomainError("lattice dimensions must be positive");
  RecursionPlan plan;
  plan.dims = dims;
  plan.transposed = dims.rows > dims.cols;
  plan.lag = std::min(dims.rows, dims.cols);
  plan.length = std::max(dims.rows, dims.cols);
  if (plan.lag > kMaxLag)
    throw UnsupportedSizeError("exact recursion needs min(rows, cols) <= " +
                               std::to_string(kMaxLag) + ", got " +
                               std::to_string(plan.lag));
  return plan;
}

double log_factor(const ModelParams& theta, const RecursionPlan& plan, int i,
                  Spin self, Spin below, Spin right) {
  int coupling = 0;
  if (plan.has_below(i)) coupling += below;
  if (plan.has_right(i)) coupling += right;
  return theta.theta0 * self + theta.theta1 * self * coupling;
}

double log_partition(const ModelParams& theta, int rows, int cols) {
  const RecursionPlan plan = make_plan({rows, cols});
  std::vector<double> buffer;
  // without a field the model is symmetric under transposition
  return forward_log_sum(ExpTable(theta), plan.lag, plan.length, nullptr, buffer);
}

double log_field_partition(const ModelParams& theta, Dims dims,
                           std::span<const std::int8_t> field) {
  const RecursionPlan plan = make_plan(dims);
  if (!field.empty() && static_cast<int>(field.size()) != dims.size())
    throw DomainError("field must hold one entry per site");
  std::vector<double> buffer;
  if (field.empty() || !plan.transposed)
    return forward_log_sum(ExpTable(theta), plan.lag, plan.length,
                           field.empty() ? nullptr : field.data(), buffer);
  const Dims t{dims.cols, dims.rows};
  std::vector<std::int8_t> oriented(field.size());
  for (int c = 0; c < dims.cols; ++c)
    for (int r = 0; r < dims.rows; ++r) oriented[t.index(c, r)] = field[dims.index(r, c)];
  return forward_log_sum(ExpTable(theta), plan.lag, plan.length, oriented.data(),
                         buffer);
}

std::vector<std::int8_t> block_boundary_field(const Lattice& lat, const Block& block) {
  const Dims d = lat.dims();
  const int k = block.size;
  std::vector<std::int8_t> field;
  field.reserve(block.index_set.size());
  for (int i : block.index_set) {
    const int r = d.row_of(i), c = d.col_of(i);
    int h = 0;
    if (r == block.top_row && r > 0) h += lat[i - 1];
    if (r == block.top_row + k - 1 && r + 1 < d.rows) h += lat[i + 1];
    if (c == block.left_col && c > 0) h += lat[i - d.rows];
    if (c == block.left_col + k - 1 && c + 1 < d.cols) h += lat[i + d.rows];
    field.push_back(static_cast<std::int8_t>(h));
  }
  return field;
}

double log_block_normalizer(const ModelParams& theta, const Lattice& lat,
                            const Block& block) {
  const auto field = block_boundary_field(lat, block);
  return log_field_partition(theta, {block.size, block.size}, field);
}

ExactSampler::ExactSampler(Dims dims) : plan_(make_plan(dims)) {
  const std::size_t states = plan_.state_count();
  checkpoints_.resize(states * plan_.length);
  column_.resize(states * plan_.lag);
  work_.resize(states);
  oriented_.resize(static_cast<std::size_t>(plan_.lag) * plan_.length);
}

Lattice ExactSampler::draw(const ModelParams& theta, Rng& rng) {
  const ExpTable e(theta);
  const std::size_t states = plan_.state_count();
  const int lag = plan_.lag;

  ForwardState st{work_};
  st.reset();
  for (int c = 0; c < plan_.length; ++c) {
    std::copy(work_.begin(), work_.end(), checkpoints_.begin() + c * states);
    for (int r = 0; r < lag; ++r) st.fold(r, c > 0, 0, e);
  }

  std::size_t x = sample_index(work_, rng);
  for (int c = plan_.length - 1; c >= 0; --c) {
    // column_[r] = table just before site (r, c) is folded in
    std::copy_n(checkpoints_.begin() + c * states, states, column_.begin());
    for (int r = 0; r + 1 < lag; ++r) {
      std::span<double> next(column_.data() + (r + 1) * states, states);
      std::copy_n(column_.begin() + r * states, states, next.begin());
      advance(next, r, c > 0, 0, e);
      rescale(next);
    }
    for (int r = lag - 1; r >= 0; --r) {
      const std::size_t bit = std::size_t{1} << r;
      const bool up_bit = (x & bit) != 0;
      oriented_[static_cast<std::size_t>(c) * lag + r] = up_bit ? 1 : -1;
      std::size_t left = 0;
      if (c > 0) {
        const int up = r > 0 ? (((x >> (r - 1)) & 1) ? 1 : -1) : 0;
        const auto& f = up_bit ? e.plus : e.minus;
        const double* w = column_.data() + r * states;
        const double w0 = w[x & ~bit] * f[up - 1 + 4];
        const double w1 = w[x | bit] * f[up + 1 + 4];
        left = uniform01(rng) * (w0 + w1) < w1 ? 1 : 0;
      }
      x = (x & ~bit) | (left << r);
    }
  }

  Lattice out({lag, plan_.length}, oriented_);
  return plan_.transposed ? out.transposed() : out;
}

Lattice exact_sample(const ModelParams& theta, int rows, int cols, Seed seed) {
  ExactSampler sampler({rows, cols});
  Rng rng = make_rng(seed, {0x6578616374ULL});
  return sampler.draw(theta, rng);
}

double brute_force_log_partition(const ModelParams& theta, int rows, int cols) {
  const Dims d{rows, cols};
  if (rows <= 0 || cols <= 0) throw DomainError("lattice dimensions must be positive");
  const int n = d.size();
  if (n > 20) throw UnsupportedSizeError("brute force limited to 20 sites");

  // bit i of a configuration is site i (1 -> +1); edges as bit masks
  std::uint64_t vertical = 0, horizontal = 0;
  for (int i = 0; i < n; ++i) {
    if (d.row_of(i) + 1 < rows) vertical |= std::uint64_t{1} << i;
    if (d.col_of(i) + 1 < cols) horizontal |= std::uint64_t{1} << i;
  }
  const int edges = d.edge_count();
  const std::uint64_t count = std::uint64_t{1} << n;
  auto exponent = [&](std::uint64_t x) {
    const int s0 = 2 * std::popcount(x) - n;
    const int disagree = std::popcount((x ^ (x >> 1)) & vertical) +
                         std::popcount((x ^ (x >> rows)) & horizontal);
    return theta.theta0 * s0 + theta.theta1 * (edges - 2 * disagree);
  };
  double mx = -std::numeric_limits<double>::infinity();
  for (std::uint64_t x = 0; x < count; ++x) mx = std::max(mx, exponent(x));
  double sum = 0.0;
  for (std::uint64_t x = 0; x < count; ++x) sum += std::exp(exponent(x) - mx);
  return mx + std::log(sum);
}

}  // namespace gibbscl
