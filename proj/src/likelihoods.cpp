#include "gibbscl/likelihoods.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "gibbscl/errors.hpp"
#include "gibbscl/recursion.hpp"

namespace gibbscl {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(e^u + e^-u) without overflow
double log_two_cosh(double u) {
  const double a = std::abs(u);
  return a + std::log1p(std::exp(-2.0 * a));
}

}  // namespace

double PriorSpec::log_density(const ModelParams& theta) const {
  if (!theta1.contains(theta.theta1)) return kNegInf;
  double out = -std::log(theta1.hi - theta1.lo);
  if (theta0) {
    if (!theta0->contains(theta.theta0)) return kNegInf;
    out -= std::log(theta0->hi - theta0->lo);
  }
  return out;
}

void PriorSpec::validate() const {
  if (!(theta1.lo < theta1.hi)) throw DomainError("prior needs lo < hi");
  if (theta0 && !(theta0->lo < theta0->hi)) throw DomainError("prior needs lo < hi");
}

double log_unnormalized(const ModelParams& theta, const SufficientStats& stats) {
  return theta.theta0 * static_cast<double>(stats.s0) +
         theta.theta1 * static_cast<double>(stats.s1);
}

double log_unnormalized(const ModelParams& theta, const Lattice& lat) {
  return log_unnormalized(theta, sufficient_statistics(lat));
}

double exact_log_likelihood(const ModelParams& theta, const Lattice& lat) {
  return ExactLikelihood(lat)(theta);
}

double full_conditional_prob(const ModelParams& theta, const Lattice& lat, int i) {
  if (i < 0 || i >= lat.size()) throw DomainError("site index out of range");
  const double u = theta.theta0 + theta.theta1 * lat.neighbor_sum(i);
  return std::exp(lat[i] * u - log_two_cosh(u));
}

double log_pseudolikelihood(const ModelParams& theta, const Lattice& lat) {
  return PseudoLikelihood(lat)(theta);
}

double log_composite_likelihood(const ModelParams& theta, const Lattice& lat,
                                const CompositeLikelihoodSpec& spec) {
  return CompositeLikelihood(lat, spec)(theta);
}

double log_posterior(const ModelParams& theta, const Lattice& lat,
                     const Objective& objective, const PriorSpec& prior) {
  const double lp = prior.log_density(theta);
  if (lp == kNegInf) return kNegInf;
  return LogPosterior(lat, objective, prior)(theta);
}

ExactLikelihood::ExactLikelihood(const Lattice& lat)
    : dims_(lat.dims()), stats_(sufficient_statistics(lat)) {
  make_plan(dims_);  // reject oversized lattices up front
}

double ExactLikelihood::operator()(const ModelParams& theta) const {
  return log_unnormalized(theta, stats_) - log_partition(theta, dims_.rows, dims_.cols);
}

PseudoLikelihood::PseudoLikelihood(const Lattice& lat) {
  for (int i = 0; i < lat.size(); ++i)
    ++counts_[lat[i] > 0 ? 1 : 0][lat.neighbor_sum(i) + 4];
}

double PseudoLikelihood::operator()(const ModelParams& theta) const {
  double out = 0.0;
  for (int t = -4; t <= 4; ++t) {
    const long down = counts_[0][t + 4], up = counts_[1][t + 4];
    if (down == 0 && up == 0) continue;
    const double u = theta.theta0 + theta.theta1 * t;
    const double norm = log_two_cosh(u);
    out += static_cast<double>(up) * (u - norm) + static_cast<double>(down) * (-u - norm);
  }
  return out;
}

CompositeLikelihood::CompositeLikelihood(const Lattice& lat,
                                         const CompositeLikelihoodSpec& spec)
    : k_(spec.block_size) {
  if (spec.block_size < 1) throw DomainError("block size must be positive");
  if (spec.block_size > kMaxLag)
    throw UnsupportedSizeError("block size exceeds the recursion lag cap");
  selected_ = select_blocks(enumerate_blocks(lat.dims(), spec.block_size),
                            spec.fraction, spec.selection_seed);
  if (!spec.weights.empty() && spec.weights.size() != selected_.size())
    throw DomainError("weights must match the number of selected blocks (" +
                      std::to_string(selected_.size()) + ")");

  const Dims d = lat.dims();
  blocks_.reserve(selected_.size());
  for (std::size_t b = 0; b < selected_.size(); ++b) {
    const Block& block = selected_[b];
    Term term;
    term.field = block_boundary_field(lat, block);
    for (std::size_t j = 0; j < block.index_set.size(); ++j) {
      const int i = block.index_set[j];
      const int r = d.row_of(i) - block.top_row;
      const int c = d.col_of(i) - block.left_col;
      term.s0 += lat[i];
      term.s1 += lat[i] * term.field[j];
      if (r + 1 < k_) term.s1 += lat[i] * lat[i + 1];
      if (c + 1 < k_) term.s1 += lat[i] * lat[i + d.rows];
    }
    if (!spec.weights.empty()) {
      term.weight = spec.weights[b];
      if (!(term.weight > 0.0) || !std::isfinite(term.weight))
        throw DomainError("composite likelihood weights must be positive");
    }
    blocks_.push_back(std::move(term));
  }
}

std::vector<double> CompositeLikelihood::terms(const ModelParams& theta) const {
  FieldPartition partition(theta);
  std::vector<double> out;
  out.reserve(blocks_.size());
  for (const auto& t : blocks_)
    out.push_back(theta.theta0 * t.s0 + theta.theta1 * t.s1 -
                  partition.log_square(k_, t.field));
  return out;
}

double CompositeLikelihood::operator()(const ModelParams& theta) const {
  FieldPartition partition(theta);
  double out = 0.0;
  for (const auto& t : blocks_)
    out += t.weight * (theta.theta0 * t.s0 + theta.theta1 * t.s1 -
                       partition.log_square(k_, t.field));
  return out;
}

namespace {

std::variant<ExactLikelihood, PseudoLikelihood, CompositeLikelihood> prepare(
    const Lattice& lat, const Objective& objective) {
  using Result = std::variant<ExactLikelihood, PseudoLikelihood, CompositeLikelihood>;
  if (std::holds_alternative<ExactObjective>(objective)) return Result{ExactLikelihood(lat)};
  if (std::holds_alternative<PseudoObjective>(objective)) return Result{PseudoLikelihood(lat)};
  return Result{CompositeLikelihood(lat, std::get<CompositeObjective>(objective).spec)};
}

}  // namespace

LogPosterior::LogPosterior(const Lattice& lat, const Objective& objective, PriorSpec prior)
    : prior_(prior), likelihood_(prepare(lat, objective)) {
  prior_.validate();
}

double LogPosterior::operator()(const ModelParams& theta) const {
  const double lp = prior_.log_density(theta);
  if (lp == kNegInf) return kNegInf;
  return lp + std::visit([&](const auto& f) { return f(theta); }, likelihood_);
}

}  // namespace gibbscl
