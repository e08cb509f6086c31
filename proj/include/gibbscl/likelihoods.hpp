#pragma once

#include <array>
#include <optional>
#include <variant>
#include <vector>

#include "gibbscl/lattice.hpp"

namespace gibbscl {

// Conditional composite likelihood over k x k blocks. With fraction < 1 a
// seeded uniform subset of the exhaustive block set is used. Empty weights
// means w_i = 1 for every block.
struct CompositeLikelihoodSpec {
  int block_size = 1;
  double fraction = 1.0;
  Seed selection_seed = 0;
  std::vector<double> weights;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return x >= lo && x <= hi; }
};

// Independent uniform priors. theta0 has no prior when it is held fixed.
struct PriorSpec {
  Interval theta1{-10.0, 10.0};
  std::optional<Interval> theta0;

  static PriorSpec uniform(double lo, double hi) { return PriorSpec{{lo, hi}, {}}; }
  // -infinity outside the support.
  double log_density(const ModelParams& theta) const;
  void validate() const;
};

struct ExactObjective {};
struct PseudoObjective {};
struct CompositeObjective {
  CompositeLikelihoodSpec spec;
};
using Objective = std::variant<ExactObjective, PseudoObjective, CompositeObjective>;

// log q(y | theta) = theta0 * s0(y) + theta1 * s1(y)
double log_unnormalized(const ModelParams& theta, const Lattice& lat);
double log_unnormalized(const ModelParams& theta, const SufficientStats& stats);

double exact_log_likelihood(const ModelParams& theta, const Lattice& lat);

// p(y_i | y_-i, theta) at the realised y_i.
double full_conditional_prob(const ModelParams& theta, const Lattice& lat, int i);

double log_pseudolikelihood(const ModelParams& theta, const Lattice& lat);

double log_composite_likelihood(const ModelParams& theta, const Lattice& lat,
                                const CompositeLikelihoodSpec& spec);

double log_posterior(const ModelParams& theta, const Lattice& lat,
                     const Objective& objective, const PriorSpec& prior);

// Prepared objectives: theta-independent work is done once per dataset.

class ExactLikelihood {
 public:
  explicit ExactLikelihood(const Lattice& lat);
  double operator()(const ModelParams& theta) const;

 private:
  Dims dims_;
  SufficientStats stats_;
};

// Sites are grouped by (spin, neighbour sum), so evaluation is O(1) in n.
class PseudoLikelihood {
 public:
  explicit PseudoLikelihood(const Lattice& lat);
  double operator()(const ModelParams& theta) const;

 private:
  std::array<std::array<long, 9>, 2> counts_{};
};

class CompositeLikelihood {
 public:
  CompositeLikelihood(const Lattice& lat, const CompositeLikelihoodSpec& spec);

  double operator()(const ModelParams& theta) const;
  // Unweighted log p(y_{A_i} | y_{-A_i}, theta), one per block.
  std::vector<double> terms(const ModelParams& theta) const;

  std::size_t block_count() const { return blocks_.size(); }
  const std::vector<Block>& blocks() const { return selected_; }

 private:
  struct Term {
    long s0 = 0;
    long s1 = 0;  // within-block edges plus edges to the realised boundary
    std::vector<std::int8_t> field;
    double weight = 1.0;
  };
  int k_;
  std::vector<Block> selected_;
  std::vector<Term> blocks_;
};

// Log posterior with theta-independent work cached; -infinity off support.
class LogPosterior {
 public:
  LogPosterior(const Lattice& lat, const Objective& objective, PriorSpec prior);
  double operator()(const ModelParams& theta) const;

 private:
  PriorSpec prior_;
  std::variant<ExactLikelihood, PseudoLikelihood, CompositeLikelihood> likelihood_;
};

}  // namespace gibbscl
