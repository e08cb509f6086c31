#include <doctest.h>

#include <cmath>
#include <limits>

#include "gibbscl/errors.hpp"
#include "gibbscl/likelihoods.hpp"
#include "gibbscl/recursion.hpp"
#include "oracles.hpp"

using namespace gibbscl;
using doctest::Approx;

namespace {

const double kLog2 = std::log(2.0);

// log p(y_A | y_-A) by swapping every block configuration into the full
// lattice and normalising the full-lattice log q.
double block_term_oracle(ModelParams th, const Lattice& lat, const Block& b) {
  std::vector<Spin> s(lat.spins().begin(), lat.spins().end());
  std::vector<double> all;
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << b.index_set.size()); ++x) {
    for (std::size_t j = 0; j < b.index_set.size(); ++j)
      s[b.index_set[j]] = (x >> j) & 1 ? 1 : -1;
    all.push_back(oracle::log_q(th.theta0, th.theta1, Lattice(lat.dims(), s)));
  }
  return oracle::log_q(th.theta0, th.theta1, lat) - oracle::log_sum_exp(all);
}

// Full conditional written out from the neighbour list.
double pseudo_oracle(ModelParams th, const Lattice& lat) {
  double total = 0.0;
  for (int i = 0; i < lat.size(); ++i) {
    double nb = 0.0;
    for (int j : neighbors(lat.dims(), i)) nb += lat[j];
    const double up = std::exp(th.theta0 + th.theta1 * nb);
    const double down = std::exp(-th.theta0 - th.theta1 * nb);
    total += std::log((lat[i] > 0 ? up : down) / (up + down));
  }
  return total;
}

}  // namespace

TEST_CASE("unnormalised log density") {
  Rng rng = make_rng(1);
  const Lattice lat = oracle::random_lattice({5, 4}, rng);
  CHECK(log_unnormalized({0, 0}, lat) == 0.0);
  CHECK(log_unnormalized({0.1, 0.4}, Lattice::filled({2, 2}, 1)) == Approx(2.0));

  // factor decomposition from the recursion module
  const Lattice six = oracle::random_lattice({6, 6}, rng);
  const auto plan = make_plan(six.dims());
  const ModelParams th{0.25, -0.35};
  double factors = 0.0;
  for (int i = 0; i < six.size(); ++i)
    factors += log_factor(th, plan, i, six[i], plan.has_below(i) ? six[i + 1] : 0,
                          plan.has_right(i) ? six[i + 6] : 0);
  CHECK(log_unnormalized(th, six) == Approx(factors).epsilon(1e-13));
}

TEST_CASE("exact log likelihood") {
  Rng rng = make_rng(2);
  CHECK(exact_log_likelihood({0, 0}, oracle::random_lattice({3, 3}, rng)) ==
        Approx(-9 * kLog2).epsilon(1e-14));

  std::vector<double> all;
  for (std::uint64_t x = 0; x < 16; ++x)
    all.push_back(exact_log_likelihood({0.3, 0.4}, oracle::from_bits({2, 2}, x)));
  CHECK(std::abs(oracle::log_sum_exp(all)) < 1e-13);

  const Lattice big = oracle::random_lattice({16, 16}, rng);
  CHECK(std::isfinite(exact_log_likelihood({0, 0.4}, big)));
  CHECK_THROWS_AS(exact_log_likelihood({0, 0.4}, oracle::random_lattice({21, 22}, rng)),
                  UnsupportedSizeError);
}

TEST_CASE("full conditional probability") {
  Rng rng = make_rng(3);
  const Lattice lat = oracle::random_lattice({4, 4}, rng);
  for (int i = 0; i < lat.size(); ++i) CHECK(full_conditional_prob({0, 0}, lat, i) == 0.5);

  const Lattice ones = Lattice::filled({3, 3}, 1);
  const double expected = std::exp(1.6) / (std::exp(1.6) + std::exp(-1.6));
  CHECK(full_conditional_prob({0, 0.4}, ones, 4) == Approx(expected).epsilon(1e-15));
  CHECK(expected == Approx(1.0 / (1.0 + std::exp(-3.2))).epsilon(1e-15));

  for (int i = 0; i < lat.size(); ++i) {
    Lattice other = lat;
    other.set(i, static_cast<Spin>(-lat[i]));
    const ModelParams th{0.3, -0.7};
    CHECK(full_conditional_prob(th, lat, i) + full_conditional_prob(th, other, i) ==
          Approx(1.0).epsilon(1e-15));
  }
  CHECK_THROWS_AS(full_conditional_prob({0, 0}, lat, 16), DomainError);
}

TEST_CASE("pseudolikelihood") {
  Rng rng = make_rng(4);
  CHECK(log_pseudolikelihood({0, 0}, oracle::random_lattice({16, 16}, rng)) ==
        Approx(-256 * kLog2).epsilon(1e-14));
  for (int rep = 0; rep < 20; ++rep) {
    const Lattice lat = oracle::random_lattice({5, 5}, rng);
    const ModelParams th{uniform01(rng) - 0.5, 2 * uniform01(rng) - 1};
    CHECK(std::abs(log_pseudolikelihood(th, lat) - pseudo_oracle(th, lat)) < 1e-12);
  }
}

TEST_CASE("composite likelihood special cases") {
  Rng rng = make_rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const Lattice lat = oracle::random_lattice({6, 6}, rng);
    const ModelParams th{0.4 * uniform01(rng) - 0.2, 1.2 * uniform01(rng) - 0.2};
    CompositeLikelihoodSpec k1{1, 1.0, 0, {}};
    CHECK(std::abs(log_composite_likelihood(th, lat, k1) - log_pseudolikelihood(th, lat)) < 1e-12);
    CompositeLikelihoodSpec whole{6, 1.0, 0, {}};
    const double exact = exact_log_likelihood(th, lat);
    CHECK(std::abs(log_composite_likelihood(th, lat, whole) - exact) < 1e-10 * std::abs(exact));
  }
  // whole-lattice block cross-checked against enumeration
  const Lattice small = oracle::random_lattice({4, 4}, rng);
  const auto lq = oracle::all_log_q(0.1, 0.5, {4, 4});
  CHECK(log_composite_likelihood({0.1, 0.5}, small, {4, 1.0, 0, {}}) ==
        Approx(oracle::log_q(0.1, 0.5, small) - oracle::log_sum_exp(lq)).epsilon(1e-12));
}

TEST_CASE("composite likelihood terms match block enumeration") {
  Rng rng = make_rng(6);
  const Lattice lat = oracle::random_lattice({3, 3}, rng);
  for (ModelParams th : {ModelParams{0, 0.4}, ModelParams{0.3, -0.5}}) {
    const CompositeLikelihood cl(lat, {2, 1.0, 0, {}});
    const auto terms = cl.terms(th);
    REQUIRE(terms.size() == 4);
    double total = 0.0;
    for (std::size_t n = 0; n < terms.size(); ++n) {
      const double expected = block_term_oracle(th, lat, cl.blocks()[n]);
      CHECK(terms[n] == Approx(expected).epsilon(1e-12));
      CHECK(terms[n] <= 0.0);
      total += expected;
    }
    CHECK(cl(th) == Approx(total).epsilon(1e-12));
  }
  const Lattice other = oracle::random_lattice({5, 4}, rng);
  const CompositeLikelihood cl(other, {3, 1.0, 0, {}});
  const auto terms = cl.terms({0.2, 0.6});
  for (std::size_t n = 0; n < terms.size(); ++n)
    CHECK(terms[n] == Approx(block_term_oracle({0.2, 0.6}, other, cl.blocks()[n])).epsilon(1e-12));
}

TEST_CASE("composite likelihood weights") {
  Rng rng = make_rng(7);
  const Lattice lat = oracle::random_lattice({8, 8}, rng);
  const CompositeLikelihood base(lat, {3, 1.0, 0, {}});
  const std::vector<double> twos(base.block_count(), 2.0);
  const CompositeLikelihood doubled(lat, {3, 1.0, 0, twos});
  for (double t1 : {-0.3, 0.2, 0.5})
    CHECK(doubled({0, t1}) == Approx(2 * base({0, t1})).epsilon(1e-13));

  // argmax over a grid is unchanged by uniform scaling
  auto argmax = [](const CompositeLikelihood& f) {
    double best = -1e300, at = 0;
    for (double t = -0.5; t <= 1.0; t += 0.01)
      if (f({0, t}) > best) best = f({0, t}), at = t;
    return at;
  };
  CHECK(argmax(base) == argmax(doubled));

  CHECK_THROWS_AS(CompositeLikelihood(lat, {3, 1.0, 0, {1.0, 2.0}}), DomainError);
  std::vector<double> bad(base.block_count(), 1.0);
  bad[3] = 0.0;
  CHECK_THROWS_AS(CompositeLikelihood(lat, {3, 1.0, 0, bad}), DomainError);
  CHECK_THROWS_AS(CompositeLikelihood(lat, {0, 1.0, 0, {}}), DomainError);
  CHECK_THROWS_AS(CompositeLikelihood(lat, {3, 0.0, 0, {}}), DomainError);
  CHECK_THROWS_AS(CompositeLikelihood(lat, {9, 1.0, 0, {}}), DomainError);
}

TEST_CASE("block subsets follow the selection seed") {
  Rng rng = make_rng(8);
  const Lattice lat = oracle::random_lattice({16, 16}, rng);
  const CompositeLikelihood a(lat, {4, 0.4, 11, {}});
  const CompositeLikelihood b(lat, {4, 0.4, 11, {}});
  CHECK(a.block_count() == 68);
  CHECK(a({0, 0.4}) == b({0, 0.4}));
}

TEST_CASE("objectives are invariant under a global spin flip with theta0 negated") {
  Rng rng = make_rng(9);
  const Lattice lat = oracle::random_lattice({5, 6}, rng);
  const Lattice flip = lat.flipped();
  const ModelParams th{0.35, 0.45}, neg{-0.35, 0.45};
  CHECK(exact_log_likelihood(th, lat) == Approx(exact_log_likelihood(neg, flip)).epsilon(1e-13));
  CHECK(log_pseudolikelihood(th, lat) == Approx(log_pseudolikelihood(neg, flip)).epsilon(1e-13));
  for (int k : {2, 3})
    CHECK(log_composite_likelihood(th, lat, {k, 1.0, 0, {}}) ==
          Approx(log_composite_likelihood(neg, flip, {k, 1.0, 0, {}})).epsilon(1e-13));
}

TEST_CASE("log posterior") {
  Rng rng = make_rng(10);
  const Lattice lat = oracle::random_lattice({4, 4}, rng);
  const PriorSpec prior = PriorSpec::uniform(-10, 10);
  const double ninf = -std::numeric_limits<double>::infinity();
  for (Objective obj : {Objective{ExactObjective{}}, Objective{PseudoObjective{}},
                        Objective{CompositeObjective{{2, 1.0, 0, {}}}}}) {
    CHECK(log_posterior({0, 10.5}, lat, obj, prior) == ninf);
    CHECK(log_posterior({0, -10.01}, lat, obj, prior) == ninf);
    CHECK(std::isfinite(log_posterior({0, 10.0}, lat, obj, prior)));
  }
  // differences equal log-likelihood differences under a uniform prior
  const double d_post = log_posterior({0, 0.6}, lat, ExactObjective{}, prior) -
                        log_posterior({0, 0.1}, lat, ExactObjective{}, prior);
  const double d_lik = exact_log_likelihood({0, 0.6}, lat) - exact_log_likelihood({0, 0.1}, lat);
  CHECK(d_post == Approx(d_lik).epsilon(1e-12));
  CHECK(log_posterior({0, 0.3}, lat, PseudoObjective{}, prior) ==
        Approx(log_pseudolikelihood({0, 0.3}, lat) - std::log(20.0)).epsilon(1e-14));

  // argmax of the exact posterior over a grid equals the brute-force argmax
  const LogPosterior post(lat, ExactObjective{}, prior);
  double best = ninf, best_brute = ninf, at = 0, at_brute = 0;
  for (int n = 0; n <= 300; ++n) {
    const double t = -1.5 + 0.01 * n;
    const double v = post({0, t});
    const double vb = oracle::log_q(0, t, lat) - brute_force_log_partition({0, t}, 4, 4);
    if (v > best) best = v, at = t;
    if (vb > best_brute) best_brute = vb, at_brute = t;
  }
  CHECK(at == at_brute);

  PriorSpec with_theta0 = prior;
  with_theta0.theta0 = Interval{-1, 1};
  CHECK(with_theta0.log_density({2, 0}) == ninf);
  CHECK(with_theta0.log_density({0.5, 0}) == Approx(-std::log(40.0)));
  CHECK_THROWS_AS(LogPosterior(lat, PseudoObjective{}, PriorSpec::uniform(1, 1)), DomainError);
}
