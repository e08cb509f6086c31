// End-to-end acceptance checks. One PASS/FAIL line per criterion; exit status
// is the number of failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <fmt/core.h>

#include "gibbscl/harness.hpp"
#include "gibbscl/likelihoods.hpp"
#include "gibbscl/recursion.hpp"
#include "gibbscl/samplers.hpp"
#include "oracles.hpp"

using namespace gibbscl;
namespace fs = std::filesystem;

namespace {

// Tolerances.
constexpr double kPartitionRelTol = 1e-10;
constexpr double kPseudoAbsTol = 1e-12;
constexpr double kExactRelTol = 1e-10;
constexpr double kChiSquare63At99 = 92.010;
constexpr double kMcseMultiple = 3.0;
constexpr double kVarianceRelTol = 0.25;
constexpr double kCcl3VarianceFactor = 3.0;
constexpr double kPseudoVarianceFactor = 3.0;
constexpr double kTimingFactor = 2.0;
constexpr int kDatasets = 20;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int n, const std::string& title, const Outcome& o, double seconds) {
  fmt::print("{} criterion {}: {} [{}] ({:.1f} s)\n", o.pass ? "PASS" : "FAIL", n, title,
             o.detail, seconds);
  std::cout.flush();
  if (!o.pass) ++failures;
}

template <class F>
void run(int n, const std::string& title, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(n, title, o, secs);
}

fs::path workdir() {
  const fs::path dir = fs::temp_directory_path() / "gibbscl_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Outcome partition_vs_enumeration() {
  double worst = 0.0;
  int cases = 0;
  for (int rows = 1; rows <= 16; ++rows)
    for (int cols = 1; rows * cols <= 16; ++cols)
      for (double t1 : {-0.8, -0.4, 0.0, 0.4, 0.8})
        for (double t0 : {0.0, 0.3}) {
          const double want = oracle::log_sum_exp(oracle::all_log_q(t0, t1, {rows, cols}));
          const double got = log_partition({t0, t1}, rows, cols);
          worst = std::max(worst, std::abs(got - want) / std::abs(want));
          ++cases;
        }
  return {worst < kPartitionRelTol, fmt::format("{} cases, max rel err {:.2e}", cases, worst)};
}

double oracle_log_pseudolikelihood(double t0, double t1, const Lattice& lat) {
  const Dims d = lat.dims();
  double total = 0.0;
  for (int r = 0; r < d.rows; ++r)
    for (int c = 0; c < d.cols; ++c) {
      int sum = 0;
      if (r > 0) sum += lat.at(r - 1, c);
      if (r + 1 < d.rows) sum += lat.at(r + 1, c);
      if (c > 0) sum += lat.at(r, c - 1);
      if (c + 1 < d.cols) sum += lat.at(r, c + 1);
      const double eta = t0 + t1 * sum;
      total += lat.at(r, c) * eta - std::log(std::exp(eta) + std::exp(-eta));
    }
  return total;
}

Outcome composite_special_cases() {
  Rng rng = make_rng(2024, {2});
  double worst_pl = 0.0, worst_pl_oracle = 0.0, worst_exact = 0.0;
  for (int n = 0; n < 100; ++n) {
    const Lattice lat = oracle::random_lattice({6, 6}, rng);
    const double t0 = n % 2 ? 0.3 : 0.0;
    const double t1 = -0.8 + 1.6 * uniform01(rng);
    const ModelParams th{t0, t1};
    const double cl1 = log_composite_likelihood(th, lat, {1, 1.0, 0, {}});
    worst_pl = std::max(worst_pl, std::abs(cl1 - log_pseudolikelihood(th, lat)));
    worst_pl_oracle =
        std::max(worst_pl_oracle, std::abs(cl1 - oracle_log_pseudolikelihood(t0, t1, lat)));
    const double whole = log_composite_likelihood(th, lat, {6, 1.0, 0, {}});
    const double exact = exact_log_likelihood(th, lat);
    worst_exact = std::max(worst_exact, std::abs(whole - exact) / std::abs(exact));
  }
  const bool ok = worst_pl <= kPseudoAbsTol && worst_pl_oracle <= 1e-10 &&
                  worst_exact <= kExactRelTol;
  return {ok, fmt::format("k=1 vs pseudo abs {:.2e} (vs direct sum {:.2e}), whole block rel {:.2e}",
                          worst_pl, worst_pl_oracle, worst_exact)};
}

Outcome exact_sampler_goodness_of_fit() {
  const Dims d{2, 3};
  const auto lq = oracle::all_log_q(0.0, 0.4, d);
  const double lz = oracle::log_sum_exp(lq);
  constexpr int kDraws = 100000;
  std::vector<long> counts(lq.size(), 0);
  ExactSampler sampler(d);
  Rng rng = make_rng(77, {3});
  for (int n = 0; n < kDraws; ++n) ++counts[oracle::to_bits(sampler.draw({0.0, 0.4}, rng))];
  double chi2 = 0.0, min_expected = 1e300;
  for (std::size_t x = 0; x < lq.size(); ++x) {
    const double e = kDraws * std::exp(lq[x] - lz);
    min_expected = std::min(min_expected, e);
    chi2 += (counts[x] - e) * (counts[x] - e) / e;
  }
  return {chi2 < kChiSquare63At99,
          fmt::format("chi2 {:.2f} on 63 df, critical {:.3f}, min expected {:.0f}", chi2,
                      kChiSquare63At99, min_expected)};
}

Outcome sampler_cross_validation() {
  const Dims d{8, 8};
  const Lattice lat = exact_sample({0.0, 0.4}, d.rows, d.cols, 808);
  const PriorSpec prior{};
  const GridPosterior grid = grid_posterior(lat, prior, GridSpec{-1.5, 2.5, 0.002});
  const double gm = grid.mean(), gv = grid.variance();

  McmcConfig cfg;
  cfg.iterations = 60000;
  cfg.burn_in = 5000;
  cfg.proposal_sd = 0.05;
  cfg.auto_tune = true;
  cfg.seed = 4040;
  const auto target = [&](double t1) {
    const ModelParams th{0.0, t1};
    const double lp = prior.log_density(th);
    return std::isfinite(lp) ? exact_log_likelihood(th, lat) + lp : lp;
  };
  const ChainResult mh = metropolis(target, 0.4, cfg);
  cfg.seed = 4041;
  const ChainResult ex = exchange(lat, prior, cfg, ExactDraw{}, 0.0, 0.4);

  auto check = [&](const ChainResult& c) {
    return std::abs(c.posterior_mean - gm) <= kMcseMultiple * c.mc_standard_error &&
           std::abs(c.posterior_variance - gv) <= kVarianceRelTol * gv;
  };
  return {check(mh) && check(ex),
          fmt::format("grid mean {:.4f} var {:.3e}; metropolis {:.4f} (mcse {:.1e}) var {:.3e}; "
                      "exchange {:.4f} (mcse {:.1e}) var {:.3e}",
                      gm, gv, mh.posterior_mean, mh.mc_standard_error, mh.posterior_variance,
                      ex.posterior_mean, ex.mc_standard_error, ex.posterior_variance)};
}

struct Fits {
  std::map<std::string, EstimatorReport> reports;
  fs::path summary;
};

Fits run_16x16(const fs::path& root) {
  ExperimentConfig cfg;
  cfg.dims = {16, 16};
  cfg.theta1 = 0.4;
  cfg.datasets = kDatasets;
  cfg.iterations = 5000;
  cfg.burn_in = 1000;
  cfg.seed = 11;
  cfg.out = root / "fit16";
  cmd_simulate(cfg);
  const auto rows = cmd_fit(cfg);
  Fits f;
  f.summary = cfg.out / "summary.csv";
  for (auto& r : summarize(rows)) f.reports[r.estimator] = r;
  return f;
}

Outcome variance_ordering(const Fits& f) {
  const double exact = f.reports.at("exact").mean_post_var;
  const double ccl3 = f.reports.at("ccl3").mean_post_var;
  const double pseudo = f.reports.at("pseudo").mean_post_var;
  const bool ok = exact / ccl3 >= kCcl3VarianceFactor && pseudo / exact <= kPseudoVarianceFactor &&
                  exact / pseudo <= kPseudoVarianceFactor;
  std::string detail = fmt::format("{} datasets; avg var", kDatasets);
  for (const auto& [label, r] : f.reports) detail += fmt::format(" {} {:.2e}", label, r.mean_post_var);
  detail += fmt::format("; exact/ccl3 {:.2f}, pseudo/exact {:.2f}", exact / ccl3, pseudo / exact);
  return {ok, detail};
}

Outcome bias_spread(const Fits& f) {
  const auto iqr = [&](const std::string& label) {
    const auto& b = f.reports.at(label).bias;
    return b.q3 - b.q1;
  };
  const double pseudo = iqr("pseudo");
  bool ok = true;
  std::string detail = fmt::format("{} datasets; bias IQR pseudo {:.4f}", kDatasets, pseudo);
  for (const std::string label : {"ccl3", "ccl4@0.4", "ccl5@0.2", "ccl6@0.1"}) {
    const double v = iqr(label);
    detail += fmt::format(", {} {:.4f}", label, v);
    if (v > pseudo) ok = false;
  }
  return {ok, detail};
}

Outcome large_lattice(const fs::path& root) {
  ExperimentConfig cfg;
  cfg.dims = {50, 50};
  cfg.theta1 = 0.4;
  cfg.datasets = 1;
  cfg.method = "gibbs";
  cfg.sweeps = 10000;
  cfg.seed = 50;
  cfg.estimators = "ccl3,ccl4@0.4,ccl5@0.2,ccl6@0.1";
  cfg.out = root / "fit50";
  const auto paths = cmd_simulate(cfg);
  const auto rows = cmd_fit(cfg);
  bool finite = rows.size() == 4;
  std::string detail;
  for (const auto& r : rows) {
    finite = finite && std::isfinite(r.post_mean) && std::isfinite(r.post_var) && r.post_var > 0 &&
             std::isfinite(r.accept_rate);
    detail += fmt::format("{} mean {:.4f} var {:.2e}; ", r.estimator, r.post_mean, r.post_var);
  }
  cfg.bench_iterations = 300;
  const auto timing = cmd_benchmark(cfg, paths.front());
  double lo = 1e300, hi = 0.0;
  for (const auto& t : timing) {
    lo = std::min(lo, t.median_sec_per_iter);
    hi = std::max(hi, t.median_sec_per_iter);
    detail += fmt::format("{} {:.2e} s/iter; ", t.estimator, t.median_sec_per_iter);
  }
  detail += fmt::format("max/min {:.2f}", hi / lo);
  return {finite && timing.size() == 4 && hi / lo <= kTimingFactor, detail};
}

Outcome determinism(const fs::path& root, const Fits& first) {
  ExperimentConfig cfg;
  cfg.dims = {16, 16};
  cfg.theta1 = 0.4;
  cfg.datasets = kDatasets;
  cfg.iterations = 5000;
  cfg.burn_in = 1000;
  cfg.seed = 11;
  cfg.data = root / "fit16";
  cfg.out = root / "fit16_again";
  cfg.workers = 1;
  cmd_fit(cfg);
  const std::string a = slurp(first.summary);
  const std::string b = slurp(cfg.out / "summary.csv");
  return {!a.empty() && a == b,
          fmt::format("{} bytes, {}", a.size(), a == b ? "identical" : "different")};
}

}  // namespace

int main() {
  const fs::path root = workdir();
  run(1, "recursion log partition matches enumeration for n <= 16", partition_vs_enumeration);
  run(2, "composite likelihood special cases on 100 random 6x6 lattices",
      composite_special_cases);
  run(3, "exact sampler goodness of fit on 2x3", exact_sampler_goodness_of_fit);
  run(4, "metropolis and exchange agree with the grid posterior on 8x8",
      sampler_cross_validation);

  Fits fits;
  bool have_fits = false;
  run(5, "posterior variance ordering on 16x16", [&] {
    fits = run_16x16(root);
    have_fits = true;
    return variance_ordering(fits);
  });
  run(6, "bias spread of composite estimators vs pseudolikelihood", [&] {
    if (!have_fits) return Outcome{false, "16x16 fits unavailable"};
    return bias_spread(fits);
  });
  run(7, "50x50 composite fits are finite and similarly priced", [&] { return large_lattice(root); });
  run(8, "repeated fits are byte-identical", [&] {
    if (!have_fits) return Outcome{false, "16x16 fits unavailable"};
    return determinism(root, fits);
  });

  fmt::print("{} of 8 criteria failed\n", failures);
  return failures;
}
