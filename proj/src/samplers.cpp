#include "gibbscl/samplers.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "gibbscl/errors.hpp"
#include "gibbscl/parallel.hpp"
#include "gibbscl/recursion.hpp"

namespace gibbscl {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

// Drives a one-dimensional random walk. `accept(current, proposal, rng)`
// decides each move and keeps whatever cache it needs in sync.
template <class Accept>
ChainResult random_walk(double init, int iterations, int burn_in, int thin, double sd,
                        Rng& rng, Accept&& accept) {
  ChainResult out;
  out.proposal_sd = sd;
  std::normal_distribution<double> step(0.0, sd);
  double state = init;
  long accepted = 0;
  out.samples.reserve(static_cast<std::size_t>((iterations - burn_in) / thin + 1));
  const auto start = Clock::now();
  for (int t = 0; t < iterations; ++t) {
    const double proposal = state + step(rng);
    if (accept(state, proposal, rng)) {
      state = proposal;
      ++accepted;
    }
    if (t >= burn_in && (t - burn_in) % thin == 0) out.samples.push_back(state);
  }
  const std::chrono::duration<double> elapsed = Clock::now() - start;
  out.wall_time_per_iteration = iterations ? elapsed.count() / iterations : 0.0;
  out.acceptance_rate = iterations ? static_cast<double>(accepted) / iterations : 0.0;
  out.posterior_mean = sample_mean(out.samples);
  out.posterior_variance = sample_variance(out.samples);
  out.mc_standard_error = batch_means_standard_error(out.samples);
  return out;
}

// Pilot rounds from `state`; returns the tuned sd and leaves `state` at the
// end of the last pilot round.
template <class Accept>
double tune_proposal(double& state, double sd, Rng& rng, Accept& accept) {
  constexpr int kRoundLength = 200;
  constexpr int kMaxRounds = 25;
  for (int round = 0; round < kMaxRounds; ++round) {
    const ChainResult pilot = random_walk(state, kRoundLength, 0, 1, sd, rng, accept);
    state = pilot.samples.back();
    if (pilot.acceptance_rate < 0.2)
      sd *= 0.5;
    else if (pilot.acceptance_rate > 0.5)
      sd *= 2.0;
    else
      break;
  }
  return sd;
}

template <class Accept>
ChainResult run_chain(double init, const McmcConfig& cfg, Rng& rng, Accept&& accept) {
  double state = init;
  double sd = cfg.proposal_sd;
  if (cfg.auto_tune) sd = tune_proposal(state, sd, rng, accept);
  return random_walk(state, cfg.iterations, cfg.burn_in, cfg.thin, sd, rng, accept);
}

// Trapezoid weights for a strictly increasing grid.
std::vector<double> trapezoid_weights(const std::vector<double>& grid) {
  std::vector<double> w(grid.size(), 0.0);
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double h = 0.5 * (grid[k + 1] - grid[k]);
    w[k] += h;
    w[k + 1] += h;
  }
  return w;
}

}  // namespace

void McmcConfig::validate() const {
  if (iterations < 1) throw DomainError("iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations)
    throw DomainError("burn-in must lie in [0, iterations)");
  if (!(proposal_sd > 0.0)) throw DomainError("proposal sd must be positive");
  if (thin < 1) throw DomainError("thinning must be positive");
}

double sample_mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = sample_mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

double batch_means_standard_error(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  const auto batches = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  if (batches < 2) return std::sqrt(sample_variance(xs) / static_cast<double>(n));
  const std::size_t len = n / batches;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) means[b] = sample_mean(xs.subspan(b * len, len));
  return std::sqrt(sample_variance(means) / static_cast<double>(batches));
}

void gibbs_sweep_inplace(const ModelParams& theta, Lattice& lat, Rng& rng) {
  // P(y_i = +1 | neighbour sum t) = 1 / (1 + exp(-2u)), u = theta0 + theta1 t
  std::array<double, 9> p_up{};
  for (int t = -4; t <= 4; ++t)
    p_up[t + 4] = 1.0 / (1.0 + std::exp(-2.0 * (theta.theta0 + theta.theta1 * t)));
  const Dims d = lat.dims();
  for (int r = 0; r < d.rows; ++r) {
    for (int c = 0; c < d.cols; ++c) {
      const int i = d.index(r, c);
      lat.set(i, uniform01(rng) < p_up[lat.neighbor_sum(i) + 4] ? 1 : -1);
    }
  }
}

Lattice gibbs_sweep(const ModelParams& theta, Lattice lat, Rng& rng) {
  gibbs_sweep_inplace(theta, lat, rng);
  return lat;
}

Lattice gibbs_sweep(const ModelParams& theta, Lattice lat, Seed seed) {
  Rng rng = make_rng(seed, {0x6769626273ULL});
  gibbs_sweep_inplace(theta, lat, rng);
  return lat;
}

Lattice random_lattice(Dims dims, Rng& rng) {
  std::vector<Spin> spins(static_cast<std::size_t>(dims.size()));
  for (auto& s : spins) s = uniform01(rng) < 0.5 ? -1 : 1;
  return Lattice(dims, std::move(spins));
}

Lattice simulate_dataset(const ModelParams& theta, Dims dims,
                         const SimulationMethod& method, Seed seed, int index) {
  Rng rng = make_rng(seed, {0x73696dULL, static_cast<std::uint64_t>(index)});
  if (std::holds_alternative<ExactDraw>(method)) {
    ExactSampler sampler(dims);
    return sampler.draw(theta, rng);
  }
  const int sweeps = std::get<GibbsDraw>(method).sweeps;
  if (sweeps < 0) throw DomainError("sweep count must be non-negative");
  Lattice lat = random_lattice(dims, rng);
  for (int s = 0; s < sweeps; ++s) gibbs_sweep_inplace(theta, lat, rng);
  return lat;
}

std::vector<Lattice> simulate_datasets(const ModelParams& theta, Dims dims, int count,
                                       const SimulationMethod& method, Seed seed,
                                       int workers) {
  if (count < 0) throw DomainError("dataset count must be non-negative");
  if (std::holds_alternative<ExactDraw>(method)) make_plan(dims);
  std::vector<Lattice> out(static_cast<std::size_t>(count));
  parallel_for(out.size(), workers, [&](std::size_t k) {
    out[k] = simulate_dataset(theta, dims, method, seed, static_cast<int>(k));
  });
  return out;
}

ChainResult metropolis(const std::function<double(double)>& log_target, double init,
                       const McmcConfig& cfg) {
  cfg.validate();
  double current = log_target(init);
  if (!(current > kNegInf) || std::isnan(current))
    throw InitializationError("log target is not finite at the initial value " +
                              std::to_string(init));
  Rng rng = make_rng(cfg.seed, {0x6d6574726fULL});
  auto accept = [&](double, double proposal, Rng& g) {
    const double next = log_target(proposal);
    if (!(next > kNegInf)) return false;
    if (next >= current || std::log(uniform01(g)) < next - current) {
      current = next;
      return true;
    }
    return false;
  };
  return run_chain(init, cfg, rng, accept);
}

double exchange_log_acceptance(const UnnormalizedLogDensity& log_q,
                               const ModelParams& current, const ModelParams& proposed,
                               const Lattice& data, const Lattice& aux,
                               const PriorSpec& prior) {
  const double lp_new = prior.log_density(proposed);
  if (lp_new == kNegInf) return kNegInf;
  // paired differences so that proposed == current gives exactly 0
  return (log_q(proposed, data) - log_q(current, data)) +
         (log_q(current, aux) - log_q(proposed, aux)) + (lp_new - prior.log_density(current));
}

ChainResult exchange(const Lattice& lat, const PriorSpec& prior, const McmcConfig& cfg,
                     const SimulationMethod& inner, double theta0, double init) {
  cfg.validate();
  prior.validate();
  if (prior.log_density({theta0, init}) == kNegInf)
    throw InitializationError("initial value lies outside the prior support");

  std::optional<ExactSampler> exact;
  int sweeps = 0;
  if (std::holds_alternative<ExactDraw>(inner))
    exact.emplace(lat.dims());
  else
    sweeps = std::get<GibbsDraw>(inner).sweeps;
  if (!exact && sweeps < 1) throw DomainError("Gibbs inner sampler needs >= 1 sweep");

  const UnnormalizedLogDensity log_q = [](const ModelParams& t, const Lattice& y) {
    return log_unnormalized(t, y);
  };
  Rng rng = make_rng(cfg.seed, {0x65786368ULL});
  auto accept = [&](double state, double proposal, Rng& g) {
    const ModelParams cur{theta0, state}, prop{theta0, proposal};
    if (prior.log_density(prop) == kNegInf) return false;
    Lattice aux;
    if (exact) {
      aux = exact->draw(prop, g);
    } else {
      aux = lat;
      for (int s = 0; s < sweeps; ++s) gibbs_sweep_inplace(prop, aux, g);
    }
    const double log_ratio = exchange_log_acceptance(log_q, cur, prop, lat, aux, prior);
    return log_ratio >= 0.0 || std::log(uniform01(g)) < log_ratio;
  };
  return run_chain(init, cfg, rng, accept);
}

std::vector<double> GridSpec::points() const {
  if (!(step > 0.0) || !(hi > lo)) throw DomainError("grid needs lo < hi and step > 0");
  const auto n = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = lo + static_cast<double>(k) * step;
  return out;
}

double GridPosterior::mean() const {
  const auto w = trapezoid_weights(grid);
  double m = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) m += w[k] * grid[k] * normalized_density[k];
  return m;
}

double GridPosterior::variance() const {
  const auto w = trapezoid_weights(grid);
  const double m = mean();
  double v = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k)
    v += w[k] * (grid[k] - m) * (grid[k] - m) * normalized_density[k];
  return v;
}

double GridPosterior::mode() const {
  const auto it = std::max_element(log_unnormalized.begin(), log_unnormalized.end());
  return grid[static_cast<std::size_t>(it - log_unnormalized.begin())];
}

std::vector<double> grid_log_partitions(Dims dims, const std::vector<double>& grid,
                                        double theta0, int workers) {
  make_plan(dims);
  std::vector<double> out(grid.size());
  parallel_for(grid.size(), workers, [&](std::size_t k) {
    out[k] = log_partition({theta0, grid[k]}, dims.rows, dims.cols);
  });
  return out;
}

GridPosterior grid_posterior(const Lattice& lat, const PriorSpec& prior,
                             const GridSpec& spec, double theta0) {
  const auto grid = spec.points();
  const auto log_z = grid_log_partitions(lat.dims(), grid, theta0);
  return grid_posterior(lat, prior, grid, log_z, theta0);
}

GridPosterior grid_posterior(const Lattice& lat, const PriorSpec& prior,
                             const std::vector<double>& grid,
                             std::span<const double> log_partitions, double theta0) {
  if (grid.size() < 2) throw DomainError("grid needs at least two points");
  if (log_partitions.size() != grid.size())
    throw DomainError("one log partition value per grid point is required");
  for (std::size_t k = 0; k + 1 < grid.size(); ++k)
    if (!(grid[k + 1] > grid[k])) throw DomainError("grid must be strictly increasing");
  make_plan(lat.dims());

  const SufficientStats stats = sufficient_statistics(lat);
  GridPosterior out;
  out.grid = grid;
  out.log_unnormalized.resize(grid.size());
  double mx = kNegInf;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const ModelParams theta{theta0, grid[k]};
    out.log_unnormalized[k] =
        log_unnormalized(theta, stats) - log_partitions[k] + prior.log_density(theta);
    mx = std::max(mx, out.log_unnormalized[k]);
  }
  if (mx == kNegInf) throw DomainError("grid lies outside the prior support");

  const auto w = trapezoid_weights(grid);
  double sum = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k)
    sum += w[k] * std::exp(out.log_unnormalized[k] - mx);
  out.log_evidence = mx + std::log(sum);
  out.normalized_density.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k)
    out.normalized_density[k] = std::exp(out.log_unnormalized[k] - out.log_evidence);
  return out;
}

}  // namespace gibbscl
