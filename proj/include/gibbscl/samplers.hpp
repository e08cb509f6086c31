#pragma once

#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "gibbscl/lattice.hpp"
#include "gibbscl/likelihoods.hpp"
#include "gibbscl/random.hpp"

namespace gibbscl {

struct McmcConfig {
  int iterations = 5000;
  int burn_in = 1000;
  double proposal_sd = 0.05;
  Seed seed = 0;
  int thin = 1;
  // Pilot runs before the chain that rescale proposal_sd until the pilot
  // acceptance rate lands in [0.2, 0.5].
  bool auto_tune = false;

  void validate() const;
};

struct ChainResult {
  std::vector<double> samples;  // theta1 after burn-in, thinned
  double acceptance_rate = 0.0;
  double posterior_mean = 0.0;
  double posterior_variance = 0.0;
  double mc_standard_error = 0.0;  // batch means
  double wall_time_per_iteration = 0.0;
  double proposal_sd = 0.0;  // after tuning
};

double sample_mean(std::span<const double> xs);
// Unbiased (n - 1) sample variance.
double sample_variance(std::span<const double> xs);
// Standard error of the mean from floor(sqrt(n)) non-overlapping batches.
double batch_means_standard_error(std::span<const double> xs);

struct ExactDraw {};
struct GibbsDraw {
  int sweeps = 1;
};
using SimulationMethod = std::variant<ExactDraw, GibbsDraw>;

// One systematic sweep in raster order (row by row, left to right), each site
// drawn from its full conditional.
void gibbs_sweep_inplace(const ModelParams& theta, Lattice& lat, Rng& rng);
Lattice gibbs_sweep(const ModelParams& theta, Lattice lat, Rng& rng);
Lattice gibbs_sweep(const ModelParams& theta, Lattice lat, Seed seed);

Lattice random_lattice(Dims dims, Rng& rng);

// Dataset `index` of a simulation run; depends only on (theta, dims, method,
// seed, index).
Lattice simulate_dataset(const ModelParams& theta, Dims dims,
                         const SimulationMethod& method, Seed seed, int index);
std::vector<Lattice> simulate_datasets(const ModelParams& theta, Dims dims, int count,
                                       const SimulationMethod& method, Seed seed,
                                       int workers = 1);

// Random-walk Metropolis on theta1. The objective returns a log density
// (possibly -infinity).
ChainResult metropolis(const std::function<double(double)>& log_target, double init,
                       const McmcConfig& cfg);

using UnnormalizedLogDensity = std::function<double(const ModelParams&, const Lattice&)>;

// log of the exchange acceptance ratio for moving current -> proposed given
// an auxiliary draw `aux` from f(. | proposed):
//   log q(y|θ') + log q(y'|θ) - log q(y|θ) - log q(y'|θ') + log p(θ') - log p(θ)
double exchange_log_acceptance(const UnnormalizedLogDensity& log_q,
                               const ModelParams& current, const ModelParams& proposed,
                               const Lattice& data, const Lattice& aux,
                               const PriorSpec& prior);

// Exchange algorithm on theta1 with theta0 held fixed. The Gibbs inner
// sampler starts each auxiliary draw from the observed data.
ChainResult exchange(const Lattice& lat, const PriorSpec& prior, const McmcConfig& cfg,
                     const SimulationMethod& inner, double theta0 = 0.0,
                     double init = 0.0);

struct GridSpec {
  double lo = 0.0;
  double hi = 1.0;
  double step = 0.005;

  std::vector<double> points() const;
};

struct GridPosterior {
  std::vector<double> grid;
  std::vector<double> log_unnormalized;  // log q - log z + log prior
  std::vector<double> normalized_density;
  double log_evidence = 0.0;

  // Trapezoid moments of the normalised density.
  double mean() const;
  double variance() const;
  double mode() const;
};

// log z(theta0, t) for every grid point t; depends only on the lattice shape.
std::vector<double> grid_log_partitions(Dims dims, const std::vector<double>& grid,
                                        double theta0 = 0.0, int workers = 1);

GridPosterior grid_posterior(const Lattice& lat, const PriorSpec& prior,
                             const GridSpec& spec, double theta0 = 0.0);
// Same, with log z supplied per grid point.
GridPosterior grid_posterior(const Lattice& lat, const PriorSpec& prior,
                             const std::vector<double>& grid,
                             std::span<const double> log_partitions,
                             double theta0 = 0.0);

}  // namespace gibbscl
