#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gibbscl/lattice.hpp"
#include "gibbscl/samplers.hpp"

namespace gibbscl {

struct EstimatorSpec {
  enum class Kind { Pseudo, Composite, Exact, Exchange };
  Kind kind = Kind::Pseudo;
  int block_size = 0;     // Composite only
  double fraction = 1.0;  // Composite only

  // "pseudo", "ccl3", "ccl4@0.4", "exact", "exchange"
  std::string label() const;
};

// Parses one estimator token, e.g. "ccl5@0.2". Throws ConfigError.
EstimatorSpec parse_estimator(const std::string& token);
// Comma-separated list. "default" expands to the default set for `dims`.
std::vector<EstimatorSpec> parse_estimators(const std::string& list, Dims dims);
// pseudo, ccl3, ccl4@0.4, ccl5@0.2, ccl6@0.1 and the ground truth: exact
// grid when the lag allows it, otherwise the exchange algorithm.
std::vector<EstimatorSpec> default_estimators(Dims dims);

struct ExperimentConfig {
  Dims dims{16, 16};
  double theta0 = 0.0;
  double theta1 = 0.4;
  int datasets = 20;
  std::string method = "auto";  // exact | gibbs | auto (exact when lag <= 20)
  int sweeps = 10000;           // Gibbs data generation
  std::string estimators = "default";

  int iterations = 5000;
  int burn_in = 1000;
  double proposal_sd = 0.05;
  bool auto_tune = true;
  double init = 0.0;

  int exchange_iterations = 5000;
  int exchange_burn_in = 1000;
  int exchange_sweeps = 50;  // inner Gibbs sweeps when exact draws are unavailable

  double prior_lo = -10.0;
  double prior_hi = 10.0;
  GridSpec grid{};

  Seed seed = 1;
  std::filesystem::path out = "out";
  std::filesystem::path data;  // dataset directory for fit; defaults to out
  int workers = 0;             // 0: hardware concurrency
  bool traces = false;
  bool record_timing = false;  // sec_per_iter is 0 unless set
  int bench_iterations = 200;

  // Keys match the long CLI flags: lattice, theta1, datasets, ... Unknown keys
  // raise ConfigError.
  void set(const std::string& key, const std::string& value);
  void validate() const;
  int worker_count() const;
  SimulationMethod simulation_method() const;
  PriorSpec prior() const;
  std::filesystem::path data_dir() const { return data.empty() ? out : data; }
};

// Flat "key = value" text, '#' starts a comment.
std::map<std::string, std::string> parse_key_values(const std::string& text);
void load_config_file(ExperimentConfig& cfg, const std::filesystem::path& path);
Dims parse_dims(const std::string& text);  // "16x16"

struct SummaryRow {
  std::string estimator;
  int dataset = 0;
  double post_mean = 0.0;
  double bias = 0.0;  // post_mean - true theta1
  double post_var = 0.0;
  double accept_rate = 0.0;
  double sec_per_iter = 0.0;
};

inline constexpr const char* kSummaryHeader =
    "estimator,dataset,post_mean,bias,post_var,accept_rate,sec_per_iter";
inline constexpr const char* kTimingHeader = "estimator,median_sec_per_iter,iters";

std::string format_summary_csv(const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> parse_summary_csv(const std::string& text);
std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);

struct FiveNumber {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};
// Quartiles by linear interpolation between order statistics.
FiveNumber five_number_summary(std::vector<double> xs);

struct EstimatorReport {
  std::string estimator;
  std::size_t count = 0;
  double mean_post_var = 0.0;
  FiveNumber bias;
};

struct TimingRow {
  std::string estimator;
  double median_sec_per_iter = 0.0;
  int iters = 0;
};

// Writes dataset_<id>.txt files and manifest.txt into cfg.out; returns the
// dataset paths.
std::vector<std::filesystem::path> cmd_simulate(const ExperimentConfig& cfg);

// Copies lattice shape, true theta and dataset count from <dir>/manifest.txt
// into cfg. Returns false when there is no manifest.
bool load_manifest(ExperimentConfig& cfg, const std::filesystem::path& dir);

// Fits every estimator to dataset_<id>.txt, id in [0, cfg.datasets), from
// cfg.data_dir(). Writes summary.csv, fit_settings.txt and any trace files to cfg.out. Rows are
// ordered by estimator, then dataset.
std::vector<SummaryRow> cmd_fit(const ExperimentConfig& cfg);

// Per-estimator averages and bias boxplot data. Composite estimators come
// first, then pseudolikelihood, then exact/exchange; ties keep first
// appearance. Writes variance_table.csv and bias_boxplot.csv to out_dir.
std::vector<EstimatorReport> cmd_report(const std::filesystem::path& summary_csv,
                                        const std::filesystem::path& out_dir);
std::vector<EstimatorReport> summarize(const std::vector<SummaryRow>& rows);

// Median seconds per MCMC iteration per estimator on one simulated dataset
// (or the lattice at `dataset_path` when non-empty); writes timing.csv.
std::vector<TimingRow> cmd_benchmark(const ExperimentConfig& cfg,
                                     const std::filesystem::path& dataset_path = {});

// Command-line entry point. Exit codes: 0 ok, 1 usage/config, 2 data/format,
// 3 unsupported size.
int run_cli(int argc, char** argv);

}  // namespace gibbscl
