#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <map>
#include <optional>
#include <string>

#include "gibbscl/errors.hpp"
#include "gibbscl/harness.hpp"

namespace gibbscl {
namespace {

// Flags that map one-to-one onto configuration keys.
struct KeyHelp {
  const char* key;
  const char* help;
};
constexpr KeyHelp kExperimentKeys[] = {
    {"lattice", "ROWSxCOLS"},
    {"theta0", "field parameter, held fixed"},
    {"theta1", "true interaction used for simulation and bias"},
    {"datasets", "number of datasets"},
    {"method", "exact, gibbs or auto"},
    {"sweeps", "Gibbs sweeps per simulated dataset"},
    {"estimators", "comma list: pseudo, cclK[@F], exact, exchange, default"},
    {"iters", "MCMC iterations including burn-in"},
    {"burnin", "burn-in iterations"},
    {"proposal_sd", "random-walk proposal sd"},
    {"autotune", "tune the proposal sd in pilot rounds (on/off)"},
    {"init", "chain starting value"},
    {"exchange_iters", "exchange algorithm iterations"},
    {"exchange_burnin", "exchange algorithm burn-in"},
    {"exchange_sweeps", "Gibbs sweeps per auxiliary draw on large lattices"},
    {"prior_lo", "uniform prior lower bound"},
    {"prior_hi", "uniform prior upper bound"},
    {"grid_lo", "exact grid lower end"},
    {"grid_hi", "exact grid upper end"},
    {"grid_step", "exact grid spacing"},
    {"seed", "master seed"},
    {"out", "output directory"},
    {"data", "dataset directory (defaults to --out)"},
    {"workers", "worker threads, 0 for all cores"},
    {"traces", "write per-chain trace files (on/off)"},
    {"timing", "record seconds per iteration in summary.csv (on/off)"},
    {"bench_iters", "timed iterations per estimator, at least 100"}};

struct CommandOptions {
  std::optional<std::string> config;
  std::map<std::string, std::optional<std::string>> values;
};

void add_experiment_flags(CLI::App* cmd, CommandOptions& opts) {
  cmd->add_option("--config", opts.config, "key = value configuration file");
  for (const auto& [key, help] : kExperimentKeys) {
    std::string flag = std::string("--") + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    cmd->add_option(flag, opts.values[key], help);
  }
}

// defaults < manifest (fit) < config file < flags
ExperimentConfig build_config(const CommandOptions& opts, bool read_manifest) {
  ExperimentConfig cfg;
  if (read_manifest) {
    ExperimentConfig probe;
    if (opts.config) load_config_file(probe, *opts.config);
    for (const auto& [k, v] : opts.values)
      if (v) probe.set(k, *v);
    load_manifest(cfg, probe.data_dir());
  }
  if (opts.config) load_config_file(cfg, *opts.config);
  for (const auto& [k, v] : opts.values)
    if (v) cfg.set(k, *v);
  return cfg;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Bayesian inference for autologistic lattice models with composite likelihoods"};
  app.require_subcommand(1);

  CommandOptions simulate_opts, fit_opts, bench_opts;
  auto* simulate = app.add_subcommand("simulate", "simulate datasets into --out");
  add_experiment_flags(simulate, simulate_opts);
  auto* fit = app.add_subcommand("fit", "fit estimators to simulated datasets");
  add_experiment_flags(fit, fit_opts);
  auto* bench = app.add_subcommand("benchmark", "median seconds per iteration per estimator");
  add_experiment_flags(bench, bench_opts);
  std::string bench_data;
  bench->add_option("--data-file", bench_data, "lattice file to benchmark on");

  auto* report = app.add_subcommand("report", "variance table and bias boxplot data");
  std::string summary_path, report_out = ".";
  report->add_option("--summary", summary_path, "summary.csv produced by fit")->required();
  report->add_option("--out", report_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*simulate) {
      const auto cfg = build_config(simulate_opts, false);
      const auto paths = cmd_simulate(cfg);
      fmt::print("wrote {} datasets and manifest.txt to {}\n", paths.size(), cfg.out.string());
    } else if (*fit) {
      const auto cfg = build_config(fit_opts, true);
      const auto rows = cmd_fit(cfg);
      fmt::print("wrote {} rows to {}\n", rows.size(), (cfg.out / "summary.csv").string());
    } else if (*bench) {
      const auto cfg = build_config(bench_opts, false);
      for (const auto& r : cmd_benchmark(cfg, bench_data))
        fmt::print("{:<12} {:.3e} s/iter (median of {})\n", r.estimator, r.median_sec_per_iter,
                   r.iters);
    } else if (*report) {
      const auto reports = cmd_report(summary_path, report_out);
      fmt::print("{:<12} {:>4} {:>12} {:>11} {:>11} {:>11} {:>11} {:>11}\n", "estimator", "n",
                 "avg_var", "bias_min", "bias_q1", "bias_med", "bias_q3", "bias_max");
      for (const auto& r : reports)
        fmt::print("{:<12} {:>4} {:>12.4e} {:>11.4f} {:>11.4f} {:>11.4f} {:>11.4f} {:>11.4f}\n",
                   r.estimator, r.count, r.mean_post_var, r.bias.min, r.bias.q1,
                   r.bias.median, r.bias.q3, r.bias.max);
    }
  } catch (const UnsupportedSizeError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 3;
  } catch (const ParseError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const IoError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const ConfigError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  } catch (const DomainError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}

}  // namespace gibbscl
