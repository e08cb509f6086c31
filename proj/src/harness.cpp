#include "gibbscl/harness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "gibbscl/errors.hpp"
#include "gibbscl/likelihoods.hpp"
#include "gibbscl/parallel.hpp"
#include "gibbscl/recursion.hpp"

namespace gibbscl {
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next == std::string_view::npos ? next : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

template <class T>
bool parse_number(std::string_view text, T& out) {
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  if (!parse_number(v, out) || !std::isfinite(out))
    throw ConfigError(fmt::format("{}: expected a real number, got '{}'", key, v));
  return out;
}

long long to_integer(const std::string& key, const std::string& v) {
  long long out = 0;
  if (!parse_number(v, out))
    throw ConfigError(fmt::format("{}: expected an integer, got '{}'", key, v));
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  const long long x = to_integer(key, v);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
    throw ConfigError(fmt::format("{}: value out of range", key));
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError(fmt::format("{}: expected a boolean, got '{}'", key, v));
}

// splitmix64 finaliser
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) h = (h ^ ch) * 0x100000001b3ULL;
  return h;
}

// Seed for one (estimator, dataset) cell, independent of list order.
Seed derive_seed(Seed master, std::string_view tag, int dataset) {
  return mix(mix(master ^ fnv1a(tag)) + static_cast<std::uint64_t>(dataset));
}

fs::path dataset_path(const fs::path& dir, int id) {
  return dir / fmt::format("dataset_{}.txt", id);
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw IoError(fmt::format("cannot create output directory {}", dir.string()));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fmt_real(double x) { return fmt::format("{:.17g}", x); }

double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  const auto mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
  const double hi = xs[mid];
  if (xs.size() % 2) return hi;
  return 0.5 * (hi + *std::max_element(xs.begin(), xs.begin() + mid));
}

SimulationMethod exchange_inner(Dims dims, int sweeps) {
  if (std::min(dims.rows, dims.cols) <= kMaxLag) return ExactDraw{};
  return GibbsDraw{sweeps};
}

}  // namespace

std::string EstimatorSpec::label() const {
  switch (kind) {
    case Kind::Pseudo:
      return "pseudo";
    case Kind::Exact:
      return "exact";
    case Kind::Exchange:
      return "exchange";
    case Kind::Composite:
      if (fraction >= 1.0) return fmt::format("ccl{}", block_size);
      return fmt::format("ccl{}@{:g}", block_size, fraction);
  }
  return {};
}

EstimatorSpec parse_estimator(const std::string& token) {
  const std::string t = trim(token);
  if (t == "pseudo") return {EstimatorSpec::Kind::Pseudo};
  if (t == "exact") return {EstimatorSpec::Kind::Exact};
  if (t == "exchange") return {EstimatorSpec::Kind::Exchange};
  if (t.rfind("ccl", 0) == 0) {
    EstimatorSpec e{EstimatorSpec::Kind::Composite};
    const auto at = t.find('@');
    const std::string k = t.substr(3, at == std::string::npos ? std::string::npos : at - 3);
    if (!parse_number(k, e.block_size) || e.block_size < 1)
      throw ConfigError(fmt::format("estimator '{}': bad block size", t));
    if (at != std::string::npos) {
      if (!parse_number(std::string_view(t).substr(at + 1), e.fraction))
        throw ConfigError(fmt::format("estimator '{}': bad block fraction", t));
    }
    if (!(e.fraction > 0.0 && e.fraction <= 1.0))
      throw ConfigError(fmt::format("estimator '{}': fraction must lie in (0, 1]", t));
    return e;
  }
  throw ConfigError(fmt::format("unknown estimator '{}'", t));
}

std::vector<EstimatorSpec> default_estimators(Dims dims) {
  using K = EstimatorSpec::Kind;
  std::vector<EstimatorSpec> out{{K::Pseudo},
                                 {K::Composite, 3, 1.0},
                                 {K::Composite, 4, 0.4},
                                 {K::Composite, 5, 0.2},
                                 {K::Composite, 6, 0.1}};
  out.push_back({std::min(dims.rows, dims.cols) <= kMaxLag ? K::Exact : K::Exchange});
  return out;
}

std::vector<EstimatorSpec> parse_estimators(const std::string& list, Dims dims) {
  std::vector<EstimatorSpec> out;
  for (const auto& token : split(list, ',')) {
    if (token.empty()) continue;
    if (token == "default") {
      for (auto& e : default_estimators(dims)) out.push_back(e);
    } else {
      out.push_back(parse_estimator(token));
    }
  }
  if (out.empty()) throw ConfigError("at least one estimator is required");
  for (std::size_t a = 0; a < out.size(); ++a)
    for (std::size_t b = a + 1; b < out.size(); ++b)
      if (out[a].label() == out[b].label())
        throw ConfigError("estimator listed twice: " + out[a].label());
  return out;
}

Dims parse_dims(const std::string& text) {
  const auto x = text.find_first_of("xX");
  Dims d;
  if (x == std::string::npos || !parse_number(std::string_view(text).substr(0, x), d.rows) ||
      !parse_number(std::string_view(text).substr(x + 1), d.cols) || d.rows < 1 || d.cols < 1)
    throw ConfigError(fmt::format("lattice: expected ROWSxCOLS, got '{}'", text));
  return d;
}

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "lattice") dims = parse_dims(v);
  else if (key == "theta0") theta0 = to_double(key, v);
  else if (key == "theta1") theta1 = to_double(key, v);
  else if (key == "datasets") datasets = to_int(key, v);
  else if (key == "method") method = v;
  else if (key == "sweeps") sweeps = to_int(key, v);
  else if (key == "estimators") estimators = v;
  else if (key == "iters") iterations = to_int(key, v);
  else if (key == "burnin") burn_in = to_int(key, v);
  else if (key == "proposal_sd") proposal_sd = to_double(key, v);
  else if (key == "autotune") auto_tune = to_bool(key, v);
  else if (key == "init") init = to_double(key, v);
  else if (key == "exchange_iters") exchange_iterations = to_int(key, v);
  else if (key == "exchange_burnin") exchange_burn_in = to_int(key, v);
  else if (key == "exchange_sweeps") exchange_sweeps = to_int(key, v);
  else if (key == "prior_lo") prior_lo = to_double(key, v);
  else if (key == "prior_hi") prior_hi = to_double(key, v);
  else if (key == "grid_lo") grid.lo = to_double(key, v);
  else if (key == "grid_hi") grid.hi = to_double(key, v);
  else if (key == "grid_step") grid.step = to_double(key, v);
  else if (key == "seed") seed = static_cast<Seed>(to_integer(key, v));
  else if (key == "out") out = v;
  else if (key == "data") data = v;
  else if (key == "workers") workers = to_int(key, v);
  else if (key == "traces") traces = to_bool(key, v);
  else if (key == "timing") record_timing = to_bool(key, v);
  else if (key == "bench_iters") bench_iterations = to_int(key, v);
  else throw ConfigError(fmt::format("unknown configuration key '{}'", key));
}

void ExperimentConfig::validate() const {
  if (dims.rows < 1 || dims.cols < 1) throw ConfigError("lattice dimensions must be positive");
  if (datasets < 1) throw ConfigError("datasets must be >= 1");
  if (method != "exact" && method != "gibbs" && method != "auto")
    throw ConfigError("method must be exact, gibbs or auto");
  if (sweeps < 0) throw ConfigError("sweeps must be >= 0");
  if (iterations < 1 || burn_in < 0 || burn_in >= iterations)
    throw ConfigError("need iters >= 1 and 0 <= burnin < iters");
  if (exchange_iterations < 1 || exchange_burn_in < 0 ||
      exchange_burn_in >= exchange_iterations)
    throw ConfigError("need exchange_iters >= 1 and 0 <= exchange_burnin < exchange_iters");
  if (exchange_sweeps < 1) throw ConfigError("exchange_sweeps must be >= 1");
  if (!(proposal_sd > 0.0)) throw ConfigError("proposal_sd must be positive");
  if (!(prior_lo < prior_hi)) throw ConfigError("prior needs prior_lo < prior_hi");
  if (!(grid.step > 0.0) || !(grid.lo < grid.hi))
    throw ConfigError("grid needs grid_lo < grid_hi and grid_step > 0");
  if (workers < 0) throw ConfigError("workers must be >= 0");
  if (bench_iterations < 100) throw ConfigError("bench_iters must be >= 100");
  parse_estimators(estimators, dims);
}

int ExperimentConfig::worker_count() const {
  if (workers > 0) return workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

SimulationMethod ExperimentConfig::simulation_method() const {
  const bool exact = method == "exact" ||
                     (method == "auto" && std::min(dims.rows, dims.cols) <= kMaxLag);
  if (exact) return ExactDraw{};
  return GibbsDraw{sweeps};
}

PriorSpec ExperimentConfig::prior() const { return PriorSpec::uniform(prior_lo, prior_hi); }

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ParseError("empty key", line_no);
    out[key] = trim(std::string_view(line).substr(eq + 1));
  }
  return out;
}

void load_config_file(ExperimentConfig& cfg, const fs::path& path) {
  std::map<std::string, std::string> kv;
  try {
    kv = parse_key_values(read_text(path));
  } catch (const ParseError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  for (const auto& [k, v] : kv) cfg.set(k, v);
}

bool load_manifest(ExperimentConfig& cfg, const fs::path& dir) {
  const fs::path path = dir / "manifest.txt";
  if (!fs::exists(path)) return false;
  const auto kv = parse_key_values(read_text(path));
  for (const char* key : {"lattice", "theta0", "theta1", "datasets"}) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(path.string() + ": missing key " + key, 0);
    try {
      cfg.set(key, it->second);
    } catch (const ConfigError& e) {
      throw ParseError(path.string() + ": " + e.what(), 0);
    }
  }
  return true;
}

std::vector<fs::path> cmd_simulate(const ExperimentConfig& cfg) {
  cfg.validate();
  const SimulationMethod method = cfg.simulation_method();
  const ModelParams theta{cfg.theta0, cfg.theta1};
  const auto lattices = simulate_datasets(theta, cfg.dims, cfg.datasets, method, cfg.seed,
                                          cfg.worker_count());
  ensure_directory(cfg.out);
  std::vector<fs::path> paths;
  for (int d = 0; d < cfg.datasets; ++d) {
    paths.push_back(dataset_path(cfg.out, d));
    write_lattice(lattices[d], paths.back());
  }
  const bool exact = std::holds_alternative<ExactDraw>(method);
  std::string manifest = fmt::format(
      "# simulated datasets dataset_0.txt .. dataset_{}.txt\n"
      "lattice = {}x{}\ntheta0 = {}\ntheta1 = {}\ndatasets = {}\nmethod = {}\n",
      cfg.datasets - 1, cfg.dims.rows, cfg.dims.cols, fmt_real(cfg.theta0),
      fmt_real(cfg.theta1), cfg.datasets, exact ? "exact" : "gibbs");
  if (!exact) manifest += fmt::format("sweeps = {}\n", cfg.sweeps);
  manifest += fmt::format("seed = {}\n", cfg.seed);
  write_text(cfg.out / "manifest.txt", manifest);
  return paths;
}

std::vector<SummaryRow> cmd_fit(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto estimators = parse_estimators(cfg.estimators, cfg.dims);
  const PriorSpec prior = cfg.prior();
  const int workers = cfg.worker_count();

  bool need_grid = false;
  for (const auto& e : estimators) {
    if (e.kind == EstimatorSpec::Kind::Composite &&
        e.block_size > std::min(cfg.dims.rows, cfg.dims.cols))
      throw ConfigError(fmt::format("{} needs a lattice of at least {}x{}", e.label(),
                                    e.block_size, e.block_size));
    if (e.kind == EstimatorSpec::Kind::Exact) {
      make_plan(cfg.dims);
      need_grid = true;
    }
  }

  std::vector<Lattice> data;
  data.reserve(static_cast<std::size_t>(cfg.datasets));
  for (int d = 0; d < cfg.datasets; ++d) {
    const fs::path path = dataset_path(cfg.data_dir(), d);
    if (!fs::exists(path)) throw IoError("missing dataset " + path.string());
    try {
      data.push_back(read_lattice(path));
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": " + e.what(), e.line());
    }
    if (data.back().dims() != cfg.dims)
      throw ParseError(fmt::format("{}: lattice is {}x{}, expected {}x{}", path.string(),
                                   data.back().rows(), data.back().cols(), cfg.dims.rows,
                                   cfg.dims.cols),
                       0);
  }

  // log z on the grid depends only on the lattice shape: compute once.
  std::vector<double> grid, grid_log_z;
  double grid_sec_per_point = 0.0;
  if (need_grid) {
    grid = cfg.grid.points();
    const auto start = Clock::now();
    grid_log_z = grid_log_partitions(cfg.dims, grid, cfg.theta0, workers);
    const std::chrono::duration<double> elapsed = Clock::now() - start;
    grid_sec_per_point = elapsed.count() / static_cast<double>(grid.size());
  }

  struct Cell {
    SummaryRow row;
    std::vector<double> trace;
  };
  const std::size_t n_data = data.size();
  std::vector<Cell> cells(estimators.size() * n_data);

  parallel_for(cells.size(), workers, [&](std::size_t idx) {
    const EstimatorSpec& est = estimators[idx / n_data];
    const int d = static_cast<int>(idx % n_data);
    const Lattice& lat = data[static_cast<std::size_t>(d)];
    const std::string label = est.label();
    Cell& cell = cells[idx];
    cell.row.estimator = label;
    cell.row.dataset = d;

    McmcConfig mc;
    mc.iterations = cfg.iterations;
    mc.burn_in = cfg.burn_in;
    mc.proposal_sd = cfg.proposal_sd;
    mc.seed = derive_seed(cfg.seed, label, d);
    mc.auto_tune = cfg.auto_tune;

    ChainResult chain;
    switch (est.kind) {
      case EstimatorSpec::Kind::Exact: {
        const GridPosterior post = grid_posterior(lat, prior, grid, grid_log_z, cfg.theta0);
        chain.posterior_mean = post.mean();
        chain.posterior_variance = post.variance();
        chain.acceptance_rate = 1.0;
        chain.wall_time_per_iteration = grid_sec_per_point;
        break;
      }
      case EstimatorSpec::Kind::Exchange: {
        mc.iterations = cfg.exchange_iterations;
        mc.burn_in = cfg.exchange_burn_in;
        chain = exchange(lat, prior, mc, exchange_inner(cfg.dims, cfg.exchange_sweeps),
                         cfg.theta0, cfg.init);
        break;
      }
      case EstimatorSpec::Kind::Pseudo:
      case EstimatorSpec::Kind::Composite: {
        Objective objective = PseudoObjective{};
        if (est.kind == EstimatorSpec::Kind::Composite) {
          CompositeLikelihoodSpec spec;
          spec.block_size = est.block_size;
          spec.fraction = est.fraction;
          spec.selection_seed = derive_seed(cfg.seed, "blocks:" + label, d);
          objective = CompositeObjective{spec};
        }
        const LogPosterior post(lat, objective, prior);
        chain = metropolis([&](double t) { return post({cfg.theta0, t}); }, cfg.init, mc);
        break;
      }
    }
    cell.row.post_mean = chain.posterior_mean;
    cell.row.bias = chain.posterior_mean - cfg.theta1;
    cell.row.post_var = chain.posterior_variance;
    cell.row.accept_rate = chain.acceptance_rate;
    cell.row.sec_per_iter = cfg.record_timing ? chain.wall_time_per_iteration : 0.0;
    cell.trace = std::move(chain.samples);
  });

  std::vector<SummaryRow> rows;
  rows.reserve(cells.size());
  for (const auto& c : cells) rows.push_back(c.row);

  ensure_directory(cfg.out);
  write_text(cfg.out / "summary.csv", format_summary_csv(rows));
  std::string labels;
  for (const auto& e : estimators) labels += (labels.empty() ? "" : ",") + e.label();
  write_text(cfg.out / "fit_settings.txt",
             fmt::format("# settings used for summary.csv\n"
                         "lattice = {}x{}\ntheta0 = {}\ntheta1 = {}\ndatasets = {}\n"
                         "estimators = {}\niters = {}\nburnin = {}\nproposal_sd = {}\n"
                         "autotune = {}\ninit = {}\nexchange_iters = {}\nexchange_burnin = {}\n"
                         "exchange_sweeps = {}\nprior_lo = {}\nprior_hi = {}\ngrid_lo = {}\n"
                         "grid_hi = {}\ngrid_step = {}\nseed = {}\n",
                         cfg.dims.rows, cfg.dims.cols, fmt_real(cfg.theta0), fmt_real(cfg.theta1),
                         cfg.datasets, labels, cfg.iterations, cfg.burn_in,
                         fmt_real(cfg.proposal_sd), cfg.auto_tune ? "on" : "off",
                         fmt_real(cfg.init), cfg.exchange_iterations, cfg.exchange_burn_in,
                         cfg.exchange_sweeps, fmt_real(cfg.prior_lo), fmt_real(cfg.prior_hi),
                         fmt_real(cfg.grid.lo), fmt_real(cfg.grid.hi), fmt_real(cfg.grid.step),
                         cfg.seed));
  if (cfg.traces) {
    for (const auto& c : cells) {
      if (c.trace.empty()) continue;
      std::string label = c.row.estimator;
      std::replace(label.begin(), label.end(), '@', '_');
      std::string text = "iteration,theta1\n";
      for (std::size_t t = 0; t < c.trace.size(); ++t)
        text += fmt::format("{},{}\n", t, fmt_real(c.trace[t]));
      write_text(cfg.out / fmt::format("trace_{}_{}.csv", label, c.row.dataset), text);
    }
  }
  return rows;
}

std::string format_summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = std::string(kSummaryHeader) + "\n";
  for (const auto& r : rows)
    out += fmt::format("{},{},{},{},{},{},{}\n", r.estimator, r.dataset, fmt_real(r.post_mean),
                       fmt_real(r.bias), fmt_real(r.post_var), fmt_real(r.accept_rate),
                       fmt_real(r.sec_per_iter));
  return out;
}

std::vector<SummaryRow> parse_summary_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty summary file", 0);
  ++line_no;
  if (trim(line) != kSummaryHeader)
    throw ParseError(fmt::format("unexpected header, expected '{}'", kSummaryHeader), 1);

  std::vector<SummaryRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 7)
      throw ParseError(fmt::format("expected 7 fields, found {}", f.size()), line_no);
    SummaryRow r;
    r.estimator = f[0];
    if (r.estimator.empty()) throw ParseError("empty estimator label", line_no);
    if (!parse_number(f[1], r.dataset)) throw ParseError("bad dataset id", line_no);
    double* reals[] = {&r.post_mean, &r.bias, &r.post_var, &r.accept_rate, &r.sec_per_iter};
    for (int k = 0; k < 5; ++k)
      if (!parse_number(f[k + 2], *reals[k]) || !std::isfinite(*reals[k]))
        throw ParseError(fmt::format("bad number '{}'", f[k + 2]), line_no);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<SummaryRow> read_summary_csv(const fs::path& path) {
  return parse_summary_csv(read_text(path));
}

FiveNumber five_number_summary(std::vector<double> xs) {
  if (xs.empty()) return {};
  std::sort(xs.begin(), xs.end());
  auto q = [&](double p) {
    const double pos = p * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, xs.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return xs[lo] + frac * (xs[hi] - xs[lo]);
  };
  return {xs.front(), q(0.25), q(0.5), q(0.75), xs.back()};
}

std::vector<EstimatorReport> summarize(const std::vector<SummaryRow>& rows) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const SummaryRow*>> groups;
  for (const auto& r : rows) {
    auto& g = groups[r.estimator];
    if (g.empty()) order.push_back(r.estimator);
    g.push_back(&r);
  }
  // composites, then pseudolikelihood, then the reference estimator
  const auto rank = [](const std::string& label) {
    if (label.rfind("ccl", 0) == 0) return 0;
    if (label == "exact" || label == "exchange") return 2;
    return 1;
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](const auto& a, const auto& b) { return rank(a) < rank(b); });
  std::vector<EstimatorReport> out;
  for (const auto& label : order) {
    const auto& g = groups[label];
    EstimatorReport rep;
    rep.estimator = label;
    rep.count = g.size();
    std::vector<double> biases;
    double var_sum = 0.0;
    for (const auto* r : g) {
      var_sum += r->post_var;
      biases.push_back(r->bias);
    }
    rep.mean_post_var = var_sum / static_cast<double>(g.size());
    rep.bias = five_number_summary(std::move(biases));
    out.push_back(std::move(rep));
  }
  return out;
}

std::vector<EstimatorReport> cmd_report(const fs::path& summary_csv, const fs::path& out_dir) {
  const auto reports = summarize(read_summary_csv(summary_csv));
  ensure_directory(out_dir);

  std::string header, values;
  for (std::size_t k = 0; k < reports.size(); ++k) {
    header += (k ? "," : "") + reports[k].estimator;
    values += (k ? "," : "") + fmt_real(reports[k].mean_post_var);
  }
  write_text(out_dir / "variance_table.csv", header + "\n" + values + "\n");

  std::string box = "estimator,min,q1,median,q3,max\n";
  for (const auto& r : reports)
    box += fmt::format("{},{},{},{},{},{}\n", r.estimator, fmt_real(r.bias.min),
                       fmt_real(r.bias.q1), fmt_real(r.bias.median), fmt_real(r.bias.q3),
                       fmt_real(r.bias.max));
  write_text(out_dir / "bias_boxplot.csv", box);
  return reports;
}

std::vector<TimingRow> cmd_benchmark(const ExperimentConfig& cfg, const fs::path& dataset) {
  cfg.validate();
  const auto estimators = parse_estimators(cfg.estimators, cfg.dims);
  const PriorSpec prior = cfg.prior();
  const Lattice lat = dataset.empty()
                          ? simulate_dataset({cfg.theta0, cfg.theta1}, cfg.dims,
                                             cfg.simulation_method(), cfg.seed, 0)
                          : read_lattice(dataset);
  const int iters = cfg.bench_iterations;

  std::vector<TimingRow> rows;
  for (const auto& est : estimators) {
    Rng rng = make_rng(derive_seed(cfg.seed, "bench:" + est.label(), 0));
    std::normal_distribution<double> step(0.0, cfg.proposal_sd);
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(iters));
    double state = cfg.theta1;

    auto timed = [&](auto&& iteration) {
      for (int t = 0; t < iters; ++t) {
        const auto start = Clock::now();
        iteration();
        const std::chrono::duration<double> elapsed = Clock::now() - start;
        times.push_back(elapsed.count());
      }
    };

    if (est.kind == EstimatorSpec::Kind::Exchange) {
      const SimulationMethod inner = exchange_inner(lat.dims(), cfg.exchange_sweeps);
      std::optional<ExactSampler> exact;
      if (std::holds_alternative<ExactDraw>(inner)) exact.emplace(lat.dims());
      const UnnormalizedLogDensity log_q = [](const ModelParams& t, const Lattice& y) {
        return log_unnormalized(t, y);
      };
      timed([&] {
        const ModelParams cur{cfg.theta0, state}, prop{cfg.theta0, state + step(rng)};
        Lattice aux = lat;
        if (exact) {
          aux = exact->draw(prop, rng);
        } else {
          for (int s = 0; s < std::get<GibbsDraw>(inner).sweeps; ++s)
            gibbs_sweep_inplace(prop, aux, rng);
        }
        const double r = exchange_log_acceptance(log_q, cur, prop, lat, aux, prior);
        if (std::log(uniform01(rng)) < r) state = prop.theta1;
      });
    } else {
      Objective objective = PseudoObjective{};
      if (est.kind == EstimatorSpec::Kind::Exact) objective = ExactObjective{};
      if (est.kind == EstimatorSpec::Kind::Composite) {
        if (est.block_size > std::min(cfg.dims.rows, cfg.dims.cols))
          throw ConfigError(est.label() + " does not fit the lattice");
        CompositeLikelihoodSpec spec{est.block_size, est.fraction,
                                     derive_seed(cfg.seed, "blocks:" + est.label(), 0), {}};
        objective = CompositeObjective{spec};
      }
      const LogPosterior post(lat, objective, prior);
      double current = post({cfg.theta0, state});
      timed([&] {
        const double prop = state + step(rng);
        const double next = post({cfg.theta0, prop});
        if (std::log(uniform01(rng)) < next - current) {
          state = prop;
          current = next;
        }
      });
    }
    rows.push_back({est.label(), median(std::move(times)), iters});
  }

  ensure_directory(cfg.out);
  std::string text = std::string(kTimingHeader) + "\n";
  for (const auto& r : rows)
    text += fmt::format("{},{},{}\n", r.estimator, fmt_real(r.median_sec_per_iter), r.iters);
  write_text(cfg.out / "timing.csv", text);
  return rows;
}

}  // namespace gibbscl
