#include "fdbandits/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fdbandits/algorithms.hpp"
#include "fdbandits/evaluation.hpp"
#include "fdbandits/instances.hpp"
#include "fdbandits/uncertainty.hpp"

namespace fdbandits {

std::string algo_name(Algo algo) {
  switch (algo) {
    case Algo::kKlPcb: return "kl_pcb";
    case Algo::kFCb: return "f_cb";
    case Algo::kKlPcdb: return "kl_pcdb";
    case Algo::kFCdb: return "f_cdb";
    case Algo::kLsSoftmaxBaseline: return "ls_softmax_baseline";
  }
  return "kl_pcb";
}

Algo algo_from_name(const std::string& name) {
  if (name == "kl_pcb") return Algo::kKlPcb;
  if (name == "f_cb") return Algo::kFCb;
  if (name == "kl_pcdb") return Algo::kKlPcdb;
  if (name == "f_cdb") return Algo::kFCdb;
  if (name == "ls_softmax_baseline") return Algo::kLsSoftmaxBaseline;
  throw std::invalid_argument("unknown algorithm: " + name);
}

bool algo_uses_preferences(Algo algo) {
  return algo == Algo::kKlPcdb || algo == Algo::kFCdb;
}

std::vector<std::string> validate_sweep_config(const SweepConfig& cfg) {
  std::vector<std::string> out = validate_instance(cfg.instance);
  const auto fc = validate_function_class(cfg.fclass, cfg.instance);
  out.insert(out.end(), fc.begin(), fc.end());
  if (cfg.n_grid.empty()) out.push_back("n_grid must be non-empty");
  for (std::size_t i = 0; i + 1 < cfg.n_grid.size(); ++i) {
    if (cfg.n_grid[i] >= cfg.n_grid[i + 1]) {
      out.push_back("n_grid must be strictly increasing");
      break;
    }
  }
  for (long n : cfg.n_grid) {
    if (n < 1) {
      out.push_back("n_grid entries must be positive");
      break;
    }
  }
  if (cfg.seeds < 1) out.push_back("seeds must be >= 1");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) out.push_back("delta must be in (0,1)");
  const bool f_algo = cfg.algo == Algo::kFCb || cfg.algo == Algo::kFCdb;
  if (f_algo && cfg.reg.kind != Regularizer::Kind::kFDiv) {
    out.push_back("f_cb/f_cdb require an FDiv regularizer");
  }
  return out;
}

std::uint64_t cell_seed(std::uint64_t base_seed, long n, int seed_index) {
  return Rng::derive_seed(Rng::derive_seed(base_seed, static_cast<std::uint64_t>(n)),
                          static_cast<std::uint64_t>(seed_index));
}

namespace {

// Instance-level quantities shared by every cell of a sweep.
struct SweepContext {
  Policy opt;
  double c_pistar = 0.0;
  double d2_single = 0.0;
};

Regularizer evaluation_regularizer(const SweepConfig& cfg) {
  const bool f_algo = cfg.algo == Algo::kFCb || cfg.algo == Algo::kFCdb;
  return f_algo ? cfg.reg : Regularizer::kl(cfg.reg.eta);
}

SweepContext make_context(const SweepConfig& cfg) {
  SweepContext ctx;
  const Regularizer reg = evaluation_regularizer(cfg);
  ctx.opt = optimal_policy(cfg.instance, reg);
  ctx.c_pistar = density_ratio_concentrability(ctx.opt, cfg.instance.ref_policy);
  const D2Variant variant =
      algo_uses_preferences(cfg.algo) ? D2Variant::kDueling : D2Variant::kBandit;
  ctx.d2_single = d2_concentrability(cfg.fclass, ctx.opt, cfg.instance.ref_policy,
                                     cfg.instance.context_dist, CoverageMode::kSingle, variant);
  return ctx;
}

SweepRow run_cell_with_context(const SweepConfig& cfg, const SweepContext& ctx, long n,
                               int seed_index) {
  SweepRow row;
  row.algo = cfg.algo;
  row.eta = cfg.reg.eta;
  if (cfg.reg.kind == Regularizer::Kind::kFDiv) row.alpha = cfg.reg.alpha;
  row.n = n;
  row.seed = seed_index;
  row.c_pistar = ctx.c_pistar;
  row.d2_single = ctx.d2_single;

  const auto start = std::chrono::steady_clock::now();
  try {
    const std::uint64_t data_seed = cell_seed(cfg.base_seed, n, seed_index);
    PessimismOptions options;
    options.delta = cfg.delta;
    options.ground_truth = cfg.instance.mean_reward;
    AlgoResult result;
    switch (cfg.algo) {
      case Algo::kKlPcb:
        result = run_kl_pcb(cfg.fclass, sample_bandit_data(cfg.instance, n, data_seed),
                            cfg.instance.ref_policy, cfg.instance.context_dist, cfg.reg.eta,
                            options);
        break;
      case Algo::kLsSoftmaxBaseline:
        options.force_zero_bonus = true;
        result = run_kl_pcb(cfg.fclass, sample_bandit_data(cfg.instance, n, data_seed),
                            cfg.instance.ref_policy, cfg.instance.context_dist, cfg.reg.eta,
                            options);
        break;
      case Algo::kFCb:
        result = run_f_cb(cfg.fclass, sample_bandit_data(cfg.instance, n, data_seed),
                          cfg.instance.ref_policy, cfg.instance.context_dist, cfg.reg,
                          cfg.instance.mean_reward);
        break;
      case Algo::kKlPcdb:
        result = run_kl_pcdb(cfg.fclass, sample_preference_data(cfg.instance, n, data_seed),
                             cfg.instance.ref_policy, cfg.instance.context_dist, cfg.reg.eta,
                             options);
        break;
      case Algo::kFCdb:
        result = run_f_cdb(cfg.fclass, sample_preference_data(cfg.instance, n, data_seed),
                           cfg.instance.ref_policy, cfg.instance.context_dist, cfg.reg,
                           cfg.instance.mean_reward);
        break;
    }
    row.subopt = suboptimality(cfg.instance, evaluation_regularizer(cfg), result.policy);
    row.event_e = result.diag.event_e;
  } catch (const std::exception& e) {
    row.subopt = std::numeric_limits<double>::quiet_NaN();
    row.status = e.what();
  }
  if (cfg.measure_runtime) {
    row.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  }
  return row;
}

}  // namespace

SweepRow run_cell(const SweepConfig& cfg, long n, int seed_index) {
  return run_cell_with_context(cfg, make_context(cfg), n, seed_index);
}

std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
  const auto violations = validate_sweep_config(cfg);
  if (!violations.empty()) throw std::invalid_argument("invalid sweep config: " + violations[0]);

  const SweepContext ctx = make_context(cfg);
  const std::size_t cells = cfg.n_grid.size() * static_cast<std::size_t>(cfg.seeds);
  std::vector<SweepRow> rows(cells);

  const auto run_index = [&](std::size_t idx) {
    const long n = cfg.n_grid[idx / cfg.seeds];
    const int seed_index = static_cast<int>(idx % cfg.seeds);
    rows[idx] = run_cell_with_context(cfg, ctx, n, seed_index);
  };

  const int workers = std::max(1, cfg.workers);
  if (workers == 1 || cells < 2) {
    for (std::size_t i = 0; i < cells; ++i) run_index(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int spawn = std::min<std::size_t>(workers, cells);
    for (int w = 0; w < spawn; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < cells; i = next.fetch_add(1)) run_index(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "algo,eta,alpha,n,seed,subopt,event_e,c_pistar,d2_single,runtime_ms,status\n";
  for (const auto& row : rows) {
    os << algo_name(row.algo) << ',' << format_double(row.eta) << ',';
    if (row.alpha) os << format_double(*row.alpha);
    os << ',' << row.n << ',' << row.seed << ',' << format_double(row.subopt) << ',';
    if (row.event_e) os << (*row.event_e ? 1 : 0);
    os << ',' << format_double(row.c_pistar) << ',' << format_double(row.d2_single) << ','
       << row.runtime_ms << ',';
    std::string status = row.status;  // keep the CSV single-field
    std::replace(status.begin(), status.end(), ',', ';');
    os << status << '\n';
  }
}

std::vector<SweepRow> read_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty sweep CSV");
  std::vector<SweepRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        fields.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur.push_back(c);
      }
    }
    fields.push_back(cur);
    if (fields.size() != 11) throw std::runtime_error("malformed sweep row: " + line);
    SweepRow row;
    row.algo = algo_from_name(fields[0]);
    row.eta = std::stod(fields[1]);
    if (!fields[2].empty()) row.alpha = std::stod(fields[2]);
    row.n = std::stol(fields[3]);
    row.seed = std::stoi(fields[4]);
    row.subopt = std::stod(fields[5]);
    if (!fields[6].empty()) row.event_e = fields[6] == "1";
    row.c_pistar = std::stod(fields[7]);
    row.d2_single = std::stod(fields[8]);
    row.runtime_ms = std::stol(fields[9]);
    row.status = fields[10];
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Rate fitting
// ---------------------------------------------------------------------------

RateFitResult rate_fit(const std::vector<SweepRow>& rows, RateStatistic stat) {
  std::vector<long> ns;
  for (const auto& row : rows) {
    if (row.status == "ok" && std::find(ns.begin(), ns.end(), row.n) == ns.end()) {
      ns.push_back(row.n);
    }
  }
  std::sort(ns.begin(), ns.end());

  std::vector<double> xs;
  std::vector<double> ys;
  for (long n : ns) {
    std::vector<double> subopts;
    for (const auto& row : rows) {
      if (row.status == "ok" && row.n == n) subopts.push_back(row.subopt);
    }
    double value;
    if (stat == RateStatistic::kMean) {
      value = 0.0;
      for (double v : subopts) value += v;
      value /= static_cast<double>(subopts.size());
    } else {
      std::sort(subopts.begin(), subopts.end());
      const std::size_t m = subopts.size();
      value = m % 2 == 1 ? subopts[m / 2] : 0.5 * (subopts[m / 2 - 1] + subopts[m / 2]);
    }
    if (!(value > 0.0)) throw std::runtime_error("degenerate rate fit (exact optimum reached)");
    xs.push_back(std::log(static_cast<double>(n)));
    ys.push_back(std::log(value));
  }
  if (xs.size() < 3) throw std::runtime_error("rate fit needs at least 3 distinct n values");

  const double m = static_cast<double>(xs.size());
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mean_x = sx / m;
  const double mean_y = sy / m;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mean_x) * (xs[i] - mean_x);
    sxy += (xs[i] - mean_x) * (ys[i] - mean_y);
  }
  RateFitResult out;
  out.slope = sxy / sxx;
  out.intercept = mean_y - out.slope * mean_x;
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double fit = out.intercept + out.slope * xs[i];
    ss_res += (ys[i] - fit) * (ys[i] - fit);
    ss_tot += (ys[i] - mean_y) * (ys[i] - mean_y);
  }
  out.r2 = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
  return out;
}

bool VerifyReport::all_pass() const {
  for (const auto& check : checks) {
    if (!check.pass) return false;
  }
  return true;
}

void print_report(std::ostream& os, const VerifyReport& report) {
  for (const auto& check : report.checks) {
    os << (check.pass ? "PASS " : "FAIL ") << check.name
       << " measured=" << format_double(check.measured)
       << " threshold=" << format_double(check.threshold);
    if (!check.note.empty()) os << " (" << check.note << ")";
    os << '\n';
  }
}

VerifySuite suite_from_name(const std::string& name) {
  if (name == "solvers") return VerifySuite::kSolvers;
  if (name == "uncertainty") return VerifySuite::kUncertainty;
  if (name == "evaluation") return VerifySuite::kEvaluation;
  if (name == "lemmas") return VerifySuite::kLemmas;
  if (name == "lower_bounds") return VerifySuite::kLowerBounds;
  if (name == "all") return VerifySuite::kAll;
  throw std::invalid_argument("unknown verify suite: " + name);
}

}  // namespace fdbandits
