#ifndef FDBANDITS_HARNESS_HPP
#define FDBANDITS_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fdbandits/core.hpp"

namespace fdbandits {

enum class Algo { kKlPcb, kFCb, kKlPcdb, kFCdb, kLsSoftmaxBaseline };

std::string algo_name(Algo algo);
Algo algo_from_name(const std::string& name);
// kl_pcdb and f_cdb consume preference data.
bool algo_uses_preferences(Algo algo);

struct SweepConfig {
  BanditInstance instance;
  FunctionClass fclass;
  Algo algo = Algo::kKlPcb;
  Regularizer reg = Regularizer::kl(1.0);
  std::vector<long> n_grid;
  int seeds = 1;
  double delta = 0.05;
  std::uint64_t base_seed = 0;
  int workers = 1;
  // runtime_ms is reported as 0 unless enabled, so that identical configs
  // write byte-identical CSV.
  bool measure_runtime = false;
};

std::vector<std::string> validate_sweep_config(const SweepConfig& cfg);

struct SweepRow {
  Algo algo = Algo::kKlPcb;
  double eta = 0.0;
  std::optional<double> alpha;
  long n = 0;
  int seed = 0;  // seed index within the sweep
  double subopt = 0.0;
  std::optional<bool> event_e;
  double c_pistar = 0.0;
  double d2_single = 0.0;
  long runtime_ms = 0;
  std::string status = "ok";
};

// Dataset seed for one sweep cell; `run_cell` with the same arguments
// reproduces the row exactly.
std::uint64_t cell_seed(std::uint64_t base_seed, long n, int seed_index);

SweepRow run_cell(const SweepConfig& cfg, long n, int seed_index);

// Runs every (n, seed) cell, in parallel when cfg.workers > 1; rows are
// ordered by (n, seed) regardless of scheduling. Component errors are
// recorded in the row status and do not stop the sweep.
std::vector<SweepRow> run_sweep(const SweepConfig& cfg);

// Header: algo,eta,alpha,n,seed,subopt,event_e,c_pistar,d2_single,runtime_ms,status
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(std::istream& is);

enum class RateStatistic { kMedian, kMean };

struct RateFitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// OLS of log(statistic of subopt at each n) on log n. Requires >= 3 distinct
// n with positive statistic; throws "degenerate rate fit (exact optimum
// reached)" otherwise.
RateFitResult rate_fit(const std::vector<SweepRow>& rows, RateStatistic stat);

enum class VerifySuite { kSolvers, kUncertainty, kEvaluation, kLemmas, kLowerBounds, kAll };

VerifySuite suite_from_name(const std::string& name);

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string note;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_pass() const;
};

// Executes the invariant and lemma-level checks for the chosen suite.
VerifyReport verify(VerifySuite suite, std::uint64_t seed = 0);

// One `PASS name measured=... threshold=...` line per check.
void print_report(std::ostream& os, const VerifyReport& report);

}  // namespace fdbandits

#endif  // FDBANDITS_HARNESS_HPP
