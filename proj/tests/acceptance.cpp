// Acceptance suite: one test case per criterion, each printing a single
// PASS/FAIL line with the measured quantities. Run all of them with
// `ctest -R acceptance` or `./acceptance_tests`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <vector>

#include "doctest.h"
#include "fdbandits/algorithms.hpp"
#include "fdbandits/evaluation.hpp"
#include "fdbandits/harness.hpp"
#include "fdbandits/instances.hpp"
#include "fdbandits/solvers.hpp"
#include "fdbandits/uncertainty.hpp"

using namespace fdbandits;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void announce(const char* id, bool pass, double seconds, const std::string& detail) {
  std::printf("[%s] %s (%.1fs) %s\n", pass ? "PASS" : "FAIL", id, seconds, detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* pattern, ...) {
  char buf[256];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof(buf), pattern, args);
  va_end(args);
  return buf;
}

Policy random_full_support_policy(int S, int A, Rng& rng) {
  Policy pi;
  pi.probs = Table(S, A);
  for (int s = 0; s < S; ++s) {
    double sum = 0.0;
    for (int a = 0; a < A; ++a) {
      pi.probs(s, a) = rng.next_open_double();
      sum += pi.probs(s, a);
    }
    for (int a = 0; a < A; ++a) pi.probs(s, a) /= sum;
  }
  return pi;
}

Policy random_supported_policy(const Policy& ref, Rng& rng, double spread = 3.0) {
  Policy pi;
  pi.probs = Table(ref.num_states(), ref.num_actions(), 0.0);
  for (int s = 0; s < ref.num_states(); ++s) {
    double sum = 0.0;
    for (int a = 0; a < ref.num_actions(); ++a) {
      if (ref(s, a) > 0.0) {
        pi.probs(s, a) = ref(s, a) * std::exp(spread * rng.next_gaussian(0.0, 1.0));
        sum += pi.probs(s, a);
      }
    }
    for (int a = 0; a < ref.num_actions(); ++a) pi.probs(s, a) /= sum;
  }
  return pi;
}

// Skewed two-state instance whose greedy policy is badly covered by the
// reference (density ratio 20); used by the coverage-free rate criterion.
BanditInstance skewed_gap_instance() {
  BanditInstance inst;
  inst.num_states = 2;
  inst.num_actions = 2;
  inst.context_dist = {0.5, 0.5};
  inst.mean_reward = Table(2, 2);
  inst.mean_reward(0, 0) = 0.55;
  inst.mean_reward(0, 1) = 0.45;
  inst.mean_reward(1, 0) = 0.45;
  inst.mean_reward(1, 1) = 0.55;
  inst.ref_policy.probs = Table(2, 2);
  inst.ref_policy.probs(0, 0) = 0.05;
  inst.ref_policy.probs(0, 1) = 0.95;
  inst.ref_policy.probs(1, 0) = 0.95;
  inst.ref_policy.probs(1, 1) = 0.05;
  inst.noise = NoiseModel::bernoulli();
  return inst;
}

BanditInstance uniform_gap_instance() {
  BanditInstance inst = skewed_gap_instance();
  inst.mean_reward(0, 0) = 0.6;
  inst.mean_reward(0, 1) = 0.4;
  inst.mean_reward(1, 0) = 0.4;
  inst.mean_reward(1, 1) = 0.6;
  inst.ref_policy = uniform_policy(2, 2);
  return inst;
}

Table ladder_direction() {
  Table dir(2, 2);
  dir(0, 0) = 1.0;
  dir(0, 1) = -1.0;
  dir(1, 0) = -1.0;
  dir(1, 1) = 1.0;
  return dir;
}

// Truth plus +-scale rungs at c, c/sqrt(2), c/2, ...; 16 members total.
// Estimation error then shrinks smoothly across the whole n grid instead of
// collapsing to zero once the smallest gap resolves.
FunctionClass ladder_class(const BanditInstance& inst, double c) {
  std::vector<double> scales;
  for (int j = 0; j < 8; ++j) {
    const double s = c * std::pow(2.0, -j / 2.0);
    scales.push_back(s);
    if (j < 7) scales.push_back(-s);
  }
  return perturbation_ladder_class(inst, ladder_direction(), scales);
}

std::vector<long> full_grid() { return {128, 256, 512, 1024, 2048, 4096, 8192, 16384}; }

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  return m % 2 == 1 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
}

}  // namespace

TEST_CASE("C01 solver agreement") {
  Stopwatch watch;
  Rng rng(1001);
  double kl_gap = 0.0;
  double chi2_gap = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int S = 1 + static_cast<int>(rng.next_u64() % 6);
    const int A = 2 + static_cast<int>(rng.next_u64() % 5);
    const BanditInstance inst = random_instance(S, A, rng.next_u64(), rng.next_double());
    Table g(S, A);
    for (double& v : g.data()) v = rng.next_double();
    const double eta = 0.3 + 4.0 * rng.next_double();
    const double alpha = 0.5 + 1.5 * rng.next_double();

    kl_gap = std::max(kl_gap,
                      sup_distance(kl_softmax_policy(g, inst.ref_policy, eta).probs,
                                   f_dual_policy(g, inst.ref_policy,
                                                 Regularizer::kl_as_fdiv(eta)).policy.probs));
    chi2_gap = std::max(chi2_gap,
                        sup_distance(chi2_closed_form(g, inst.ref_policy, eta, alpha).probs,
                                     f_dual_policy(g, inst.ref_policy,
                                                   Regularizer::chi2(eta, alpha)).policy.probs));
  }
  const double seconds = watch.seconds();
  const bool pass = kl_gap <= 1e-8 && chi2_gap <= 1e-8 && seconds < 10.0;
  announce("C01 solver agreement", pass, seconds,
           fmt("kl_gap=%.3g chi2_gap=%.3g (tol 1e-8, 200 pairs)", kl_gap, chi2_gap));
  CHECK(kl_gap <= 1e-8);
  CHECK(chi2_gap <= 1e-8);
  CHECK(seconds < 10.0);
}

TEST_CASE("C02 optimality of the solved policies") {
  Stopwatch watch;
  Rng rng(1002);
  double worst_margin = kInf;
  for (int trial = 0; trial < 20; ++trial) {
    const int S = 1 + static_cast<int>(rng.next_u64() % 4);
    const int A = 2 + static_cast<int>(rng.next_u64() % 3);
    const BanditInstance inst = random_instance(S, A, rng.next_u64(), 0.6 * rng.next_double());
    const double eta = 0.5 + 2.5 * rng.next_double();
    for (const bool use_kl : {true, false}) {
      const Regularizer reg = use_kl ? Regularizer::kl(eta) : Regularizer::chi2(eta, 1.0);
      const double best = objective(inst, reg, optimal_policy(inst, reg));
      for (int probe = 0; probe < 1000; ++probe) {
        worst_margin = std::min(
            worst_margin, best - objective(inst, reg, random_supported_policy(inst.ref_policy,
                                                                              rng)));
      }
    }
  }
  const double seconds = watch.seconds();
  const bool pass = worst_margin >= -1e-9 && seconds < 30.0;
  announce("C02 optimality", pass, seconds,
           fmt("min margin=%.3g over 40000 probes (floor -1e-9)", worst_margin));
  CHECK(worst_margin >= -1e-9);
  CHECK(seconds < 30.0);
}

TEST_CASE("C03 KL suboptimality identity") {
  Stopwatch watch;
  Rng rng(1003);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int S = 1 + static_cast<int>(rng.next_u64() % 4);
    const int A = 2 + static_cast<int>(rng.next_u64() % 3);
    const BanditInstance inst = random_instance(S, A, rng.next_u64(), 0.6 * rng.next_double());
    const double eta = 0.5 + 3.0 * rng.next_double();
    const Policy pi = random_supported_policy(inst.ref_policy, rng);
    worst = std::max(worst, std::abs(suboptimality(inst, Regularizer::kl(eta), pi) -
                                     kl_subopt_identity(inst, eta, pi)));
  }
  const double seconds = watch.seconds();
  const bool pass = worst <= 1e-10 && seconds < 10.0;
  announce("C03 KL gap identity", pass, seconds,
           fmt("max |direct - identity|=%.3g over 500 pairs (tol 1e-10)", worst));
  CHECK(worst <= 1e-10);
  CHECK(seconds < 10.0);
}

TEST_CASE("C04 moment inequality fuzz") {
  Stopwatch watch;
  Rng rng(1004);
  double worst = -kInf;
  for (int i = 0; i < 10000; ++i) {
    const int k = 1 + static_cast<int>(rng.next_u64() % 8);
    std::vector<double> values(k);
    std::vector<double> weights(k);
    double sum = 0.0;
    for (int j = 0; j < k; ++j) {
      values[j] = -rng.next_double();
      weights[j] = rng.next_open_double();
      sum += weights[j];
    }
    for (double& w : weights) w /= sum;
    worst = std::max(worst, moment_check(values, weights));
  }
  const double seconds = watch.seconds();
  const bool pass = worst <= 1e-12 && seconds < 5.0;
  announce("C04 moment inequality fuzz", pass, seconds,
           fmt("max E[X^3]-E[X^2]E[X]=%.3g over 10^4 laws on [-1,0] (tol 1e-12)", worst));
  CHECK(worst <= 1e-12);
  CHECK(seconds < 5.0);
}

TEST_CASE("C05 tilt-curve monotonicity under pessimism") {
  Stopwatch watch;
  Rng rng(1005);
  std::vector<double> grid(21);
  for (int i = 0; i <= 20; ++i) grid[i] = i / 20.0;
  double worst_increase = -kInf;
  int used = 0;
  while (used < 200) {
    const BanditInstance inst = random_instance(2, 2, rng.next_u64(), 0.5 * rng.next_double());
    const FunctionClass fc = random_function_class(inst, 16, rng.next_u64());
    PessimismOptions options;
    options.delta = 0.1;
    options.ground_truth = inst.mean_reward;
    const double eta = 0.5 + 2.0 * rng.next_double();
    const AlgoResult result = run_kl_pcb(fc, sample_bandit_data(inst, 512, rng.next_u64()),
                                         inst.ref_policy, inst.context_dist, eta, options);
    if (!result.diag.event_e.value_or(false)) continue;
    ++used;
    const auto curve = g_curve(inst, result.diag.pessimistic, eta, grid);
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
      worst_increase = std::max(worst_increase, curve[i + 1] - curve[i]);
    }
  }
  const double seconds = watch.seconds();
  const bool pass = worst_increase <= 1e-12 && seconds < 60.0;
  announce("C05 tilt-curve monotone", pass, seconds,
           fmt("max grid increase=%.3g over 200 pessimistic runs (slack 1e-12)",
               worst_increase));
  CHECK(worst_increase <= 1e-12);
  CHECK(seconds < 60.0);
}

TEST_CASE("C06 confidence event frequency") {
  Stopwatch watch;
  Rng rng(1006);
  const BanditInstance inst = random_instance(2, 2, rng.next_u64(), 0.4);
  const FunctionClass fc = random_function_class(inst, 16, rng.next_u64());
  int held = 0;
  const int runs = 500;
  for (int run = 0; run < runs; ++run) {
    PessimismOptions options;
    options.delta = 0.1;
    options.ground_truth = inst.mean_reward;
    const AlgoResult result = run_kl_pcb(fc, sample_bandit_data(inst, 1024, rng.next_u64()),
                                         inst.ref_policy, inst.context_dist, 1.0, options);
    held += result.diag.event_e.value_or(false) ? 1 : 0;
  }
  const double frequency = static_cast<double>(held) / runs;
  const double seconds = watch.seconds();
  // Target 1 - delta = 0.9; accept the binomial 99% lower bound 0.86.
  const bool pass = frequency >= 0.86 && seconds < 120.0;
  announce("C06 confidence event frequency", pass, seconds,
           fmt("frequency=%.3f over 500 runs at delta=0.1 (accept >= 0.86)", frequency));
  CHECK(frequency >= 0.86);
  CHECK(seconds < 120.0);
}

TEST_CASE("C07 pessimistic softmax rate") {
  Stopwatch watch;
  SweepConfig cfg;
  cfg.instance = random_instance(2, 2, 12345, 0.3);
  cfg.fclass = random_function_class(cfg.instance, 16, 7);
  cfg.algo = Algo::kKlPcb;
  cfg.reg = Regularizer::kl(1.0);
  cfg.n_grid = full_grid();
  cfg.seeds = 100;
  cfg.delta = 0.05;
  cfg.base_seed = 1;
  cfg.workers = 2;
  const auto rows = run_sweep(cfg);
  const RateFitResult fit = rate_fit(rows, RateStatistic::kMedian);

  // The medians themselves must fall strictly with n, not just fit a slope.
  bool strictly_decreasing = true;
  double previous = kInf;
  for (long n : cfg.n_grid) {
    std::vector<double> at_n;
    for (const auto& row : rows) {
      if (row.n == n && row.status == "ok") at_n.push_back(row.subopt);
    }
    const double med = median_of(std::move(at_n));
    strictly_decreasing = strictly_decreasing && med < previous;
    previous = med;
  }

  const double seconds = watch.seconds();
  const bool pass = fit.slope >= -1.25 && fit.slope <= -0.80 && fit.r2 >= 0.95 &&
                    strictly_decreasing && seconds < 300.0;
  announce("C07 pessimistic softmax rate", pass, seconds,
           fmt("slope=%.3f (window [-1.25,-0.80]) r2=%.4f (>= 0.95) medians%s decreasing",
               fit.slope, fit.r2, strictly_decreasing ? "" : " NOT"));
  CHECK(fit.slope >= -1.25);
  CHECK(fit.slope <= -0.80);
  CHECK(fit.r2 >= 0.95);
  CHECK(strictly_decreasing);
  CHECK(seconds < 300.0);
}

TEST_CASE("C08 coverage-free chi-square rate") {
  Stopwatch watch;
  SweepConfig cfg;
  cfg.instance = skewed_gap_instance();
  cfg.fclass = ladder_class(cfg.instance, 0.04);
  cfg.algo = Algo::kFCb;
  cfg.reg = Regularizer::chi2(1.0, 1.0);
  cfg.n_grid = full_grid();
  cfg.seeds = 100;
  cfg.delta = 0.05;
  cfg.base_seed = 2;
  cfg.workers = 2;

  // The skew premise: the greedy policy is poorly covered by the reference.
  Policy greedy;
  greedy.probs = Table(2, 2, 0.0);
  for (int s = 0; s < 2; ++s) {
    int best = cfg.instance.mean_reward(s, 0) >= cfg.instance.mean_reward(s, 1) ? 0 : 1;
    greedy.probs(s, best) = 1.0;
  }
  const double ratio = density_ratio_concentrability(greedy, cfg.instance.ref_policy);

  const RateFitResult fit = rate_fit(run_sweep(cfg), RateStatistic::kMedian);
  const double seconds = watch.seconds();
  const bool pass = ratio > 10.0 && fit.slope >= -1.25 && fit.slope <= -0.80 &&
                    seconds < 300.0;
  announce("C08 coverage-free chi-square rate", pass, seconds,
           fmt("slope=%.3f (window [-1.25,-0.80]) greedy ratio=%.0f (> 10) r2=%.3f",
               fit.slope, ratio, fit.r2));
  CHECK(ratio > 10.0);
  CHECK(fit.slope >= -1.25);
  CHECK(fit.slope <= -0.80);
  CHECK(seconds < 300.0);
}

TEST_CASE("C09 dueling rates") {
  Stopwatch watch;
  SweepConfig pcdb;
  pcdb.instance = random_instance(2, 2, 12345, 0.3);
  pcdb.fclass = random_function_class(pcdb.instance, 16, 7);
  pcdb.algo = Algo::kKlPcdb;
  pcdb.reg = Regularizer::kl(1.0);
  pcdb.n_grid = full_grid();
  pcdb.seeds = 100;
  pcdb.delta = 0.05;
  pcdb.base_seed = 3;
  pcdb.workers = 2;
  const RateFitResult kl_fit = rate_fit(run_sweep(pcdb), RateStatistic::kMedian);

  SweepConfig fcdb = pcdb;
  fcdb.instance = uniform_gap_instance();
  fcdb.fclass = ladder_class(fcdb.instance, 0.08);
  fcdb.algo = Algo::kFCdb;
  fcdb.reg = Regularizer::chi2(1.0, 1.0);
  fcdb.base_seed = 4;
  const RateFitResult f_fit = rate_fit(run_sweep(fcdb), RateStatistic::kMedian);

  const double seconds = watch.seconds();
  const bool in_window = kl_fit.slope >= -1.25 && kl_fit.slope <= -0.75 &&
                         f_fit.slope >= -1.25 && f_fit.slope <= -0.75;
  const bool pass = in_window && seconds < 600.0;
  announce("C09 dueling rates", pass, seconds,
           fmt("pessimistic slope=%.3f, chi-square slope=%.3f (window [-1.25,-0.75])",
               kl_fit.slope, f_fit.slope));
  CHECK(kl_fit.slope >= -1.25);
  CHECK(kl_fit.slope <= -0.75);
  CHECK(f_fit.slope >= -1.25);
  CHECK(f_fit.slope <= -0.75);
  CHECK(seconds < 600.0);
}

TEST_CASE("C10 lower-bound pairwise floors") {
  Stopwatch watch;
  Rng rng(1010);

  // (a) KL family: adjacent instances differ at one state; any policy pays
  // at least min(eta delta^2 / 8, 3 delta / 10) across the pair at that state.
  const HardFamily kl_family = kl_hard_family(2, 4.0, 8.0, 512);
  const Regularizer kl_reg = Regularizer::kl(kl_family.params.eta);
  const double kl_floor = std::min(kl_family.params.eta * kl_family.params.delta *
                                       kl_family.params.delta / 8.0,
                                   0.3 * kl_family.params.delta);
  std::vector<std::vector<double>> kl_opt_values;
  for (const BanditInstance& inst : kl_family.instances) {
    const Policy star = optimal_policy(inst, kl_reg);
    std::vector<double> values(inst.num_states);
    for (int s = 0; s < inst.num_states; ++s) values[s] = state_objective(inst, kl_reg, star, s);
    kl_opt_values.push_back(std::move(values));
  }
  double kl_margin = kInf;
  for (int trial = 0; trial < 1000; ++trial) {
    const Policy pi = random_full_support_policy(2, 2, rng);
    for (std::size_t i = 0; i < kl_family.instances.size(); ++i) {
      for (int s = 0; s < 2; ++s) {
        const std::size_t j = i ^ (1ULL << s);
        if (j < i) continue;
        const double lhs =
            kl_opt_values[i][s] - state_objective(kl_family.instances[i], kl_reg, pi, s) +
            kl_opt_values[j][s] - state_objective(kl_family.instances[j], kl_reg, pi, s);
        kl_margin = std::min(kl_margin, lhs - kl_floor);
      }
    }
  }

  // (b) chi-square dueling family: the pair floor is eta delta^2 / alpha.
  const HardFamily f_family =
      dueling_hard_family(8, 0.0, 1.0, 128, DuelingFamilyKind::kChi2, 1.0);
  const Regularizer f_reg = Regularizer::chi2(f_family.params.eta, f_family.params.alpha);
  const double f_floor =
      f_family.params.eta * f_family.params.delta * f_family.params.delta /
      f_family.params.alpha;
  std::vector<std::vector<double>> f_opt_values;
  for (const BanditInstance& inst : f_family.instances) {
    const Policy star = optimal_policy(inst, f_reg);
    std::vector<double> values(inst.num_states);
    for (int s = 0; s < inst.num_states; ++s) values[s] = state_objective(inst, f_reg, star, s);
    f_opt_values.push_back(std::move(values));
  }
  double f_margin = kInf;
  for (int trial = 0; trial < 1000; ++trial) {
    const Policy pi = random_full_support_policy(8, 2, rng);
    std::vector<std::vector<double>> pi_values(f_family.instances.size());
    for (std::size_t i = 0; i < f_family.instances.size(); ++i) {
      pi_values[i].resize(8);
      for (int s = 0; s < 8; ++s) {
        pi_values[i][s] = state_objective(f_family.instances[i], f_reg, pi, s);
      }
    }
    for (std::size_t i = 0; i < f_family.instances.size(); ++i) {
      for (int s = 0; s < 8; ++s) {
        const std::size_t j = i ^ (1ULL << s);
        if (j < i) continue;
        const double lhs = f_opt_values[i][s] - pi_values[i][s] + f_opt_values[j][s] -
                           pi_values[j][s];
        f_margin = std::min(f_margin, lhs - f_floor);
      }
    }
  }

  const double seconds = watch.seconds();
  const bool pass = kl_margin >= -1e-9 && f_margin >= -1e-9 && seconds < 120.0;
  announce("C10 lower-bound floors", pass, seconds,
           fmt("kl margin=%.3g, chi-square dueling margin=%.3g (floor slack 1e-9)",
               kl_margin, f_margin));
  CHECK(kl_margin >= -1e-9);
  CHECK(f_margin >= -1e-9);
  CHECK(seconds < 120.0);
}

TEST_CASE("C11 greedy code guarantees") {
  Stopwatch watch;
  bool all_ok = true;
  std::string detail;
  for (int S : {8, 16, 32}) {
    const auto code = gv_code(S);
    const auto required = static_cast<std::size_t>(std::ceil(std::exp(S / 8.0)));
    int min_dist = S;
    for (std::size_t i = 0; i < code.size(); ++i) {
      for (std::size_t j = i + 1; j < code.size(); ++j) {
        int d = 0;
        for (int s = 0; s < S; ++s) d += code[i][s] != code[j][s];
        min_dist = std::min(min_dist, d);
      }
    }
    const bool ok = code.size() >= required && min_dist * 2 >= S;
    all_ok = all_ok && ok;
    detail += fmt("S=%d:|V|=%zu(>=%zu),d=%d(>=%d) ", S, code.size(), required, min_dist,
                  (S + 1) / 2);
    CHECK(code.size() >= required);
    CHECK(min_dist * 2 >= S);
  }
  const double seconds = watch.seconds();
  announce("C11 greedy code guarantees", all_ok && seconds < 10.0, seconds, detail);
  CHECK(seconds < 10.0);
}

TEST_CASE("C12 hard-family construction identities") {
  Stopwatch watch;
  const HardFamily family = kl_hard_family(2, 4.0, 8.0, 512);
  const Regularizer reg = Regularizer::kl(family.params.eta);
  double identity_gap = 0.0;
  double worst_ratio = 0.0;
  for (std::size_t i = 0; i < family.instances.size(); ++i) {
    const BanditInstance& inst = family.instances[i];
    const Policy star = optimal_policy(inst, reg);
    for (int s = 0; s < inst.num_states; ++s) {
      const double tilt = std::exp(family.params.eta *
                                   (family.params.alpha +
                                    family.index_signs[i][s] * family.params.delta));
      const double closed = tilt / (tilt + family.params.c_star - 1.0);
      identity_gap = std::max(identity_gap, std::abs(star(s, 0) - closed));
      identity_gap = std::max(identity_gap, std::abs(star(s, 1) - (1.0 - closed)));
    }
    worst_ratio = std::max(worst_ratio, density_ratio_concentrability(star, inst.ref_policy));
  }
  const double seconds = watch.seconds();
  const bool pass =
      identity_gap <= 1e-12 && worst_ratio <= 4.0 + 1e-12 && seconds < 10.0;
  announce("C12 construction identities", pass, seconds,
           fmt("closed-form gap=%.3g (tol 1e-12), max ratio=%.6f (<= C*=4)", identity_gap,
               worst_ratio));
  CHECK(identity_gap <= 1e-12);
  CHECK(worst_ratio <= 4.0 + 1e-12);
  CHECK(seconds < 10.0);
}

TEST_CASE("C13 pessimism beats the plain baseline on an undercovered instance") {
  Stopwatch watch;
  // State 0 has a rarely-played action whose class members mostly
  // overestimate it: with ~1 expected observation of that action at n = 4096,
  // the least-squares pick is usually an overestimate and the plain softmax
  // chases it; the bonus neutralizes the cell. State 1 is well covered and
  // carries no disagreement.
  BanditInstance inst;
  inst.num_states = 2;
  inst.num_actions = 2;
  inst.context_dist = {0.5, 0.5};
  inst.mean_reward = Table(2, 2);
  inst.mean_reward(0, 0) = 0.5;
  inst.mean_reward(0, 1) = 0.52;
  inst.mean_reward(1, 0) = 0.6;
  inst.mean_reward(1, 1) = 0.4;
  const double p_rare = 0.00048;
  inst.ref_policy.probs = Table(2, 2);
  inst.ref_policy.probs(0, 0) = 1.0 - p_rare;
  inst.ref_policy.probs(0, 1) = p_rare;
  inst.ref_policy.probs(1, 0) = 0.5;
  inst.ref_policy.probs(1, 1) = 0.5;
  inst.noise = NoiseModel::bernoulli();

  FunctionClass fc;
  for (double v : {0.95, 0.925, 0.9, 0.875, 0.85, 0.825, 0.8, 0.52, 0.775, 0.75, 0.725,
                   0.7, 0.675, 0.65, 0.625, 0.6}) {
    Table g = inst.mean_reward;
    g(0, 1) = v;
    if (v == 0.52) fc.realizable_index = fc.size();
    fc.members.push_back(g);
  }

  SweepConfig cfg;
  cfg.instance = inst;
  cfg.fclass = fc;
  cfg.reg = Regularizer::kl(8.0);
  cfg.n_grid = {4096};
  cfg.seeds = 100;
  cfg.delta = 0.05;
  cfg.base_seed = 5;
  cfg.workers = 2;

  cfg.algo = Algo::kKlPcb;
  std::vector<double> pessimistic;
  for (const auto& row : run_sweep(cfg)) {
    REQUIRE(row.status == "ok");
    pessimistic.push_back(row.subopt);
  }
  cfg.algo = Algo::kLsSoftmaxBaseline;
  std::vector<double> baseline;
  for (const auto& row : run_sweep(cfg)) {
    REQUIRE(row.status == "ok");
    baseline.push_back(row.subopt);
  }
  const double pcb_median = median_of(pessimistic);
  const double base_median = median_of(baseline);
  const double seconds = watch.seconds();
  const bool pass = pcb_median <= base_median && seconds < 120.0;
  announce("C13 pessimism benefit", pass, seconds,
           fmt("median subopt: pessimistic=%.3g <= baseline=%.3g at n=4096", pcb_median,
               base_median));
  CHECK(pcb_median <= base_median);
  CHECK(seconds < 120.0);
}
