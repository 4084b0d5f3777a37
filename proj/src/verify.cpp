#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "fdbandits/algorithms.hpp"
#include "fdbandits/evaluation.hpp"
#include "fdbandits/harness.hpp"
#include "fdbandits/instances.hpp"
#include "fdbandits/solvers.hpp"
#include "fdbandits/uncertainty.hpp"

namespace fdbandits {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Policy random_full_support_policy(int S, int A, Rng& rng) {
  Policy pi;
  pi.probs = Table(S, A);
  for (int s = 0; s < S; ++s) {
    double sum = 0.0;
    for (int a = 0; a < A; ++a) {
      const double v = rng.next_open_double();
      pi.probs(s, a) = v;
      sum += v;
    }
    for (int a = 0; a < A; ++a) pi.probs(s, a) /= sum;
  }
  return pi;
}

// Random policy with support inside the reference support; wide tilts cover
// both near-reference and near-greedy behavior.
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

Table random_reward_table(int S, int A, Rng& rng) {
  Table g(S, A);
  for (double& v : g.data()) v = rng.next_double();
  return g;
}

struct CheckBuilder {
  std::vector<CheckResult>& out;

  void upper(const std::string& name, double measured, double threshold,
             const std::string& note = "") {
    out.push_back({name, measured <= threshold, measured, threshold, note});
  }
  void lower(const std::string& name, double measured, double threshold,
             const std::string& note = "") {
    out.push_back({name, measured >= threshold, measured, threshold, note});
  }
};

// ---------------------------------------------------------------------------
// solvers
// ---------------------------------------------------------------------------

void check_solvers(std::vector<CheckResult>& checks, std::uint64_t seed) {
  CheckBuilder add{checks};
  Rng rng = Rng::substream(seed, 101);

  double kl_gap = 0.0;
  double chi2_gap = 0.0;
  for (int trial = 0; trial < 60; ++trial) {
    const int S = 1 + static_cast<int>(rng.next_u64() % 6);
    const int A = 2 + static_cast<int>(rng.next_u64() % 5);
    const BanditInstance inst = random_instance(S, A, rng.next_u64(), rng.next_double());
    const Table g = random_reward_table(S, A, rng);
    const double eta = 0.5 + 3.5 * rng.next_double();
    const double alpha = 0.5 + rng.next_double();

    const Policy softmax = kl_softmax_policy(g, inst.ref_policy, eta);
    const Policy dual_kl = f_dual_policy(g, inst.ref_policy, Regularizer::kl_as_fdiv(eta)).policy;
    kl_gap = std::max(kl_gap, sup_distance(softmax.probs, dual_kl.probs));

    const Policy water = chi2_closed_form(g, inst.ref_policy, eta, alpha);
    const Policy dual_chi2 =
        f_dual_policy(g, inst.ref_policy, Regularizer::chi2(eta, alpha)).policy;
    chi2_gap = std::max(chi2_gap, sup_distance(water.probs, dual_chi2.probs));
  }
  add.upper("solvers.softmax_dual_agreement", kl_gap, 1e-8);
  add.upper("solvers.chi2_dual_agreement", chi2_gap, 1e-8);

  double worst_margin = kInf;
  double shift_gap = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int S = 1 + static_cast<int>(rng.next_u64() % 4);
    const int A = 2 + static_cast<int>(rng.next_u64() % 3);
    BanditInstance inst = random_instance(S, A, rng.next_u64(), 0.5 * rng.next_double());
    const double eta = 0.5 + 2.5 * rng.next_double();
    for (const bool use_kl : {true, false}) {
      const Regularizer reg = use_kl ? Regularizer::kl(eta) : Regularizer::chi2(eta, 1.0);
      const Policy star = optimal_policy(inst, reg);
      const double best = objective(inst, reg, star);
      for (int probe = 0; probe < 100; ++probe) {
        Policy candidate = random_supported_policy(inst.ref_policy, rng);
        worst_margin = std::min(worst_margin, best - objective(inst, reg, candidate));
      }
    }

    // Per-state constant shifts must not move either solver's output.
    Table shifted = inst.mean_reward;
    std::vector<double> offsets(S);
    for (int s = 0; s < S; ++s) {
      offsets[s] = rng.next_gaussian(0.0, 1.0);
      for (int a = 0; a < A; ++a) shifted(s, a) += offsets[s];
    }
    const Policy base_soft = kl_softmax_policy(inst.mean_reward, inst.ref_policy, eta);
    const Policy shift_soft = kl_softmax_policy(shifted, inst.ref_policy, eta);
    shift_gap = std::max(shift_gap, sup_distance(base_soft.probs, shift_soft.probs));
    const Regularizer chi2 = Regularizer::chi2(eta, 1.0);
    const Policy base_dual = f_dual_policy(inst.mean_reward, inst.ref_policy, chi2).policy;
    const Policy shift_dual = f_dual_policy(shifted, inst.ref_policy, chi2).policy;
    shift_gap = std::max(shift_gap, sup_distance(base_dual.probs, shift_dual.probs));
  }
  add.lower("solvers.optimality_margin", worst_margin, -1e-9,
            "objective(solver) - objective(random policy)");
  add.upper("solvers.shift_invariance", shift_gap, 1e-12);
}

// ---------------------------------------------------------------------------
// uncertainty
// ---------------------------------------------------------------------------

double confidence_event_frequency(std::uint64_t seed, int runs, long n, double delta) {
  Rng rng = Rng::substream(seed, 202);
  const BanditInstance inst = random_instance(2, 2, rng.next_u64(), 0.4);
  const FunctionClass fc = random_function_class(inst, 16, rng.next_u64());
  int held = 0;
  for (int run = 0; run < runs; ++run) {
    PessimismOptions options;
    options.delta = delta;
    options.ground_truth = inst.mean_reward;
    const Dataset data = sample_bandit_data(inst, n, rng.next_u64());
    const AlgoResult result =
        run_kl_pcb(fc, data, inst.ref_policy, inst.context_dist, 1.0, options);
    held += result.diag.event_e.value_or(false) ? 1 : 0;
  }
  return static_cast<double>(held) / runs;
}

void check_uncertainty(std::vector<CheckResult>& checks, std::uint64_t seed) {
  CheckBuilder add{checks};
  Rng rng = Rng::substream(seed, 303);

  double shift_gap = 0.0;
  double scale_gap = 0.0;
  double dueling_const = 0.0;
  double single_minus_all = -kInf;
  for (int trial = 0; trial < 40; ++trial) {
    const int S = 1 + static_cast<int>(rng.next_u64() % 4);
    const int A = 2 + static_cast<int>(rng.next_u64() % 3);
    const BanditInstance inst = random_instance(S, A, rng.next_u64(), 0.6 * rng.next_double());
    const auto& rho = inst.context_dist;

    Table g = random_reward_table(S, A, rng);
    Table h = random_reward_table(S, A, rng);
    for (double& v : g.data()) v *= 0.4;  // leave room for shifts
    for (double& v : h.data()) v *= 0.4;

    // Global constant shift of both members.
    const double c = 0.3 * rng.next_double();
    Table gs = g;
    Table hs = h;
    for (double& v : gs.data()) v += c;
    for (double& v : hs.data()) v += c;
    const FunctionClass pair{{g, h}, std::nullopt};
    const FunctionClass pair_shift{{gs, hs}, std::nullopt};
    const Table base = d2_table(pair, inst.ref_policy, rho, D2Variant::kBandit);
    const Table shifted = d2_table(pair_shift, inst.ref_policy, rho, D2Variant::kBandit);
    shift_gap = std::max(shift_gap, sup_distance(base, shifted));

    // Scaling g - h by a constant.
    const double scale = 0.25 + 0.5 * rng.next_double();
    Table hscaled = g;
    for (std::size_t k = 0; k < hscaled.data().size(); ++k) {
      hscaled.data()[k] -= scale * (g.data()[k] - h.data()[k]);
    }
    const FunctionClass pair_scaled{{g, hscaled}, std::nullopt};
    for (const auto variant : {D2Variant::kBandit, D2Variant::kDueling}) {
      const Table a = d2_table(pair, inst.ref_policy, rho, variant);
      const Table b = d2_table(pair_scaled, inst.ref_policy, rho, variant);
      scale_gap = std::max(scale_gap, sup_distance(a, b));
    }

    // Per-state constant differences vanish under the dueling variant.
    Table hconst = g;
    for (int s = 0; s < S; ++s) {
      const double off = 0.2 * rng.next_double();
      for (int a = 0; a < A; ++a) hconst(s, a) += off;
    }
    const FunctionClass pair_const{{g, hconst}, std::nullopt};
    const Table dueling = d2_table(pair_const, inst.ref_policy, rho, D2Variant::kDueling);
    for (double v : dueling.data()) dueling_const = std::max(dueling_const, v);

    // Single-policy concentrability never exceeds all-policy.
    const FunctionClass fc = random_function_class(inst, 8, rng.next_u64());
    const Policy eval = random_full_support_policy(S, A, rng);
    for (const auto variant : {D2Variant::kBandit, D2Variant::kDueling}) {
      const double single = d2_concentrability(fc, eval, inst.ref_policy, rho,
                                               CoverageMode::kSingle, variant);
      const double all = d2_concentrability(fc, eval, inst.ref_policy, rho,
                                            CoverageMode::kAll, variant);
      if (std::isfinite(all)) single_minus_all = std::max(single_minus_all, single - all);
    }
  }
  add.upper("uncertainty.d2_global_shift_invariance", shift_gap, 1e-9);
  add.upper("uncertainty.d2_pair_scale_invariance", scale_gap, 1e-9);
  add.upper("uncertainty.d2_dueling_state_constants", dueling_const, 1e-12);
  add.upper("uncertainty.single_vs_all_gap", single_minus_all, 1e-12);
  add.lower("uncertainty.confidence_event_frequency",
            confidence_event_frequency(seed, 300, 1024, 0.1), 0.9,
            "fraction of runs with the estimate inside the bonus band");
}

// ---------------------------------------------------------------------------
// evaluation
// ---------------------------------------------------------------------------

double max_g_curve_increase(std::uint64_t seed, int runs) {
  Rng rng = Rng::substream(seed, 404);
  std::vector<double> grid(21);
  for (int i = 0; i <= 20; ++i) grid[i] = i / 20.0;
  double worst = -kInf;
  int used = 0;
  while (used < runs) {
    const BanditInstance inst = random_instance(2, 2, rng.next_u64(), 0.5 * rng.next_double());
    const FunctionClass fc = random_function_class(inst, 16, rng.next_u64());
    PessimismOptions options;
    options.delta = 0.1;
    options.ground_truth = inst.mean_reward;
    const Dataset data = sample_bandit_data(inst, 512, rng.next_u64());
    const double eta = 0.5 + 2.0 * rng.next_double();
    const AlgoResult result =
        run_kl_pcb(fc, data, inst.ref_policy, inst.context_dist, eta, options);
    if (!result.diag.event_e.value_or(false)) continue;
    ++used;
    const auto curve = g_curve(inst, result.diag.pessimistic, eta, grid);
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
      worst = std::max(worst, curve[i + 1] - curve[i]);
    }
  }
  return worst;
}

double max_moment_over_nonpositive_laws(std::uint64_t seed, int laws) {
  Rng rng = Rng::substream(seed, 505);
  double worst = -kInf;
  for (int i = 0; i < laws; ++i) {
    const int k = 1 + static_cast<int>(rng.next_u64() % 8);
    std::vector<double> values(k);
    std::vector<double> weights(k);
    double sum = 0.0;
    for (int j = 0; j < k; ++j) {
      values[j] = -rng.next_double();  // support in [-1, 0]
      weights[j] = rng.next_open_double();
      sum += weights[j];
    }
    for (double& w : weights) w /= sum;
    worst = std::max(worst, moment_check(values, weights));
  }
  return worst;
}

void check_evaluation(std::vector<CheckResult>& checks, std::uint64_t seed) {
  CheckBuilder add{checks};
  Rng rng = Rng::substream(seed, 606);

  double identity_gap = 0.0;
  double min_raw_gap = kInf;
  double linearity_gap = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int S = 1 + static_cast<int>(rng.next_u64() % 4);
    const int A = 2 + static_cast<int>(rng.next_u64() % 3);
    const BanditInstance inst = random_instance(S, A, rng.next_u64(), 0.6 * rng.next_double());
    const double eta = 0.5 + 3.0 * rng.next_double();
    const Regularizer reg = Regularizer::kl(eta);
    const Policy pi = random_supported_policy(inst.ref_policy, rng);

    const double direct = objective(inst, reg, optimal_policy(inst, reg)) -
                          objective(inst, reg, pi);
    min_raw_gap = std::min(min_raw_gap, direct);
    identity_gap = std::max(identity_gap,
                            std::abs(suboptimality(inst, reg, pi) -
                                     kl_subopt_identity(inst, eta, pi)));

    // J is affine in a constant reward offset; the divergence term is
    // untouched.
    const double c = rng.next_double();
    BanditInstance shifted = inst;
    for (double& v : shifted.mean_reward.data()) v += c;
    linearity_gap = std::max(linearity_gap, std::abs(objective(shifted, reg, pi) -
                                                     objective(inst, reg, pi) - c));
  }
  add.upper("evaluation.kl_identity_gap", identity_gap, 1e-10);
  add.lower("evaluation.subopt_nonnegative", min_raw_gap, -1e-12,
            "raw objective gap before flooring");
  add.upper("evaluation.objective_reward_shift", linearity_gap, 1e-12);
  add.upper("evaluation.tilt_curve_monotone", max_g_curve_increase(seed, 100), 1e-12,
            "largest increase along the gamma grid on pessimistic runs");
  add.upper("evaluation.moment_fuzz", max_moment_over_nonpositive_laws(seed, 10000), 1e-12);
}

// ---------------------------------------------------------------------------
// lemmas: the three probabilistic/structural facts the analysis rests on
// ---------------------------------------------------------------------------

void check_lemmas(std::vector<CheckResult>& checks, std::uint64_t seed) {
  CheckBuilder add{checks};
  add.upper("lemmas.moment_nonpositive_fuzz", max_moment_over_nonpositive_laws(seed, 10000),
            1e-12);
  add.upper("lemmas.tilt_curve_monotone", max_g_curve_increase(seed, 200), 1e-12);
  add.lower("lemmas.confidence_event_frequency",
            confidence_event_frequency(seed, 500, 1024, 0.1), 0.9);
}

// ---------------------------------------------------------------------------
// lower bounds
// ---------------------------------------------------------------------------

void check_lower_bounds(std::vector<CheckResult>& checks, std::uint64_t seed) {
  CheckBuilder add{checks};
  Rng rng = Rng::substream(seed, 707);

  {
    const HardFamily family = kl_hard_family(2, 4.0, 8.0, 512);
    const double eta = family.params.eta;
    const double delta = family.params.delta;
    const double floor = std::min(eta * delta * delta / 8.0, 0.3 * delta);
    const Regularizer reg = Regularizer::kl(eta);

    double identity_gap = 0.0;
    double worst_ratio = 0.0;
    std::vector<std::vector<double>> opt_state_values;
    for (int i = 0; i < static_cast<int>(family.instances.size()); ++i) {
      const BanditInstance& inst = family.instances[i];
      const Policy star = optimal_policy(inst, reg);
      // Closed form of the optimal policy on this construction.
      const double c = family.params.c_star;
      const double alpha = family.params.alpha;
      for (int s = 0; s < inst.num_states; ++s) {
        const double tilt = std::exp(eta * (alpha + family.index_signs[i][s] * delta));
        const double p0 = tilt / (tilt + c - 1.0);
        identity_gap = std::max(identity_gap, std::abs(star(s, 0) - p0));
        identity_gap = std::max(identity_gap, std::abs(star(s, 1) - (1.0 - p0)));
      }
      worst_ratio = std::max(worst_ratio,
                             density_ratio_concentrability(star, inst.ref_policy));
      std::vector<double> values(inst.num_states);
      for (int s = 0; s < inst.num_states; ++s) values[s] = state_objective(inst, reg, star, s);
      opt_state_values.push_back(std::move(values));
    }
    add.upper("lower_bounds.kl_optimal_policy_identity", identity_gap, 1e-12);
    add.upper("lower_bounds.kl_single_policy_ratio", worst_ratio, family.params.c_star + 1e-12);

    double min_margin = kInf;
    const int S = family.instances[0].num_states;
    for (int trial = 0; trial < 1000; ++trial) {
      const Policy pi = random_full_support_policy(S, 2, rng);
      for (int i = 0; i < static_cast<int>(family.instances.size()); ++i) {
        for (int j = i + 1; j < static_cast<int>(family.instances.size()); ++j) {
          int differ = -1;
          int count = 0;
          for (int s = 0; s < S; ++s) {
            if (family.index_signs[i][s] != family.index_signs[j][s]) {
              differ = s;
              ++count;
            }
          }
          if (count != 1) continue;
          const double lhs =
              opt_state_values[i][differ] -
              state_objective(family.instances[i], reg, pi, differ) +
              opt_state_values[j][differ] -
              state_objective(family.instances[j], reg, pi, differ);
          min_margin = std::min(min_margin, lhs - floor);
        }
      }
    }
    add.lower("lower_bounds.kl_pairwise_floor", min_margin, -1e-9,
              "per-state adjacent-pair suboptimality minus the floor");
  }

  {
    const HardFamily family = dueling_hard_family(8, 0.0, 1.0, 128, DuelingFamilyKind::kChi2,
                                                  1.0);
    const double eta = family.params.eta;
    const double alpha = family.params.alpha;
    const double delta = family.params.delta;
    const double floor = eta * delta * delta / alpha;
    const Regularizer reg = Regularizer::chi2(eta, alpha);
    const int S = family.instances[0].num_states;

    std::vector<std::vector<double>> opt_state_values;
    for (const BanditInstance& inst : family.instances) {
      const Policy star = optimal_policy(inst, reg);
      std::vector<double> values(S);
      for (int s = 0; s < S; ++s) values[s] = state_objective(inst, reg, star, s);
      opt_state_values.push_back(std::move(values));
    }
    // Adjacent pairs differ in exactly one sign; on the hypercube these are
    // index pairs at XOR distance one bit.
    double min_margin = kInf;
    for (int trial = 0; trial < 1000; ++trial) {
      const Policy pi = random_full_support_policy(S, 2, rng);
      std::vector<std::vector<double>> pi_state_values(family.instances.size());
      for (std::size_t i = 0; i < family.instances.size(); ++i) {
        pi_state_values[i].resize(S);
        for (int s = 0; s < S; ++s) {
          pi_state_values[i][s] = state_objective(family.instances[i], reg, pi, s);
        }
      }
      for (std::size_t i = 0; i < family.instances.size(); ++i) {
        for (int s = 0; s < S; ++s) {
          const std::size_t j = i ^ (1ULL << s);
          if (j < i) continue;
          const double lhs = opt_state_values[i][s] - pi_state_values[i][s] +
                             opt_state_values[j][s] - pi_state_values[j][s];
          min_margin = std::min(min_margin, lhs - floor);
        }
      }
    }
    add.lower("lower_bounds.chi2_dueling_pairwise_floor", min_margin, -1e-9);
  }

  {
    double min_distance_margin = kInf;
    double min_count_margin = kInf;
    for (int S : {8, 16}) {
      const auto code = gv_code(S);
      const double required = std::ceil(std::exp(S / 8.0));
      min_count_margin = std::min(min_count_margin, code.size() - required);
      int min_dist = S;
      for (std::size_t i = 0; i < code.size(); ++i) {
        for (std::size_t j = i + 1; j < code.size(); ++j) {
          int d = 0;
          for (int s = 0; s < S; ++s) d += code[i][s] != code[j][s];
          min_dist = std::min(min_dist, d);
        }
      }
      min_distance_margin = std::min(min_distance_margin, min_dist - S / 2.0);
    }
    add.lower("lower_bounds.code_cardinality_margin", min_count_margin, 0.0);
    add.lower("lower_bounds.code_distance_margin", min_distance_margin, 0.0);
  }
}

}  // namespace

VerifyReport verify(VerifySuite suite, std::uint64_t seed) {
  VerifyReport report;
  const bool all = suite == VerifySuite::kAll;
  if (all || suite == VerifySuite::kSolvers) check_solvers(report.checks, seed);
  if (all || suite == VerifySuite::kUncertainty) check_uncertainty(report.checks, seed);
  if (all || suite == VerifySuite::kEvaluation) check_evaluation(report.checks, seed);
  if (all || suite == VerifySuite::kLemmas) check_lemmas(report.checks, seed);
  if (all || suite == VerifySuite::kLowerBounds) check_lower_bounds(report.checks, seed);
  return report;
}

}  // namespace fdbandits
