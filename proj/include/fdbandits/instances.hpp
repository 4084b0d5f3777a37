#ifndef FDBANDITS_INSTANCES_HPP
#define FDBANDITS_INSTANCES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fdbandits/core.hpp"

namespace fdbandits {

// Uniform rho, i.i.d. uniform rewards; ref_skew interpolates the reference
// policy between uniform (0) and a random nearly-degenerate row-stochastic
// matrix (1). Every reference entry stays >= 1e-4.
BanditInstance random_instance(int num_states, int num_actions, std::uint64_t seed,
                               double ref_skew);

// Finite hypothesis class containing the instance's truth: size-1 random
// tables plus the true mean reward, with the truth's position derived from
// the seed. Realizability is recorded.
FunctionClass random_function_class(const BanditInstance& inst, int size, std::uint64_t seed);

// Class of tables truth + scale * direction over the given scales (0 is
// always included for realizability). Used to build benchmark classes whose
// estimation error decays smoothly with the sample size rather than dropping
// to zero once the smallest gap resolves. Throws if any member leaves [0,1].
FunctionClass perturbation_ladder_class(const BanditInstance& inst, const Table& direction,
                                        const std::vector<double>& scales);

enum class FamilyKind { kKlBandit, kChi2Bandit, kKlDueling, kChi2Dueling };

struct HardFamilyParams {
  double c_star = 0.0;
  double eta = 0.0;
  double alpha = 0.0;
  double delta = 0.0;
  long n_target = 0;
};

// A set of instances indexed by sign vectors (or codewords) sharing
// (S, A, rho, pi_ref) and one realizable function class: member i of
// shared_class is exactly instance i's mean reward.
struct HardFamily {
  FamilyKind kind = FamilyKind::kKlBandit;
  bool preference = false;  // sampled as preference data when true
  std::vector<BanditInstance> instances;
  std::vector<std::vector<int>> index_signs;  // +1/-1 per state, per instance
  FunctionClass shared_class;
  HardFamilyParams params;

  // shared_class with realizable_index pointing at instance i's truth.
  FunctionClass class_for(int i) const;
};

// Two-action family indexed by all sign vectors tau in {+1,-1}^S:
//   pi_ref(a0|s) = 1/C*,  r_tau(s, a0) = 1/2 + tau_s delta,
//   r_tau(s, a1) = 1/2 - alpha,  alpha = log(C* - 1) / eta,
//   delta = sqrt(S C* / n_target).
// Requires eta > 4 log 2, C* in (2, exp(eta/4)], n_target >= 16 S C*.
HardFamily kl_hard_family(int num_states, double c_star, double eta, long n_target);

// Two-action family indexed by a Gilbert-Varshamov code:
//   r_v(s, a0) = 1/2 + v_s delta, r_v(s, a1) = 1/2 - v_s delta,
//   delta = 16 sqrt(alpha / (eta n_target)), uniform reference.
// Requires S >= 32 log 2 and n_target >= S max{16, eta^2/alpha^2}; rejects
// parameterizations whose means would leave [0,1] or whose optimal policies
// would not be interior (delta > alpha/eta).
HardFamily chi2_hard_family(int num_states, double alpha, double eta, long n_target);

enum class DuelingFamilyKind { kKl, kChi2 };

// Preference-feedback counterparts: the KL kind reuses the kl_hard_family
// tables; the chi-square kind uses r_tau(s, a) = 1/2 + a tau_s delta over the
// full hypercube with delta = sqrt(S / n_target) <= 1/4.
HardFamily dueling_hard_family(int num_states, double c_star, double eta, long n_target,
                               DuelingFamilyKind kind, double alpha = 1.0);

// Greedy binary code: scans {+1,-1}^S in lexicographic order (all-(+1)
// first), keeping each vector at Hamming distance >= S/2 from every kept one.
// Verifies |V| >= ceil(exp(S/8)) and throws if the bound fails. S in [8, 32].
std::vector<std::vector<int>> gv_code(int num_states);

// n i.i.d. rows: s ~ rho, a ~ pi_ref(.|s), r from the noise model.
Dataset sample_bandit_data(const BanditInstance& inst, long n, std::uint64_t seed);

// n i.i.d. rows: s ~ rho, a1, a2 ~ pi_ref(.|s), y ~ Bernoulli(sigma(dr)).
PreferenceDataset sample_preference_data(const BanditInstance& inst, long n,
                                         std::uint64_t seed);

// Directory layout: family.json (kind, params, index map, shared class) plus
// one instance_###.json per member.
void save_family(const HardFamily& family, const std::string& dir);
HardFamily load_family(const std::string& dir);

}  // namespace fdbandits

#endif  // FDBANDITS_INSTANCES_HPP
