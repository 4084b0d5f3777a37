#ifndef FDBANDITS_UNCERTAINTY_HPP
#define FDBANDITS_UNCERTAINTY_HPP

#include <span>

#include "fdbandits/core.hpp"

namespace fdbandits {

// Confidence radius: sqrt(128 log(2 cover_n / delta) / (3n) + 18 eps_c).
double beta_radius(long n, double delta, double eps_c, long cover_n);

enum class D2Variant { kBandit, kDueling };

// Full S x A table of D^2 values for the class against behavior policy pi.
//
// Bandit variant, entry (s,a):
//   sup_{g,h in F} (g(s,a)-h(s,a))^2 / E_{(s',a') ~ rho x pi}[(g-h)^2]
// Dueling variant centers the numerator by the pi-mean bias
//   b_{g,h}(s) = clamp(E_{a'~pi(.|s)}[(g-h)(s,a')], -1, 1)
// and uses E_{s'~rho} Var_{a'~pi(.|s')}[(g-h)(s',a')] as the denominator.
//
// Conventions: a pair with zero denominator contributes 0 when its numerator
// is zero and +infinity otherwise. Results are cached per (F, pi, rho,
// variant) content hash; the cache is safe for concurrent use.
Table d2_table(const FunctionClass& fc, const Policy& pi, std::span<const double> rho,
               D2Variant variant);

double d2_bandit(const FunctionClass& fc, const Policy& pi, std::span<const double> rho,
                 int s, int a);
double d2_dueling(const FunctionClass& fc, const Policy& pi, std::span<const double> rho,
                  int s, int a);

struct BonusTable {
  Table values;  // Gamma_n(s,a) = beta * sqrt(D^2(s,a)); may hold +infinity
  double beta = 0.0;
};

BonusTable bonus_table(const FunctionClass& fc, const Policy& pi_ref,
                       std::span<const double> rho, double beta, D2Variant variant);

// sup_{s,a} pi(a|s) / pi_ref(a|s) with 0/0 -> 0 and x/0 -> +infinity.
double density_ratio_concentrability(const Policy& pi, const Policy& pi_ref);

enum class CoverageMode { kSingle, kAll };

// All-policy: sup_{s,a} D^2(s,a). Single-policy: E_{(s,a) ~ rho x pi_eval} D^2(s,a)
// (zero-probability cells do not contribute, even when their D^2 is infinite).
double d2_concentrability(const FunctionClass& fc, const Policy& pi_eval,
                          const Policy& pi_ref, std::span<const double> rho,
                          CoverageMode mode, D2Variant variant);

}  // namespace fdbandits

#endif  // FDBANDITS_UNCERTAINTY_HPP
