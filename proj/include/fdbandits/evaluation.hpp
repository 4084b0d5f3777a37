#ifndef FDBANDITS_EVALUATION_HPP
#define FDBANDITS_EVALUATION_HPP

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fdbandits/core.hpp"

namespace fdbandits {

// Exact regularized objective
//   J(pi) = E_{rho x pi}[r] - eta^{-1} E_rho[ D(pi(.|s) || pi_ref(.|s)) ]
// by finite sums, with 0 log 0 = 0. Returns -infinity when pi puts mass
// outside the support of pi_ref (KL convention; FDiv likewise when f diverges
// at the boundary).
double objective(const BanditInstance& inst, const Regularizer& reg, const Policy& pi);

// First (s, a) with pi(a|s) > 0 on a rho-visited state where pi_ref(a|s) = 0;
// names the cell behind a -infinity objective.
std::optional<std::pair<int, int>> support_violation(const BanditInstance& inst,
                                                     const Policy& pi);

// Single-state objective <pi(.|s), r(s,.)> - eta^{-1} D(pi(.|s) || pi_ref(.|s)).
double state_objective(const BanditInstance& inst, const Regularizer& reg, const Policy& pi,
                       int s);

// The exact maximizer of the regularized objective under the true mean
// reward: softmax tilt for KL, dual solve for FDiv.
Policy optimal_policy(const BanditInstance& inst, const Regularizer& reg);

// J(pi*) - J(pi), floored at 0 (the solver is exact to well below 1e-12).
double suboptimality(const BanditInstance& inst, const Regularizer& reg, const Policy& pi);

// Per-state gaps J_s(pi*) - J_s(pi); suboptimality is their rho-average.
std::vector<double> per_state_suboptimality(const BanditInstance& inst, const Regularizer& reg,
                                            const Policy& pi);

// For reverse KL the gap has the closed form eta^{-1} E_rho KL(pi || pi*).
// Returns +infinity when pi leaves the support of pi*.
double kl_subopt_identity(const BanditInstance& inst, double eta, const Policy& pi);

// G(gamma) = E_{rho x pi_gamma}[(f_pess - r)^2] where pi_gamma is the softmax
// tilt of gamma f_pess + (1-gamma) r. Non-increasing on [0,1] whenever
// f_pess <= r entrywise.
std::vector<double> g_curve(const BanditInstance& inst, const Table& f_pess, double eta,
                            std::span<const double> gamma_grid);

// E[X^3] - E[X^2] E[X] under a discrete law; nonpositive whenever the support
// lies in (-infinity, 0].
double moment_check(std::span<const double> values, std::span<const double> weights);

}  // namespace fdbandits

#endif  // FDBANDITS_EVALUATION_HPP
