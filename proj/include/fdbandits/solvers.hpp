#ifndef FDBANDITS_SOLVERS_HPP
#define FDBANDITS_SOLVERS_HPP

#include <span>
#include <vector>

#include "fdbandits/core.hpp"

namespace fdbandits {

// Per-state outcome of the dual solve. lambda parameterizes the stationarity
// system pi(a) = pi_ref(a) * max{0, (f')^{-1}(eta (g(a) - lambda))}; the
// chi-square water-filling solver reports its lambda in the closed-form
// parameterization pi(a) = pi_ref(a) * max{0, (eta/alpha)(g(a) - lambda)}
// instead (the two differ by alpha/eta).
struct DualSolveReport {
  double lambda = 0.0;
  int iterations = 0;
  double kkt_residual = 0.0;
  double normalization_residual = 0.0;
};

// pi(a|s) proportional to pi_ref(a|s) exp(eta g(s,a)), computed with
// per-state max subtraction. eta = 0 returns pi_ref. Entries of g at
// unsupported actions may be -infinity.
Policy kl_softmax_policy(const Table& g, const Policy& pi_ref, double eta);

struct FDualResult {
  Policy policy;
  std::vector<DualSolveReport> reports;  // one per state
};

// Maximizes <pi, g> - eta^{-1} D_f(pi || pi_ref) over the simplex per state by
// bisection on the dual variable. Requires an FDiv regularizer with strictly
// convex f. Throws "dual bracket not found" if the bracket cannot be
// established and "f not strictly convex on range" if the normalization is
// detected to be non-monotone.
FDualResult f_dual_policy(const Table& g, const Policy& pi_ref, const Regularizer& reg);

// Exact water-filling solve of one state of the chi-square problem
// (f = alpha (x-1)^2 / 2): sorts actions by g, locates the active set and
// solves the normalization linearly, no iteration.
struct WaterFillState {
  std::vector<double> probs;
  double lambda = 0.0;   // closed-form parameterization
  int support_size = 0;  // actions with positive probability
};

WaterFillState chi2_water_fill(std::span<const double> g_row, std::span<const double> ref_row,
                               double eta, double alpha);

Policy chi2_closed_form(const Table& g, const Policy& pi_ref, double eta, double alpha);

}  // namespace fdbandits

#endif  // FDBANDITS_SOLVERS_HPP
