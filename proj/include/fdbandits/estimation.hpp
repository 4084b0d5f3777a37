#ifndef FDBANDITS_ESTIMATION_HPP
#define FDBANDITS_ESTIMATION_HPP

#include <vector>

#include "fdbandits/core.hpp"

namespace fdbandits {

struct FitResult {
  int index;         // argmin member, ties broken by lowest index
  double objective;  // achieved SSE or negative log-likelihood
};

double sum_squared_error(const Table& g, const Dataset& data);
double bt_negative_log_likelihood(const Table& g, const PreferenceDataset& data);

// Exhaustive least squares over the finite class. Throws "no data" / "empty
// hypothesis class".
FitResult fit_least_squares(const FunctionClass& fc, const Dataset& data);

// Exhaustive Bradley-Terry maximum likelihood: minimizes
//   -sum_i [ y_i log sigma(g(s,a1)-g(s,a2)) + (1-y_i) log sigma(g(s,a2)-g(s,a1)) ]
// with sigma the logistic link.
FitResult fit_mle_bt(const FunctionClass& fc, const PreferenceDataset& data);

// Farthest-point covering radii: radii[k] is the sup-norm covering radius
// achieved by the first k+1 greedily chosen centers. Non-increasing.
std::vector<double> covering_radius_sequence(const FunctionClass& fc);

// Size of the greedy sup-norm eps-net (an upper bound on the minimal covering
// number; the greedy count is non-increasing in eps by construction).
int covering_number(const FunctionClass& fc, double eps);

}  // namespace fdbandits

#endif  // FDBANDITS_ESTIMATION_HPP
