#include "fdbandits/estimation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fdbandits {

namespace {

// log sigma(x) = -log(1 + e^{-x}), evaluated without overflow.
double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

template <typename LossFn>
FitResult scan_argmin(int count, LossFn&& loss) {
  int best = 0;
  double best_value = loss(0);
  for (int i = 1; i < count; ++i) {
    const double value = loss(i);
    if (value < best_value) {
      best = i;
      best_value = value;
    }
  }
  return {best, best_value};
}

}  // namespace

double sum_squared_error(const Table& g, const Dataset& data) {
  double sse = 0.0;
  for (const auto& row : data.rows) {
    const double e = g(row.s, row.a) - row.r;
    sse += e * e;
  }
  return sse;
}

double bt_negative_log_likelihood(const Table& g, const PreferenceDataset& data) {
  double nll = 0.0;
  for (const auto& row : data.rows) {
    const double diff = g(row.s, row.a1) - g(row.s, row.a2);
    nll -= row.y == 1 ? log_sigmoid(diff) : log_sigmoid(-diff);
  }
  return nll;
}

FitResult fit_least_squares(const FunctionClass& fc, const Dataset& data) {
  if (data.rows.empty()) throw std::invalid_argument("no data");
  if (fc.members.empty()) throw std::invalid_argument("empty hypothesis class");
  return scan_argmin(fc.size(),
                     [&](int i) { return sum_squared_error(fc.members[i], data); });
}

FitResult fit_mle_bt(const FunctionClass& fc, const PreferenceDataset& data) {
  if (data.rows.empty()) throw std::invalid_argument("no data");
  if (fc.members.empty()) throw std::invalid_argument("empty hypothesis class");
  return scan_argmin(fc.size(),
                     [&](int i) { return bt_negative_log_likelihood(fc.members[i], data); });
}

std::vector<double> covering_radius_sequence(const FunctionClass& fc) {
  const int n = fc.size();
  std::vector<double> radii;
  if (n == 0) return radii;
  radii.reserve(n);

  // dist[j] = distance of member j to its nearest chosen center so far.
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  int next_center = 0;  // member 0 seeds the traversal
  for (int k = 0; k < n; ++k) {
    const Table& center = fc.members[next_center];
    double radius = 0.0;
    int farthest = 0;
    for (int j = 0; j < n; ++j) {
      dist[j] = std::min(dist[j], sup_distance(fc.members[j], center));
      if (dist[j] > radius) {
        radius = dist[j];
        farthest = j;
      }
    }
    radii.push_back(radius);
    next_center = farthest;
    if (radius == 0.0) break;  // remaining members are duplicates of centers
  }
  return radii;
}

int covering_number(const FunctionClass& fc, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (fc.members.empty()) throw std::invalid_argument("empty hypothesis class");
  const auto radii = covering_radius_sequence(fc);
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (radii[k] <= eps) return static_cast<int>(k) + 1;
  }
  return static_cast<int>(radii.size());
}

}  // namespace fdbandits
