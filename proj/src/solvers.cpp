#include "fdbandits/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace fdbandits {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNormTol = 1e-12;  // bisection stop on |sum - 1|
constexpr int kMaxBisect = 200;

void normalize_row(std::span<double> row) {
  double sum = 0.0;
  for (double v : row) sum += v;
  for (double& v : row) v /= sum;
}

// Inverts the increasing function f' at y by bisection; returns 0 when y lies
// below f'(0+), which corresponds to a KKT-clipped action.
double invert_f_prime(const ScalarFn& f_prime, double y) {
  constexpr double kTinyX = 1e-14;
  if (f_prime(kTinyX) >= y) return 0.0;
  double lo = kTinyX;
  double hi = 1.0;
  int expand = 0;
  while (f_prime(hi) < y) {
    lo = hi;
    hi *= 2.0;
    if (++expand > 200) throw std::runtime_error("dual bracket not found");
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double v = f_prime(mid);
    if (std::abs(v - y) <= 1e-13 * std::max(1.0, std::abs(y))) return mid;
    (v < y ? lo : hi) = mid;
    if (hi - lo <= 1e-16 * hi) break;
  }
  return 0.5 * (lo + hi);
}

struct StateDual {
  std::vector<double> probs;
  DualSolveReport report;
};

StateDual solve_state_dual(std::span<const double> g_row, std::span<const double> ref_row,
                           const Regularizer& reg) {
  const int A = static_cast<int>(g_row.size());
  const double eta = reg.eta;

  const auto ratio_at = [&](double y) {
    if (reg.f_prime_inverse) return std::max(0.0, reg.f_prime_inverse(y));
    return invert_f_prime(reg.f_prime, y);
  };
  // Normalization sum as a function of the dual variable; non-increasing for
  // strictly convex f.
  const auto norm_sum = [&](double lambda) {
    double sum = 0.0;
    for (int a = 0; a < A; ++a) {
      if (ref_row[a] > 0.0) sum += ref_row[a] * ratio_at(eta * (g_row[a] - lambda));
    }
    return sum;
  };

  double g_min = kInf;
  double g_max = -kInf;
  for (int a = 0; a < A; ++a) {
    if (ref_row[a] > 0.0) {
      g_min = std::min(g_min, g_row[a]);
      g_max = std::max(g_max, g_row[a]);
    }
  }
  if (!(g_min <= g_max)) throw std::invalid_argument("reference policy row has no support");

  // With lambda = min g - f'(1)/eta every supported ratio is >= 1, and with
  // lambda = max g - f'(1)/eta every ratio is <= 1, so this bracket is valid
  // whenever f is convex. A small geometric expansion guards rounding at the
  // endpoints.
  const double shift = reg.f_prime(1.0) / eta;
  double lo = g_min - shift;
  double hi = g_max - shift;
  double n_lo = norm_sum(lo);
  double n_hi = norm_sum(hi);
  {
    double step = std::max(1.0, hi - lo);
    int expand = 0;
    while (n_lo < 1.0 && ++expand <= 60) {
      lo -= step;
      step *= 2.0;
      n_lo = norm_sum(lo);
    }
    step = std::max(1.0, hi - lo);
    expand = 0;
    while (n_hi > 1.0 && ++expand <= 60) {
      hi += step;
      step *= 2.0;
      n_hi = norm_sum(hi);
    }
  }
  if (n_lo < 1.0 || n_hi > 1.0) throw std::runtime_error("dual bracket not found");

  StateDual out;
  double lambda = 0.5 * (lo + hi);
  int iters = 0;
  for (; iters < kMaxBisect; ++iters) {
    lambda = 0.5 * (lo + hi);
    const double n_mid = norm_sum(lambda);
    if (n_mid > n_lo + 1e-9 || n_mid < n_hi - 1e-9) {
      throw std::runtime_error("f not strictly convex on range");
    }
    if (std::abs(n_mid - 1.0) <= kNormTol) break;
    if (n_mid > 1.0) {
      lo = lambda;
      n_lo = n_mid;
    } else {
      hi = lambda;
      n_hi = n_mid;
    }
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(lambda))) break;
  }

  out.probs.assign(A, 0.0);
  double sum = 0.0;
  double kkt = 0.0;
  for (int a = 0; a < A; ++a) {
    if (ref_row[a] <= 0.0) continue;
    const double y = eta * (g_row[a] - lambda);
    const double x = ratio_at(y);
    out.probs[a] = ref_row[a] * x;
    sum += out.probs[a];
    if (x > 0.0) kkt = std::max(kkt, std::abs(reg.f_prime(x) - y));
  }
  out.report.lambda = lambda;
  out.report.iterations = iters;
  out.report.kkt_residual = kkt;
  out.report.normalization_residual = std::abs(sum - 1.0);
  for (double& p : out.probs) p /= sum;
  return out;
}

}  // namespace

Policy kl_softmax_policy(const Table& g, const Policy& pi_ref, double eta) {
  if (!g.same_shape(pi_ref.probs)) throw std::invalid_argument("shape mismatch");
  if (!(eta >= 0.0)) throw std::invalid_argument("eta must be nonnegative");
  const int S = g.rows();
  const int A = g.cols();
  Policy pi;
  pi.probs = Table(S, A, 0.0);
  for (int s = 0; s < S; ++s) {
    double m = -kInf;
    for (int a = 0; a < A; ++a) {
      if (pi_ref(s, a) > 0.0) m = std::max(m, eta * g(s, a));
    }
    if (!(m > -kInf)) {
      // Degenerate row (every supported score is -infinity): keep the
      // reference row rather than emit NaNs.
      for (int a = 0; a < A; ++a) pi.probs(s, a) = pi_ref(s, a);
      continue;
    }
    for (int a = 0; a < A; ++a) {
      if (pi_ref(s, a) > 0.0) pi.probs(s, a) = pi_ref(s, a) * std::exp(eta * g(s, a) - m);
    }
    normalize_row(pi.probs.row(s));
  }
  return pi;
}

FDualResult f_dual_policy(const Table& g, const Policy& pi_ref, const Regularizer& reg) {
  if (reg.kind != Regularizer::Kind::kFDiv) {
    throw std::invalid_argument("f_dual_policy requires an FDiv regularizer");
  }
  if (!(reg.eta > 0.0)) throw std::invalid_argument("eta must be positive for f-divergences");
  if (!g.same_shape(pi_ref.probs)) throw std::invalid_argument("shape mismatch");

  const int S = g.rows();
  FDualResult out;
  out.policy.probs = Table(S, g.cols(), 0.0);
  out.reports.resize(S);
  for (int s = 0; s < S; ++s) {
    StateDual state = solve_state_dual(g.row(s), pi_ref.probs.row(s), reg);
    std::copy(state.probs.begin(), state.probs.end(), out.policy.probs.row(s).begin());
    out.reports[s] = state.report;
  }
  return out;
}

WaterFillState chi2_water_fill(std::span<const double> g_row, std::span<const double> ref_row,
                               double eta, double alpha) {
  if (!(eta > 0.0) || !(alpha > 0.0)) throw std::invalid_argument("eta, alpha must be positive");
  const int A = static_cast<int>(g_row.size());
  const double c = eta / alpha;

  std::vector<int> order;
  order.reserve(A);
  for (int a = 0; a < A; ++a) {
    if (ref_row[a] > 0.0) order.push_back(a);
  }
  if (order.empty()) throw std::invalid_argument("reference policy row has no support");
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return g_row[a] > g_row[b]; });

  // Active set = top-k actions by g. Normalization over the active set is
  // linear in lambda: sum_K ref(a) c (g(a) - lambda) = 1.
  WaterFillState out;
  out.probs.assign(A, 0.0);
  double best_residual = kInf;
  double ref_sum = 0.0;
  double ref_g_sum = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    ref_sum += ref_row[order[k]];
    ref_g_sum += ref_row[order[k]] * g_row[order[k]];
    const double lambda = (ref_g_sum - 1.0 / c) / ref_sum;
    const bool last_active_positive = g_row[order[k]] - lambda > 0.0;
    const bool next_excluded = k + 1 == order.size() || g_row[order[k + 1]] - lambda <= 1e-15;
    if (last_active_positive && next_excluded) {
      out.lambda = lambda;
      best_residual = 0.0;
      out.support_size = static_cast<int>(k) + 1;
      break;
    }
  }
  if (best_residual != 0.0) {
    // Rounding can leave every pattern marginally invalid; take the full
    // support solve, which is exact when no action is clipped.
    out.lambda = (ref_g_sum - 1.0 / c) / ref_sum;
    out.support_size = static_cast<int>(order.size());
  }
  for (int a : order) {
    out.probs[a] = std::max(0.0, ref_row[a] * c * (g_row[a] - out.lambda));
  }
  normalize_row(out.probs);
  int positive = 0;
  for (double p : out.probs) positive += p > 0.0;
  out.support_size = positive;
  return out;
}

Policy chi2_closed_form(const Table& g, const Policy& pi_ref, double eta, double alpha) {
  if (!g.same_shape(pi_ref.probs)) throw std::invalid_argument("shape mismatch");
  Policy pi;
  pi.probs = Table(g.rows(), g.cols(), 0.0);
  for (int s = 0; s < g.rows(); ++s) {
    const auto state = chi2_water_fill(g.row(s), pi_ref.probs.row(s), eta, alpha);
    std::copy(state.probs.begin(), state.probs.end(), pi.probs.row(s).begin());
  }
  return pi;
}

}  // namespace fdbandits
