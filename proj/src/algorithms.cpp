#include "fdbandits/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fdbandits/estimation.hpp"
#include "fdbandits/uncertainty.hpp"

namespace fdbandits {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double confidence_radius(const FunctionClass& fc, long n, double delta) {
  const double eps_c = 1.0 / static_cast<double>(n);
  return beta_radius(n, delta, eps_c, covering_number(fc, eps_c));
}

void require_supported_bonus(const Table& bonus, const Policy& pi_ref) {
  for (int s = 0; s < bonus.rows(); ++s) {
    for (int a = 0; a < bonus.cols(); ++a) {
      if (std::isinf(bonus(s, a)) && pi_ref(s, a) > 0.0) {
        throw std::runtime_error("class not covered by reference policy");
      }
    }
  }
}

Table subtract_bonus(const Table& estimate, const Table& bonus) {
  Table out = estimate;
  for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] -= bonus.data()[i];
  return out;
}

// 1e-12 absorbs rounding when the bonus is exactly zero.
constexpr double kEventSlack = 1e-12;

bool bandit_event_holds(const Table& estimate, const Table& truth, const Table& bonus) {
  for (std::size_t i = 0; i < estimate.data().size(); ++i) {
    if (std::abs(estimate.data()[i] - truth.data()[i]) > bonus.data()[i] + kEventSlack) {
      return false;
    }
  }
  return true;
}

// Per-state feasibility of a bias b(s) in [-1,1] with
// |estimate - b - truth| <= Gamma everywhere; the reported b is the Chebyshev
// center of the feasibility interval, clamped to [-1,1].
struct DuelingEvent {
  bool holds = true;
  std::vector<double> bias;
};

DuelingEvent dueling_event(const Table& estimate, const Table& truth, const Table& bonus) {
  DuelingEvent out;
  out.bias.resize(estimate.rows());
  for (int s = 0; s < estimate.rows(); ++s) {
    double lo = -kInf;
    double hi = kInf;
    for (int a = 0; a < estimate.cols(); ++a) {
      const double dev = estimate(s, a) - truth(s, a);
      const double gamma = bonus(s, a);
      lo = std::max(lo, dev - gamma);
      hi = std::min(hi, dev + gamma);
    }
    double center;
    if (lo == -kInf && hi == kInf) {
      center = 0.0;
    } else if (lo == -kInf) {
      center = std::min(hi, 1.0);
    } else if (hi == kInf) {
      center = std::max(lo, -1.0);
    } else {
      center = 0.5 * (lo + hi);
    }
    out.bias[s] = std::clamp(center, -1.0, 1.0);
    if (std::max(lo, -1.0) > std::min(hi, 1.0) + kEventSlack) out.holds = false;
  }
  return out;
}

}  // namespace

AlgoResult run_kl_pcb(const FunctionClass& fc, const Dataset& data, const Policy& pi_ref,
                      std::span<const double> rho, double eta,
                      const PessimismOptions& options) {
  const FitResult fit = fit_least_squares(fc, data);
  const double beta =
      options.force_zero_bonus ? 0.0 : confidence_radius(fc, data.size(), options.delta);
  const BonusTable bonus = bonus_table(fc, pi_ref, rho, beta, D2Variant::kBandit);
  require_supported_bonus(bonus.values, pi_ref);

  AlgoResult out;
  out.diag.estimator_index = fit.index;
  out.diag.beta = beta;
  out.diag.estimate = fc.members[fit.index];
  out.diag.bonus = bonus.values;
  out.diag.pessimistic = subtract_bonus(out.diag.estimate, bonus.values);
  if (options.ground_truth) {
    out.diag.event_e = bandit_event_holds(out.diag.estimate, *options.ground_truth, bonus.values);
  }
  out.policy = kl_softmax_policy(out.diag.pessimistic, pi_ref, eta);
  return out;
}

AlgoResult run_f_cb(const FunctionClass& fc, const Dataset& data, const Policy& pi_ref,
                    std::span<const double> rho, const Regularizer& reg,
                    const std::optional<Table>& ground_truth) {
  (void)rho;  // no bonus: coverage quantities are not consulted
  const FitResult fit = fit_least_squares(fc, data);
  AlgoResult out;
  out.diag.estimator_index = fit.index;
  out.diag.estimate = fc.members[fit.index];
  out.diag.bonus = Table(out.diag.estimate.rows(), out.diag.estimate.cols(), 0.0);
  out.diag.pessimistic = out.diag.estimate;
  if (ground_truth) {
    out.diag.event_e = out.diag.estimate == *ground_truth;
  }
  FDualResult solved = f_dual_policy(out.diag.estimate, pi_ref, reg);
  out.policy = std::move(solved.policy);
  out.diag.dual_reports = std::move(solved.reports);
  return out;
}

AlgoResult run_kl_pcdb(const FunctionClass& fc, const PreferenceDataset& data,
                       const Policy& pi_ref, std::span<const double> rho, double eta,
                       const PessimismOptions& options) {
  const FitResult fit = fit_mle_bt(fc, data);
  const double beta =
      options.force_zero_bonus ? 0.0 : confidence_radius(fc, data.size(), options.delta);
  const BonusTable bonus = bonus_table(fc, pi_ref, rho, beta, D2Variant::kDueling);
  require_supported_bonus(bonus.values, pi_ref);

  AlgoResult out;
  out.diag.estimator_index = fit.index;
  out.diag.beta = beta;
  out.diag.estimate = fc.members[fit.index];
  out.diag.bonus = bonus.values;
  out.diag.pessimistic = subtract_bonus(out.diag.estimate, bonus.values);
  if (options.ground_truth) {
    const DuelingEvent event = dueling_event(out.diag.estimate, *options.ground_truth,
                                             bonus.values);
    out.diag.event_e = event.holds;
    out.diag.bias = event.bias;
  }
  out.policy = kl_softmax_policy(out.diag.pessimistic, pi_ref, eta);
  return out;
}

AlgoResult run_f_cdb(const FunctionClass& fc, const PreferenceDataset& data,
                     const Policy& pi_ref, std::span<const double> rho, const Regularizer& reg,
                     const std::optional<Table>& ground_truth) {
  (void)rho;
  const FitResult fit = fit_mle_bt(fc, data);
  AlgoResult out;
  out.diag.estimator_index = fit.index;
  out.diag.estimate = fc.members[fit.index];
  out.diag.bonus = Table(out.diag.estimate.rows(), out.diag.estimate.cols(), 0.0);
  out.diag.pessimistic = out.diag.estimate;
  if (ground_truth) {
    out.diag.event_e = out.diag.estimate == *ground_truth;
  }
  FDualResult solved = f_dual_policy(out.diag.estimate, pi_ref, reg);
  out.policy = std::move(solved.policy);
  out.diag.dual_reports = std::move(solved.reports);
  return out;
}

}  // namespace fdbandits
