#include "fdbandits/evaluation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "fdbandits/solvers.hpp"

namespace fdbandits {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// D(pi_row || ref_row) for one state; +infinity marks a support violation.
double row_divergence(std::span<const double> pi_row, std::span<const double> ref_row,
                      const Regularizer& reg) {
  double div = 0.0;
  const int A = static_cast<int>(pi_row.size());
  if (reg.kind == Regularizer::Kind::kKl) {
    for (int a = 0; a < A; ++a) {
      const double p = pi_row[a];
      if (p == 0.0) continue;  // 0 log 0 = 0
      if (ref_row[a] == 0.0) return kInf;
      div += p * std::log(p / ref_row[a]);
    }
    return div;
  }
  for (int a = 0; a < A; ++a) {
    const double q = ref_row[a];
    if (q == 0.0) {
      if (pi_row[a] > 0.0) return kInf;
      continue;
    }
    const double value = reg.f(pi_row[a] / q);
    if (!std::isfinite(value)) return kInf;
    div += q * value;
  }
  return div;
}

double state_value(const BanditInstance& inst, const Regularizer& reg,
                   std::span<const double> pi_row, int s) {
  if (!(reg.eta > 0.0)) throw std::invalid_argument("objective requires eta > 0");
  double reward = 0.0;
  for (int a = 0; a < inst.num_actions; ++a) {
    if (pi_row[a] > 0.0) reward += pi_row[a] * inst.mean_reward(s, a);
  }
  const double div = row_divergence(pi_row, inst.ref_policy.probs.row(s), reg);
  if (div == kInf) return -kInf;
  return reward - div / reg.eta;
}

}  // namespace

double state_objective(const BanditInstance& inst, const Regularizer& reg, const Policy& pi,
                       int s) {
  return state_value(inst, reg, pi.probs.row(s), s);
}

double objective(const BanditInstance& inst, const Regularizer& reg, const Policy& pi) {
  double total = 0.0;
  for (int s = 0; s < inst.num_states; ++s) {
    const double rho = inst.context_dist[s];
    if (rho == 0.0) continue;
    const double v = state_value(inst, reg, pi.probs.row(s), s);
    if (v == -kInf) return -kInf;
    total += rho * v;
  }
  return total;
}

std::optional<std::pair<int, int>> support_violation(const BanditInstance& inst,
                                                     const Policy& pi) {
  for (int s = 0; s < inst.num_states; ++s) {
    if (inst.context_dist[s] == 0.0) continue;
    for (int a = 0; a < inst.num_actions; ++a) {
      if (pi(s, a) > 0.0 && inst.ref_policy(s, a) == 0.0) return std::make_pair(s, a);
    }
  }
  return std::nullopt;
}

Policy optimal_policy(const BanditInstance& inst, const Regularizer& reg) {
  if (reg.kind == Regularizer::Kind::kKl) {
    return kl_softmax_policy(inst.mean_reward, inst.ref_policy, reg.eta);
  }
  return f_dual_policy(inst.mean_reward, inst.ref_policy, reg).policy;
}

double suboptimality(const BanditInstance& inst, const Regularizer& reg, const Policy& pi) {
  const double gap = objective(inst, reg, optimal_policy(inst, reg)) - objective(inst, reg, pi);
  return gap > 0.0 ? gap : 0.0;
}

std::vector<double> per_state_suboptimality(const BanditInstance& inst, const Regularizer& reg,
                                            const Policy& pi) {
  const Policy opt = optimal_policy(inst, reg);
  std::vector<double> out(inst.num_states);
  for (int s = 0; s < inst.num_states; ++s) {
    const double gap = state_objective(inst, reg, opt, s) - state_objective(inst, reg, pi, s);
    out[s] = gap > 0.0 ? gap : 0.0;
  }
  return out;
}

double kl_subopt_identity(const BanditInstance& inst, double eta, const Policy& pi) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  const Policy opt = kl_softmax_policy(inst.mean_reward, inst.ref_policy, eta);
  double total = 0.0;
  for (int s = 0; s < inst.num_states; ++s) {
    const double rho = inst.context_dist[s];
    if (rho == 0.0) continue;
    double kl = 0.0;
    for (int a = 0; a < inst.num_actions; ++a) {
      const double p = pi(s, a);
      if (p == 0.0) continue;
      if (opt(s, a) == 0.0) return kInf;
      kl += p * std::log(p / opt(s, a));
    }
    total += rho * kl;
  }
  return total / eta;
}

std::vector<double> g_curve(const BanditInstance& inst, const Table& f_pess, double eta,
                            std::span<const double> gamma_grid) {
  const int S = inst.num_states;
  const int A = inst.num_actions;
  std::vector<double> out;
  out.reserve(gamma_grid.size());
  Table mixed(S, A);
  for (double gamma : gamma_grid) {
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        // gamma = 0 must recover the truth even where f_pess is -infinity
        // (unsupported cells carry infinite bonuses).
        mixed(s, a) = gamma == 0.0 ? inst.mean_reward(s, a)
                                   : gamma * f_pess(s, a) + (1.0 - gamma) * inst.mean_reward(s, a);
      }
    }
    const Policy pi_gamma = kl_softmax_policy(mixed, inst.ref_policy, eta);
    double value = 0.0;
    for (int s = 0; s < S; ++s) {
      const double rho = inst.context_dist[s];
      if (rho == 0.0) continue;
      for (int a = 0; a < A; ++a) {
        const double w = rho * pi_gamma(s, a);
        if (w > 0.0) {
          const double d = f_pess(s, a) - inst.mean_reward(s, a);
          value += w * d * d;
        }
      }
    }
    out.push_back(value);
  }
  return out;
}

double moment_check(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size()) throw std::invalid_argument("size mismatch");
  double m1 = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = values[i];
    const double w = weights[i];
    m1 += w * x;
    m2 += w * x * x;
    m3 += w * x * x * x;
  }
  return m3 - m2 * m1;
}

}  // namespace fdbandits
