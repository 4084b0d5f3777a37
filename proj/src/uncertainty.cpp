#include "fdbandits/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace fdbandits {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t hash_mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9E3779B97F4B9C15ULL + (h << 6) + (h >> 2);
  return h;
}

std::uint64_t hash_doubles(std::uint64_t h, std::span<const double> xs) {
  for (double x : xs) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof(bits));
    h = hash_mix(h, bits);
  }
  return h;
}

std::uint64_t d2_cache_key(const FunctionClass& fc, const Policy& pi,
                           std::span<const double> rho, D2Variant variant) {
  std::uint64_t h = variant == D2Variant::kBandit ? 0x62616e64ULL : 0x6475656cULL;
  h = hash_mix(h, static_cast<std::uint64_t>(fc.size()));
  for (const Table& g : fc.members) h = hash_doubles(h, g.data());
  h = hash_doubles(h, pi.probs.data());
  h = hash_doubles(h, rho);
  return h;
}

// One-pair statistics shared across all (s,a) entries.
struct PairStats {
  double denom;                // E[(g-h)^2] or E_s Var_a[g-h]
  std::vector<double> bias;    // per-state centering, dueling only
};

Table compute_d2_table(const FunctionClass& fc, const Policy& pi,
                       std::span<const double> rho, D2Variant variant) {
  const int S = pi.num_states();
  const int A = pi.num_actions();
  const int m = fc.size();
  Table out(S, A, 0.0);

  std::vector<double> diff(static_cast<std::size_t>(S) * A);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const Table& g = fc.members[i];
      const Table& h = fc.members[j];
      for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = g.data()[k] - h.data()[k];

      PairStats stats;
      stats.denom = 0.0;
      if (variant == D2Variant::kBandit) {
        for (int s = 0; s < S; ++s) {
          for (int a = 0; a < A; ++a) {
            const double w = rho[s] * pi(s, a);
            if (w > 0.0) {
              const double d = diff[static_cast<std::size_t>(s) * A + a];
              stats.denom += w * d * d;
            }
          }
        }
      } else {
        stats.bias.resize(S);
        for (int s = 0; s < S; ++s) {
          double mean = 0.0;
          double second = 0.0;
          for (int a = 0; a < A; ++a) {
            const double w = pi(s, a);
            if (w > 0.0) {
              const double d = diff[static_cast<std::size_t>(s) * A + a];
              mean += w * d;
              second += w * d * d;
            }
          }
          const double var = std::max(0.0, second - mean * mean);
          stats.denom += rho[s] * var;
          stats.bias[s] = std::clamp(mean, -1.0, 1.0);
        }
      }

      // Numerators and denominator are quadratic in the pair difference, so
      // anything below 1e-20 of the squared difference scale is rounding
      // residue and counts as an exact zero (a per-state-constant dueling
      // pair, say, leaves ulp-sized noise in both).
      double scale = 0.0;
      for (double d : diff) scale = std::max(scale, d * d);
      const double snap = scale * 1e-20;
      const double denom = stats.denom <= snap ? 0.0 : stats.denom;
      for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
          double num = diff[static_cast<std::size_t>(s) * A + a];
          if (variant == D2Variant::kDueling) num -= stats.bias[s];
          num *= num;
          double ratio;
          if (num <= snap) {
            ratio = 0.0;  // 0/0 and 0/x both contribute nothing
          } else if (denom == 0.0) {
            ratio = kInf;
          } else {
            ratio = num / denom;
          }
          out(s, a) = std::max(out(s, a), ratio);
        }
      }
    }
  }
  return out;
}

// Content-addressed cache: the sup over pairs is O(|F|^2 SA) and the same
// (class, policy) pair is queried once per (s,a) by callers.
std::shared_ptr<const Table> cached_d2_table(const FunctionClass& fc, const Policy& pi,
                                             std::span<const double> rho, D2Variant variant) {
  static std::mutex mu;
  static std::unordered_map<std::uint64_t, std::shared_ptr<const Table>> cache;

  const std::uint64_t key = d2_cache_key(fc, pi, rho, variant);
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto table = std::make_shared<const Table>(compute_d2_table(fc, pi, rho, variant));
  std::lock_guard<std::mutex> lock(mu);
  if (cache.size() > 256) cache.clear();  // bound memory across long sweeps
  return cache.emplace(key, std::move(table)).first->second;
}

}  // namespace

double beta_radius(long n, double delta, double eps_c, long cover_n) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in (0,1)");
  if (!(eps_c >= 0.0)) throw std::invalid_argument("eps_c must be nonnegative");
  if (cover_n < 1) throw std::invalid_argument("cover_n must be positive");
  const double log_term = std::log(2.0 * static_cast<double>(cover_n) / delta);
  return std::sqrt(128.0 * log_term / (3.0 * static_cast<double>(n)) + 18.0 * eps_c);
}

Table d2_table(const FunctionClass& fc, const Policy& pi, std::span<const double> rho,
               D2Variant variant) {
  return *cached_d2_table(fc, pi, rho, variant);
}

double d2_bandit(const FunctionClass& fc, const Policy& pi, std::span<const double> rho,
                 int s, int a) {
  return (*cached_d2_table(fc, pi, rho, D2Variant::kBandit))(s, a);
}

double d2_dueling(const FunctionClass& fc, const Policy& pi, std::span<const double> rho,
                  int s, int a) {
  return (*cached_d2_table(fc, pi, rho, D2Variant::kDueling))(s, a);
}

BonusTable bonus_table(const FunctionClass& fc, const Policy& pi_ref,
                       std::span<const double> rho, double beta, D2Variant variant) {
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
  const auto d2 = cached_d2_table(fc, pi_ref, rho, variant);
  BonusTable out;
  out.beta = beta;
  out.values = Table(pi_ref.num_states(), pi_ref.num_actions());
  for (int s = 0; s < pi_ref.num_states(); ++s) {
    for (int a = 0; a < pi_ref.num_actions(); ++a) {
      const double v = (*d2)(s, a);
      // beta = 0 means no pessimism at all, even where D^2 is infinite.
      out.values(s, a) = beta == 0.0 ? 0.0 : beta * std::sqrt(v);
    }
  }
  return out;
}

double density_ratio_concentrability(const Policy& pi, const Policy& pi_ref) {
  if (!pi.probs.same_shape(pi_ref.probs)) throw std::invalid_argument("policy shape mismatch");
  double sup = 0.0;
  for (int s = 0; s < pi.num_states(); ++s) {
    for (int a = 0; a < pi.num_actions(); ++a) {
      const double p = pi(s, a);
      const double q = pi_ref(s, a);
      if (p == 0.0) continue;
      if (q == 0.0) return kInf;
      sup = std::max(sup, p / q);
    }
  }
  return sup;
}

double d2_concentrability(const FunctionClass& fc, const Policy& pi_eval,
                          const Policy& pi_ref, std::span<const double> rho,
                          CoverageMode mode, D2Variant variant) {
  const auto d2 = cached_d2_table(fc, pi_ref, rho, variant);
  if (mode == CoverageMode::kAll) {
    double sup = 0.0;
    for (double v : d2->data()) sup = std::max(sup, v);
    return sup;
  }
  double total = 0.0;
  for (int s = 0; s < pi_ref.num_states(); ++s) {
    for (int a = 0; a < pi_ref.num_actions(); ++a) {
      const double w = rho[s] * pi_eval(s, a);
      if (w > 0.0) total += w * (*d2)(s, a);
    }
  }
  return total;
}

}  // namespace fdbandits
