#ifndef FDBANDITS_ALGORITHMS_HPP
#define FDBANDITS_ALGORITHMS_HPP

#include <optional>
#include <span>
#include <vector>

#include "fdbandits/core.hpp"
#include "fdbandits/solvers.hpp"

namespace fdbandits {

struct AlgoDiagnostics {
  int estimator_index = -1;
  double beta = 0.0;
  Table estimate;     // fitted class member
  Table bonus;        // Gamma_n (zero when the algorithm applies no pessimism)
  Table pessimistic;  // estimate - bonus; equals estimate for f-CB / f-CDB
  // Confidence event: |estimate - truth| <= Gamma everywhere (bandit), or the
  // same after subtracting the best per-state bias in [-1,1] (dueling).
  // Present only when the ground truth was supplied.
  std::optional<bool> event_e;
  std::vector<double> bias;  // dueling: per-state Chebyshev-center alignment
  std::vector<DualSolveReport> dual_reports;  // f-CB / f-CDB per-state solves
};

struct AlgoResult {
  Policy policy;
  AlgoDiagnostics diag;
};

struct PessimismOptions {
  double delta = 0.05;
  // Drops the bonus entirely; with it run_kl_pcb is the plain least-squares
  // softmax baseline.
  bool force_zero_bonus = false;
  // True mean reward; enables the event-E diagnostic in simulation.
  std::optional<Table> ground_truth;
};

// Least squares -> confidence radius beta(n, delta, eps_c = 1/n) -> bandit
// bonus -> softmax tilt of the pessimistic estimate. Throws "class not
// covered by reference policy" if any supported cell has an infinite bonus.
AlgoResult run_kl_pcb(const FunctionClass& fc, const Dataset& data, const Policy& pi_ref,
                      std::span<const double> rho, double eta,
                      const PessimismOptions& options = {});

// Least squares -> dual solve of the f-divergence objective. No pessimism.
AlgoResult run_f_cb(const FunctionClass& fc, const Dataset& data, const Policy& pi_ref,
                    std::span<const double> rho, const Regularizer& reg,
                    const std::optional<Table>& ground_truth = std::nullopt);

// Bradley-Terry MLE -> dueling bonus -> softmax tilt of the pessimistic
// estimate.
AlgoResult run_kl_pcdb(const FunctionClass& fc, const PreferenceDataset& data,
                       const Policy& pi_ref, std::span<const double> rho, double eta,
                       const PessimismOptions& options = {});

// Bradley-Terry MLE -> dual solve. No pessimism.
AlgoResult run_f_cdb(const FunctionClass& fc, const PreferenceDataset& data,
                     const Policy& pi_ref, std::span<const double> rho, const Regularizer& reg,
                     const std::optional<Table>& ground_truth = std::nullopt);

}  // namespace fdbandits

#endif  // FDBANDITS_ALGORITHMS_HPP
