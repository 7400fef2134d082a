#pragma once

#include <cstdint>
#include <vector>

#include "core_model.hpp"
#include "distances.hpp"
#include "rng.hpp"

namespace clab {

struct EmConfig {
  int k = 2;
  int max_iters = 100;
  double tol = 1e-6;
  double cov_floor = 1e-6;  // jitter used when repairing covariances
  std::uint64_t seed = 0;
};

// Outcome of any of the iterative fitters.
struct FitResult {
  GmmParams params;
  std::vector<double> loglik_trace;  // one entry per completed iteration
  int iterations = 0;
  bool converged = false;
  int reseeds = 0;
  HardAssignment final_assignment;
  // Per-iteration discard counts; only the deterministic-label fitter
  // produces nonzero entries.
  std::vector<int> discard_counts;
  int small_cluster_events = 0;
  // Per-iteration label snapshots when recording was requested.
  std::vector<std::vector<int>> label_history;
};

// Posterior membership of every point under params. Rows sum to 1.
Responsibilities e_step(const Dataset& data, const GmmParams& params);

// Weighted parameter update. Components whose column mass is <= 1e-12 are
// reseeded: mean drawn uniformly from the data, identity covariance, weight
// 1/N, with the reseed counted; weights are renormalized afterwards so they
// still sum to 1. Every covariance passes through repair_covariance.
GmmParams m_step(const Dataset& data, const Responsibilities& resp, double cov_floor,
                 Rng& rng, int* reseeds = nullptr);

// Raw per-cluster statistics from a hard assignment. Shared by every
// hard-assignment fitter so that equal label sequences produce bitwise
// equal estimates. Discarded points contribute nowhere. Empty clusters are
// reseeded as in m_step.
struct HardStats {
  Eigen::VectorXd counts;  // points claimed per cluster
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covs;  // not yet repaired
  Eigen::VectorXd weights;            // counts / total, reseeded entries 1/N
  int reseeds = 0;
};
HardStats hard_estimates(const Dataset& data, const HardAssignment& assignment,
                         int k_total, Rng& rng);

// Normalizes the weights and repairs the covariances of raw hard statistics.
GmmParams finish_hard_params(const HardStats& stats, double cov_floor);

// hard_estimates followed by finish_hard_params.
GmmParams hard_m_step(const Dataset& data, const HardAssignment& assignment,
                      int k_total, double cov_floor, Rng& rng, int* reseeds = nullptr);

// Deals points to components round-robin after a seeded shuffle and runs one
// m_step on the induced one-hot responsibilities.
GmmParams random_init(const Dataset& data, int k_total, std::uint64_t seed);

// Expectation-maximization until |loglik delta| < tol or max_iters.
FitResult run_em(const Dataset& data, const GmmParams& init, const EmConfig& config);

// Hard-assignment EM: each point goes to the component minimizing the square
// GMM distance, parameters come from hard_m_step. Stops on the
// moving-average rule shared with the perturbed fitters.
FitResult run_classification_em(const Dataset& data, const GmmParams& init,
                                const EmConfig& config, bool record_labels = false);

// True once the trailing window-average of the trace moved by less than tol
// relative to the window one step earlier. Needs window + 1 entries.
bool moving_average_converged(const std::vector<double>& trace, double tol,
                              int window = 5);

// Per-row argmax with ties resolved toward the lower index.
HardAssignment argmax_assignment(const Responsibilities& resp);

// Each point goes to the component with the smallest square GMM distance,
// ties toward the lower index. This is the decoder every hard fitter uses to
// report its final prediction.
HardAssignment argmin_gmm_assignment(const Dataset& data, const GmmParams& params);

}  // namespace clab
