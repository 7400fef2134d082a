#pragma once

#include <cstdint>

#include "em.hpp"

namespace clab {

// Default noise magnitudes give the perturbations a standard deviation of
// 0.01 on the weights and means and 0.001 on the covariance entries. Larger
// noise on the weights feeds back through the -2 ln(K pi) distance term and
// collapses one cluster within a few iterations.
struct DeltaEmConfig {
  int k = 2;
  double delta = 0.2;
  double noise_pi_var = 1e-4;
  double noise_mu_var = 1e-4;
  double noise_sigma_var = 1e-6;
  int max_iters = 100;
  double tol = 1e-6;
  double cov_floor = 1e-6;
  std::uint64_t seed = 0;
};

// Assigns every point a label drawn uniformly from its delta-neighborhood
// of the square GMM distance row. Singleton neighborhoods consume no
// randomness, so delta = 0 reproduces the plain argmin assignment stream.
HardAssignment delta_e_step(const Dataset& data, const GmmParams& params,
                            double delta, Rng& rng);

// Hard M-step with zero-mean Gaussian noise added to the raw estimates:
// first the weight entries, then each mean, then each covariance in
// row-major order. A block whose variance is zero draws nothing. The
// weights are then renormalized and every covariance repaired.
GmmParams noisy_m_step(const Dataset& data, const HardAssignment& assignment,
                       const DeltaEmConfig& config, Rng& rng, int* reseeds = nullptr);

// Perturbed hard-assignment EM; stops on the moving-average rule.
FitResult run_delta_em(const Dataset& data, const GmmParams& init,
                       const DeltaEmConfig& config, bool record_labels = false);

}  // namespace clab
