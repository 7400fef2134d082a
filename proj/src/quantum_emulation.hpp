#pragma once

#include <cstdint>
#include <vector>

#include "cost_model.hpp"
#include "delta_em.hpp"
#include "distances.hpp"
#include "em.hpp"

namespace clab {

// Amplitude-estimation grid.
struct AeChannel {
  int grid_size = 64;  // >= 2
};

// Majority-vote repetition plan. copies > 0 is used as given; otherwise the
// count is derived from the failure probability and per-sample success a0.
struct ModeEvalSpec {
  int copies = 0;
  double delta_fail = 0.01;
  double a0 = 0.81056946913870217;  // 8 / pi^2

  static int required_copies(double delta_fail, double a0);
  int effective_copies() const {
    return copies > 0 ? copies : required_copies(delta_fail, a0);
  }
};

// Direction / norm error model for reading out a state vector.
struct TomographyChannel {
  double eps_dir = 0.0;   // bound on the unit-vector deviation
  double eps_norm = 0.0;  // bound on the relative norm error
};

struct QemConfig {
  int k = 2;
  double delta = 0.2;
  double eps1 = 0.0;  // 0 disables the distance channel (exact rows)
  TomographyChannel mu_channel;
  TomographyChannel sigma_channel;
  TomographyChannel pi_channel;  // only eps_norm is meaningful
  long n_pi_samples = 0;         // 0 disables weight sampling (exact frequencies)
  ModeEvalSpec mode_eval;
  // Quantum linear-algebra precisions; they only enter logarithmic factors
  // and are carried for reporting.
  double eps2_mu = 1e-8;
  double eps2_sigma = 1e-8;
  int max_iters = 100;
  double tol = 1e-6;
  double cov_floor = 1e-6;
  std::uint64_t seed = 0;
};

// Fills a QemConfig's channel fields from an epsilon budget.
QemConfig qem_config_from_budget(int k_total, double delta, const EpsilonBudget& budget,
                                 double pi_fail = 0.05);

// Enforces eps1 < delta/2 and the tomography bounds eps < delta/(4 sqrt(eta))
// for whichever channels are active. Throws ConfigError.
void validate_qem_config(const QemConfig& config, double eta_mu, double eta_sigma);

// p = (1 - y^T G^2 mu) / 2 for unit vectors, clamped to [0, 1].
double inner_product_probability(const Eigen::VectorXd& y_hat,
                                 const Eigen::VectorXd& mu_hat,
                                 const Eigen::MatrixXd& g);

// Exact outcome law of grid-based amplitude estimation for amplitude p:
// two branches at +-arcsin(sqrt(p))/pi, each carrying the Fejer kernel
// sin^2(P pi D) / (P^2 sin^2(pi D)) over circular mismatch D, normalized by
// explicit summation. When the phase lands on the grid (within 1e-8 grid
// units) the law collapses to the exact point masses.
class AeOutcomeDistribution {
 public:
  AeOutcomeDistribution(double p, int grid_size);

  int grid_size() const { return grid_; }
  bool on_grid() const { return on_grid_; }
  // Normalized probability of outcome m, by the direct formula.
  double probability(int m) const;
  // The estimate an outcome maps to: sin^2(pi m / P).
  double estimate_for(int m) const;
  // Normalizer obtained by explicit summation.
  double total_mass() const { return z_; }

  int sample(Rng& rng) const;
  // Draws `count` outcomes; on large grids this streams the pmf once with
  // sorted uniforms instead of materializing it.
  std::vector<int> sample_many(Rng& rng, int count) const;

 private:
  double raw_mass(int m) const;
  template <typename Visit>
  void scan_masses(Visit visit) const;  // recurrence-based pass over all m

  double p_ = 0.0;
  int grid_ = 0;
  double c_ = 0.0;          // grid_ * arcsin(sqrt(p)) / pi
  bool on_grid_ = false;
  int m_on_ = 0;            // first on-grid branch outcome
  int m_on2_ = 0;           // mirrored branch outcome
  double numerator_ = 0.0;  // sin^2(pi c), shared by both branches
  double z_ = 0.0;
  std::vector<double> cum_;  // cumulative raw masses when materialized
};

// One amplitude-estimation measurement: sample an outcome, return its
// estimate.
double ae_sample(double p, const AeChannel& channel, Rng& rng);

// Most frequent sample, ties toward the smaller value. The sample count
// must equal the spec's effective copy count.
double mode_evaluate(const std::vector<double>& samples, const ModeEvalSpec& spec);

// Applies the (eps_dir, eps_norm) channel: the direction moves by a chord of
// length U[0, eps_dir] toward a random orthogonal direction, the norm is
// scaled by 1 + U[-eps_norm, eps_norm]. Zero parameters draw nothing, so an
// all-zero channel is the identity.
Eigen::VectorXd tomography_apply(const Eigen::VectorXd& v,
                                 const TomographyChannel& channel, Rng& rng);

// Empirical label frequencies from n i.i.d. draws of the given label
// distribution (n_samples >= 1).
Eigen::VectorXd estimate_weights(const Eigen::VectorXd& label_probs, int k_total,
                                 long n_pi_samples, Rng& rng);

// Distance row through the estimation channel: per component, the inner
// product probability is measured by repeated amplitude estimation plus
// mode evaluation on a grid sized so the reconstruction error bound stays
// within eps1; the norms and the ln det - 2 ln(K pi) translation are applied
// exactly. eps1 = 0 returns the exact row.
DistanceRow noisy_distance_row(const Eigen::VectorXd& y, const GmmParams& params,
                               const QemConfig& config, Rng& rng);

// Hook for inspecting each emulation iteration. Rows are indexed by point.
struct QemObserver {
  virtual ~QemObserver() = default;
  virtual void on_iteration(int iter, const GmmParams& params,
                            const std::vector<DistanceRow>& noisy_rows,
                            const std::vector<DistanceRow>& exact_rows,
                            const HardAssignment& labels) = 0;
};

// Full emulation loop: noisy rows, deterministic 2-delta labeling with
// discards, per-cluster statistics from labeled points, tomography on the
// means and vectorized covariances, sampled weights, normalize/repair.
// Stops on the moving-average log-likelihood rule or max_iters.
FitResult run_qem_emulation(const Dataset& data, const GmmParams& init,
                            const QemConfig& config, QemObserver* observer = nullptr);

}  // namespace clab
