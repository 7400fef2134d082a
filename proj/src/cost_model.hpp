#pragma once

#include <Eigen/Dense>
#include <utility>

#include "core_model.hpp"

namespace clab {

// The two data matrices the runtime formula is evaluated on: the raw points
// and the row-wise outer products vec(y y^T).
struct DataMatrices {
  Eigen::MatrixXd v1;  // N x d
  Eigen::MatrixXd v2;  // N x d^2, column-major vec of y y^T

  static DataMatrices from_dataset(const Dataset& data);
};

// Maximum over rows of the sum of |entry|^p, zero entries contributing
// zero. p must lie in [0, 1].
double s_p(const Eigen::MatrixXd& m, double p);

// min(||M||_F, min_p sqrt(s_{2p}(M) s_{1-2p}(M^T))) over p in [0, 1],
// located on a 201-point grid and sharpened by local refinement.
// Throws ConfigError for an all-zero matrix.
double mu_coherence(const Eigen::MatrixXd& m);

// Ratio of the largest singular value to the smallest retained one.
// Singular values below 1e-12 times the largest are treated as numerical
// zeros and dropped.
double condition_number(const Eigen::MatrixXd& m);

// (max_i ||y_i||^2, max_i ||y_i||^4); the second value governs the
// outer-product matrix and equals the square of the first.
std::pair<double, double> eta_values(const Dataset& data);

// Precision split for one target label accuracy delta, with a 10% safety
// margin on every bound.
struct EpsilonBudget {
  double eps1 = 0.0;        // distance estimate error
  double eps3_mu = 0.0;     // mean tomography direction error
  double eps4_mu = 0.0;     // mean norm estimate error
  double eps3_sigma = 0.0;  // covariance direction error
  double eps4_sigma = 0.0;  // covariance norm error
  double eps4_pi = 0.0;     // weight estimate error
};
EpsilonBudget epsilon_budget(double delta, double eta_mu, double eta_sigma);

// Hoeffding sample count so every weight is within eps4_pi with overall
// failure probability delta_fail.
long n_pi_samples_required(int k_total, double eps4_pi, double delta_fail);

struct CostIngredients {
  double kappa_v1 = 0.0;
  double kappa_v2 = 0.0;
  double mu_v1 = 0.0;
  double mu_v2 = 0.0;
  double eta_mu = 0.0;
  double eta_sigma = 0.0;
  int k = 0;
  int d = 0;
};

struct CostReport {
  CostIngredients ingredients;
  EpsilonBudget budget;
  // Weight-estimation cost, both the headline K^2 form and the per-parameter
  // K^3 form; the itemized form enters the total.
  double term_pi_main = 0.0;
  double term_pi_itemized = 0.0;
  double term_mu_tomo = 0.0;
  double term_mu_norm = 0.0;
  double term_sigma_tomo = 0.0;
  double term_sigma_norm = 0.0;
  double total = 0.0;
  long n_pi_samples = 0;
};

// Polynomial runtime terms, logarithmic factors dropped.
CostReport evaluate_cost_terms(const CostIngredients& ing, const EpsilonBudget& budget);

// Full pipeline: ingredients from the data matrices, then the cost terms.
CostReport qem_runtime_estimate(const DataMatrices& matrices, int k_total,
                                const EpsilonBudget& budget);

}  // namespace clab
