#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"

namespace clab {

// Label used for points that no component may claim under the 2-delta rule.
inline constexpr int kDiscarded = -1;

// N points in d dimensions, optionally with ground-truth component labels.
// Labels are 0-based in memory; CSV files store them 1-based.
struct Dataset {
  Eigen::MatrixXd points;                       // N x d
  std::optional<std::vector<int>> true_labels;  // each in [0, K_true)

  int size() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }

  // Throws ConfigError on empty data, non-finite entries, or bad labels.
  void validate() const;
};

// Mixture parameters for K components over R^d.
struct GmmParams {
  Eigen::VectorXd weights;                   // K, sums to 1
  std::vector<Eigen::VectorXd> means;        // K vectors of length d
  std::vector<Eigen::MatrixXd> covariances;  // K matrices d x d, symmetric PD

  int components() const { return static_cast<int>(weights.size()); }
  int dim() const { return means.empty() ? 0 : static_cast<int>(means[0].size()); }
};

// Posterior membership matrix; each row is a distribution over components.
struct Responsibilities {
  Eigen::MatrixXd r;  // N x K, rows sum to 1
};

// Hard labels; entries equal to kDiscarded carry no label.
struct HardAssignment {
  std::vector<int> labels;

  int discarded_count() const;
  // Number of points labeled k, for k in [0, K).
  std::vector<int> cluster_sizes(int k_total) const;
};

// Log density of N(mu, sigma) at y. Throws NumericError when sigma is not
// positive definite, ConfigError on dimension mismatch.
double gaussian_logpdf(const Eigen::VectorXd& y, const Eigen::VectorXd& mu,
                       const Eigen::MatrixXd& sigma);

// Total mixture log-likelihood of the dataset under params.
double gmm_log_likelihood(const Dataset& data, const GmmParams& params);

// Returns human-readable invariant violations, empty when params are valid.
// Components are named 1-based in the messages.
std::vector<std::string> validate_params(const GmmParams& params);

// Symmetrizes sigma; if the smallest eigenvalue sigma* of the symmetrized
// matrix is <= 0, adds (|sigma*| + jitter) I. Result is PD for jitter > 0.
Eigen::MatrixXd repair_covariance(const Eigen::MatrixXd& sigma, double jitter = 1e-6);

// Clamps negative entries to zero and rescales to sum 1. Throws NumericError
// ("degenerate weights") when everything clamps to zero.
Eigen::VectorXd normalize_weights(const Eigen::VectorXd& pi);

// One component's density with the Cholesky factor cached, so repeated
// evaluations over a dataset avoid refactorizing.
class ComponentDensity {
 public:
  ComponentDensity(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma);

  double logpdf(const Eigen::VectorXd& y) const;
  // Mahalanobis quadratic form (y - mu)^T sigma^{-1} (y - mu).
  double quad_form(const Eigen::VectorXd& y) const;
  double log_det() const { return log_det_; }
  const Eigen::VectorXd& mean() const { return mu_; }

 private:
  Eigen::VectorXd mu_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double log_det_;
};

}  // namespace clab
