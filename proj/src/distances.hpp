#pragma once

#include <Eigen/Dense>
#include <vector>

#include "core_model.hpp"

namespace clab {

enum class DistanceMetric { euclidean, gmm };

// One point's distances to every component under a fixed metric.
struct DistanceRow {
  Eigen::VectorXd values;  // K entries, finite
  DistanceMetric metric = DistanceMetric::euclidean;

  int components() const { return static_cast<int>(values.size()); }
};

double squared_euclidean(const Eigen::VectorXd& y, const Eigen::VectorXd& mu);

// Square GMM distance: the Mahalanobis quadratic form plus ln det(sigma)
// minus 2 ln(K pi). Smaller means the component claims the point more
// strongly; the argmin coincides with the argmax posterior component.
// Throws NumericError when weight <= 0 or sigma is not PD.
double squared_gmm_distance(const Eigen::VectorXd& y, double weight,
                            const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                            int k_total);

DistanceRow distance_row(const Eigen::VectorXd& y, const GmmParams& params,
                         DistanceMetric metric);

// Indices within delta of the row minimum, ascending.
std::vector<int> delta_neighbor_set(const DistanceRow& row, double delta);

// Returns k when row[k] < row[k'] - 2 delta for every other k', else
// kDiscarded. At most one component can satisfy the condition.
int deterministic_label(const DistanceRow& row, double delta);

// Precomputed per-component factors for evaluating many GMM distance rows
// against the same parameters.
class GmmDistanceCache {
 public:
  explicit GmmDistanceCache(const GmmParams& params);

  DistanceRow row(const Eigen::VectorXd& y) const;

 private:
  std::vector<ComponentDensity> comp_;
  std::vector<double> offset_;  // ln det(sigma) - 2 ln(K pi)
};

}  // namespace clab
