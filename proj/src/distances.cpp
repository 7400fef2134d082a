#include "distances.hpp"

#include <cmath>

namespace clab {

double squared_euclidean(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) {
  if (y.size() != mu.size()) throw ConfigError("dimension mismatch");
  return (y - mu).squaredNorm();
}

double squared_gmm_distance(const Eigen::VectorXd& y, double weight,
                            const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                            int k_total) {
  if (k_total < 1) throw ConfigError("component count must be positive");
  if (!(weight > 0.0)) throw NumericError("component weight must be positive");
  ComponentDensity comp(mu, sigma);
  return comp.quad_form(y) + comp.log_det() - 2.0 * std::log(k_total * weight);
}

GmmDistanceCache::GmmDistanceCache(const GmmParams& params) {
  int k_total = params.components();
  if (k_total < 1) throw ConfigError("mixture has no components");
  comp_.reserve(k_total);
  offset_.reserve(k_total);
  for (int k = 0; k < k_total; ++k) {
    if (!(params.weights[k] > 0.0))
      throw NumericError("component weight must be positive");
    comp_.emplace_back(params.means[k], params.covariances[k]);
    offset_.push_back(comp_.back().log_det() -
                      2.0 * std::log(k_total * params.weights[k]));
  }
}

DistanceRow GmmDistanceCache::row(const Eigen::VectorXd& y) const {
  DistanceRow out;
  out.metric = DistanceMetric::gmm;
  out.values.resize(static_cast<int>(comp_.size()));
  for (std::size_t k = 0; k < comp_.size(); ++k)
    out.values[static_cast<int>(k)] = comp_[k].quad_form(y) + offset_[k];
  return out;
}

DistanceRow distance_row(const Eigen::VectorXd& y, const GmmParams& params,
                         DistanceMetric metric) {
  if (metric == DistanceMetric::gmm) return GmmDistanceCache(params).row(y);

  DistanceRow out;
  out.metric = DistanceMetric::euclidean;
  out.values.resize(params.components());
  for (int k = 0; k < params.components(); ++k)
    out.values[k] = squared_euclidean(y, params.means[k]);
  return out;
}

std::vector<int> delta_neighbor_set(const DistanceRow& row, double delta) {
  if (delta < 0.0) throw ConfigError("delta must be nonnegative");
  if (row.components() < 1) throw ConfigError("empty distance row");
  if (!row.values.allFinite()) throw NumericError("distance row is not finite");
  double lo = row.values.minCoeff();
  std::vector<int> out;
  for (int k = 0; k < row.components(); ++k)
    if (row.values[k] - lo <= delta) out.push_back(k);
  return out;
}

int deterministic_label(const DistanceRow& row, double delta) {
  if (delta < 0.0) throw ConfigError("delta must be nonnegative");
  if (row.components() < 1) throw ConfigError("empty distance row");
  if (!row.values.allFinite()) throw NumericError("distance row is not finite");
  int best = 0;
  for (int k = 1; k < row.components(); ++k)
    if (row.values[k] < row.values[best]) best = k;
  // Only the strict minimizer can win the pairwise margin test.
  for (int k = 0; k < row.components(); ++k) {
    if (k == best) continue;
    if (!(row.values[best] < row.values[k] - 2.0 * delta)) return kDiscarded;
  }
  return best;
}

}  // namespace clab
