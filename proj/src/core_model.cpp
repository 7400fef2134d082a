#include "core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace clab {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454836;
}

void Dataset::validate() const {
  if (points.rows() < 1) throw ConfigError("dataset is empty");
  if (points.cols() < 1) throw ConfigError("dataset has no columns");
  if (!points.allFinite()) throw ConfigError("dataset contains non-finite values");
  if (true_labels) {
    if (static_cast<int>(true_labels->size()) != size())
      throw ConfigError("label count does not match point count");
    for (int v : *true_labels)
      if (v < 0) throw ConfigError("labels must be positive");
  }
}

int HardAssignment::discarded_count() const {
  return static_cast<int>(std::count(labels.begin(), labels.end(), kDiscarded));
}

std::vector<int> HardAssignment::cluster_sizes(int k_total) const {
  std::vector<int> sizes(k_total, 0);
  for (int v : labels)
    if (v >= 0 && v < k_total) ++sizes[v];
  return sizes;
}

ComponentDensity::ComponentDensity(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma)
    : mu_(mu) {
  if (sigma.rows() != sigma.cols() || sigma.rows() != mu.size())
    throw ConfigError("covariance dimensions do not match mean");
  llt_.compute(sigma);
  if (llt_.info() != Eigen::Success)
    throw NumericError("covariance is not positive definite");
  log_det_ = 0.0;
  const auto& l = llt_.matrixLLT();
  for (int i = 0; i < l.rows(); ++i) {
    double lii = l(i, i);
    if (!(lii > 0.0) || !std::isfinite(lii))
      throw NumericError("covariance is not positive definite");
    log_det_ += 2.0 * std::log(lii);
  }
}

double ComponentDensity::quad_form(const Eigen::VectorXd& y) const {
  if (y.size() != mu_.size()) throw ConfigError("point dimension does not match mean");
  Eigen::VectorXd diff = y - mu_;
  // Solve L z = diff; the quadratic form is ||z||^2.
  llt_.matrixL().solveInPlace(diff);
  return diff.squaredNorm();
}

double ComponentDensity::logpdf(const Eigen::VectorXd& y) const {
  double d = static_cast<double>(mu_.size());
  return -0.5 * (d * kLogTwoPi + log_det_ + quad_form(y));
}

double gaussian_logpdf(const Eigen::VectorXd& y, const Eigen::VectorXd& mu,
                       const Eigen::MatrixXd& sigma) {
  return ComponentDensity(mu, sigma).logpdf(y);
}

double gmm_log_likelihood(const Dataset& data, const GmmParams& params) {
  int k_total = params.components();
  if (k_total < 1) throw ConfigError("mixture has no components");
  if (params.dim() != data.dim())
    throw ConfigError("mixture dimension does not match dataset");

  std::vector<ComponentDensity> comp;
  std::vector<double> log_pi(k_total, -std::numeric_limits<double>::infinity());
  comp.reserve(k_total);
  for (int k = 0; k < k_total; ++k) {
    comp.emplace_back(params.means[k], params.covariances[k]);
    if (params.weights[k] > 0.0) log_pi[k] = std::log(params.weights[k]);
  }

  double total = 0.0;
  std::vector<double> terms(k_total);
  for (int i = 0; i < data.size(); ++i) {
    Eigen::VectorXd y = data.points.row(i);
    double best = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < k_total; ++k) {
      terms[k] = log_pi[k] + comp[k].logpdf(y);
      best = std::max(best, terms[k]);
    }
    if (!std::isfinite(best)) {
      total = -std::numeric_limits<double>::infinity();
      continue;
    }
    double acc = 0.0;
    for (int k = 0; k < k_total; ++k) acc += std::exp(terms[k] - best);
    total += best + std::log(acc);
  }
  return total;
}

std::vector<std::string> validate_params(const GmmParams& params) {
  std::vector<std::string> out;
  int k_total = params.components();
  auto add = [&out](const std::string& s) { out.push_back(s); };

  if (k_total < 1) {
    add("mixture has no components");
    return out;
  }
  if (static_cast<int>(params.means.size()) != k_total ||
      static_cast<int>(params.covariances.size()) != k_total) {
    add("component count mismatch between weights, means and covariances");
    return out;
  }

  double sum = params.weights.sum();
  if (std::abs(sum - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "weights sum to " << sum << ", expected 1";
    add(os.str());
  }
  int d = params.dim();
  for (int k = 0; k < k_total; ++k) {
    std::string name = "component " + std::to_string(k + 1);
    if (params.weights[k] < 0.0) add(name + ": weight is negative");
    if (params.means[k].size() != d) add(name + ": mean dimension mismatch");
    const Eigen::MatrixXd& s = params.covariances[k];
    if (s.rows() != d || s.cols() != d) {
      add(name + ": covariance dimension mismatch");
      continue;
    }
    if (!s.isApprox(s.transpose(), 1e-9)) add(name + ": covariance is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (s + s.transpose()));
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
      add(name + ": covariance is not positive definite");
  }
  return out;
}

Eigen::MatrixXd repair_covariance(const Eigen::MatrixXd& sigma, double jitter) {
  if (sigma.rows() != sigma.cols()) throw ConfigError("covariance must be square");
  Eigen::MatrixXd sym = 0.5 * (sigma + sigma.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) throw NumericError("eigenvalue computation failed");
  double smallest = es.eigenvalues().minCoeff();
  if (smallest <= 0.0) {
    double shift = std::abs(smallest) + jitter;
    sym += shift * Eigen::MatrixXd::Identity(sym.rows(), sym.cols());
  }
  return sym;
}

Eigen::VectorXd normalize_weights(const Eigen::VectorXd& pi) {
  Eigen::VectorXd out = pi.cwiseMax(0.0);
  double sum = out.sum();
  if (!(sum > 0.0) || !std::isfinite(sum)) throw NumericError("degenerate weights");
  return out / sum;
}

}  // namespace clab
