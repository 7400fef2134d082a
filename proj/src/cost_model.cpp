#include "cost_model.hpp"

#include <algorithm>
#include <cmath>

namespace clab {

DataMatrices DataMatrices::from_dataset(const Dataset& data) {
  data.validate();
  int n = data.size();
  int d = data.dim();
  DataMatrices out;
  out.v1 = data.points;
  out.v2.resize(n, d * d);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd y = data.points.row(i);
    Eigen::MatrixXd outer = y * y.transpose();
    out.v2.row(i) = Eigen::Map<Eigen::VectorXd>(outer.data(), d * d);
  }
  return out;
}

namespace {

// max_i sum_j |m_ij|^e with zero entries skipped, so negative exponents
// stay finite.
double power_row_sum_max(const Eigen::MatrixXd& m, double e) {
  double best = 0.0;
  for (int i = 0; i < m.rows(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < m.cols(); ++j) {
      double a = std::abs(m(i, j));
      if (a > 0.0) acc += std::pow(a, e);
    }
    best = std::max(best, acc);
  }
  return best;
}

}  // namespace

double s_p(const Eigen::MatrixXd& m, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("p must lie in [0, 1]");
  return power_row_sum_max(m, p);
}

double mu_coherence(const Eigen::MatrixXd& m) {
  if (m.size() == 0 || m.isZero(0.0)) throw ConfigError("matrix is zero");
  Eigen::MatrixXd mt = m.transpose();
  auto objective = [&](double p) {
    return std::sqrt(power_row_sum_max(m, 2.0 * p) *
                     power_row_sum_max(mt, 1.0 - 2.0 * p));
  };

  const int grid = 200;
  double best_p = 0.0;
  double best = objective(0.0);
  for (int i = 1; i <= grid; ++i) {
    double p = static_cast<double>(i) / grid;
    double v = objective(p);
    if (v < best) {
      best = v;
      best_p = p;
    }
  }
  double step = 1.0 / grid;
  for (int round = 0; round < 4; ++round) {
    double fine = step / 10.0;
    double center = best_p;
    for (int i = -10; i <= 10; ++i) {
      double p = std::clamp(center + i * fine, 0.0, 1.0);
      double v = objective(p);
      if (v < best) {
        best = v;
        best_p = p;
      }
    }
    step = fine;
  }
  return std::min(m.norm(), best);
}

double condition_number(const Eigen::MatrixXd& m) {
  if (m.size() == 0) throw ConfigError("matrix is empty");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  double largest = sv(0);
  if (!(largest > 0.0)) throw NumericError("matrix is zero");
  double cutoff = 1e-12 * largest;
  double smallest = largest;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) smallest = sv(i);
  return largest / smallest;
}

std::pair<double, double> eta_values(const Dataset& data) {
  double eta_mu = 0.0;
  for (int i = 0; i < data.size(); ++i)
    eta_mu = std::max(eta_mu, data.points.row(i).squaredNorm());
  return {eta_mu, eta_mu * eta_mu};
}

EpsilonBudget epsilon_budget(double delta, double eta_mu, double eta_sigma) {
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  if (!(eta_mu > 0.0) || !(eta_sigma > 0.0))
    throw ConfigError("eta values must be positive");
  const double margin = 0.9;
  EpsilonBudget b;
  b.eps1 = margin * delta / 2.0;
  b.eps3_mu = b.eps4_mu = margin * delta / (4.0 * std::sqrt(eta_mu));
  b.eps3_sigma = b.eps4_sigma = margin * delta / (4.0 * std::sqrt(eta_sigma));
  b.eps4_pi = b.eps1;
  return b;
}

long n_pi_samples_required(int k_total, double eps4_pi, double delta_fail) {
  if (k_total < 1) throw ConfigError("component count must be positive");
  if (!(eps4_pi > 0.0)) throw ConfigError("eps4_pi must be positive");
  if (!(delta_fail > 0.0 && delta_fail < 1.0))
    throw ConfigError("failure probability must lie in (0, 1)");
  double per_component = 1.0 - std::pow(1.0 - delta_fail, 1.0 / k_total);
  double n = (2.0 * k_total / (eps4_pi * eps4_pi)) * std::log(2.0 / per_component);
  return static_cast<long>(std::ceil(n));
}

CostReport evaluate_cost_terms(const CostIngredients& ing, const EpsilonBudget& b) {
  if (ing.k < 1 || ing.d < 1) throw ConfigError("invalid ingredient dimensions");
  for (double e : {b.eps1, b.eps3_mu, b.eps4_mu, b.eps3_sigma, b.eps4_sigma, b.eps4_pi})
    if (!(e > 0.0)) throw ConfigError("epsilon budget entries must be positive");

  double k = ing.k;
  double d = ing.d;
  CostReport r;
  r.ingredients = ing;
  r.budget = b;
  r.term_pi_main = k * k / (b.eps1 * b.eps4_pi * b.eps4_pi);
  r.term_pi_itemized = k * r.term_pi_main;
  r.term_mu_tomo =
      k * d * (ing.kappa_v1 / (b.eps4_mu * b.eps4_mu)) *
      (ing.mu_v1 + k * ing.eta_mu / b.eps1);
  r.term_mu_norm =
      (k * k / b.eps1) * ing.eta_mu * ing.kappa_v1 * ing.mu_v1 / b.eps3_mu;
  r.term_sigma_tomo =
      k * d * d * (ing.kappa_v2 / (b.eps4_sigma * b.eps4_sigma)) *
      (ing.mu_v2 + k * ing.eta_sigma / b.eps1);
  r.term_sigma_norm =
      (k * k / b.eps1) * ing.eta_sigma * ing.kappa_v2 * ing.mu_v2 / b.eps3_sigma;
  r.total = r.term_pi_itemized + r.term_mu_tomo + r.term_mu_norm +
            r.term_sigma_tomo + r.term_sigma_norm;
  return r;
}

CostReport qem_runtime_estimate(const DataMatrices& matrices, int k_total,
                                const EpsilonBudget& budget) {
  CostIngredients ing;
  ing.k = k_total;
  ing.d = static_cast<int>(matrices.v1.cols());
  ing.kappa_v1 = condition_number(matrices.v1);
  ing.kappa_v2 = condition_number(matrices.v2);
  ing.mu_v1 = mu_coherence(matrices.v1);
  ing.mu_v2 = mu_coherence(matrices.v2);
  double eta = 0.0;
  for (int i = 0; i < matrices.v1.rows(); ++i)
    eta = std::max(eta, matrices.v1.row(i).squaredNorm());
  ing.eta_mu = eta;
  ing.eta_sigma = eta * eta;
  CostReport r = evaluate_cost_terms(ing, budget);
  return r;
}

}  // namespace clab
