#include "em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace clab {

Responsibilities e_step(const Dataset& data, const GmmParams& params) {
  int n = data.size();
  int k_total = params.components();
  if (k_total < 1) throw ConfigError("mixture has no components");
  if (params.dim() != data.dim())
    throw ConfigError("mixture dimension does not match dataset");

  std::vector<ComponentDensity> comp;
  comp.reserve(k_total);
  std::vector<double> log_pi(k_total, -std::numeric_limits<double>::infinity());
  for (int k = 0; k < k_total; ++k) {
    comp.emplace_back(params.means[k], params.covariances[k]);
    if (params.weights[k] > 0.0) log_pi[k] = std::log(params.weights[k]);
  }

  Responsibilities resp;
  resp.r.resize(n, k_total);
  std::vector<double> terms(k_total);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd y = data.points.row(i);
    double best = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < k_total; ++k) {
      terms[k] = log_pi[k] + comp[k].logpdf(y);
      best = std::max(best, terms[k]);
    }
    if (!std::isfinite(best)) throw NumericError("all components vanish at a point");
    double denom = 0.0;
    for (int k = 0; k < k_total; ++k) {
      terms[k] = std::exp(terms[k] - best);
      denom += terms[k];
    }
    for (int k = 0; k < k_total; ++k) resp.r(i, k) = terms[k] / denom;
  }
  return resp;
}

GmmParams m_step(const Dataset& data, const Responsibilities& resp, double cov_floor,
                 Rng& rng, int* reseeds) {
  int n = data.size();
  int k_total = static_cast<int>(resp.r.cols());
  int d = data.dim();
  if (resp.r.rows() != n) throw ConfigError("responsibility rows do not match dataset");

  GmmParams out;
  out.weights.resize(k_total);
  out.means.assign(k_total, Eigen::VectorXd::Zero(d));
  out.covariances.assign(k_total, Eigen::MatrixXd::Zero(d, d));

  std::vector<int> empty;
  for (int k = 0; k < k_total; ++k) {
    double mass = resp.r.col(k).sum();
    if (mass <= 1e-12) {
      empty.push_back(k);
      continue;
    }
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < n; ++i) mu += resp.r(i, k) * data.points.row(i).transpose();
    mu /= mass;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd diff = data.points.row(i).transpose() - mu;
      cov += resp.r(i, k) * (diff * diff.transpose());
    }
    cov /= mass;
    out.weights[k] = mass / n;
    out.means[k] = mu;
    out.covariances[k] = cov;
  }

  for (int k : empty) {
    std::uniform_int_distribution<int> pick(0, n - 1);
    out.means[k] = data.points.row(pick(rng));
    out.covariances[k] = Eigen::MatrixXd::Identity(d, d);
    out.weights[k] = 1.0 / n;
    if (reseeds) ++(*reseeds);
  }
  if (!empty.empty()) out.weights = normalize_weights(out.weights);

  for (int k = 0; k < k_total; ++k)
    out.covariances[k] = repair_covariance(out.covariances[k], cov_floor);
  return out;
}

HardStats hard_estimates(const Dataset& data, const HardAssignment& assignment,
                         int k_total, Rng& rng) {
  int n = data.size();
  int d = data.dim();
  if (static_cast<int>(assignment.labels.size()) != n)
    throw ConfigError("assignment length does not match dataset");

  HardStats stats;
  stats.counts = Eigen::VectorXd::Zero(k_total);
  stats.means.assign(k_total, Eigen::VectorXd::Zero(d));
  stats.covs.assign(k_total, Eigen::MatrixXd::Zero(d, d));
  stats.weights = Eigen::VectorXd::Zero(k_total);

  for (int i = 0; i < n; ++i) {
    int l = assignment.labels[i];
    if (l < 0) continue;
    if (l >= k_total) throw ConfigError("label out of range");
    stats.counts[l] += 1.0;
    stats.means[l] += data.points.row(i).transpose();
  }
  double total = stats.counts.sum();
  for (int k = 0; k < k_total; ++k)
    if (stats.counts[k] > 0.0) stats.means[k] /= stats.counts[k];
  for (int i = 0; i < n; ++i) {
    int l = assignment.labels[i];
    if (l < 0) continue;
    Eigen::VectorXd diff = data.points.row(i).transpose() - stats.means[l];
    stats.covs[l] += diff * diff.transpose();
  }
  for (int k = 0; k < k_total; ++k) {
    if (stats.counts[k] > 0.0) {
      stats.covs[k] /= stats.counts[k];
      stats.weights[k] = stats.counts[k] / total;
    } else {
      std::uniform_int_distribution<int> pick(0, n - 1);
      stats.means[k] = data.points.row(pick(rng));
      stats.covs[k] = Eigen::MatrixXd::Identity(d, d);
      stats.weights[k] = 1.0 / n;
      ++stats.reseeds;
    }
  }
  return stats;
}

GmmParams finish_hard_params(const HardStats& stats, double cov_floor) {
  GmmParams out;
  out.weights = normalize_weights(stats.weights);
  out.means = stats.means;
  out.covariances.reserve(stats.covs.size());
  for (const auto& cov : stats.covs)
    out.covariances.push_back(repair_covariance(cov, cov_floor));
  return out;
}

GmmParams hard_m_step(const Dataset& data, const HardAssignment& assignment,
                      int k_total, double cov_floor, Rng& rng, int* reseeds) {
  HardStats stats = hard_estimates(data, assignment, k_total, rng);
  if (reseeds) *reseeds += stats.reseeds;
  return finish_hard_params(stats, cov_floor);
}

GmmParams random_init(const Dataset& data, int k_total, std::uint64_t seed) {
  int n = data.size();
  if (k_total < 1) throw ConfigError("component count must be positive");
  if (n < k_total) throw ConfigError("fewer points than components");

  Rng rng = make_rng(seed);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);

  Responsibilities resp;
  resp.r = Eigen::MatrixXd::Zero(n, k_total);
  for (int i = 0; i < n; ++i) resp.r(perm[i], i % k_total) = 1.0;
  return m_step(data, resp, 1e-6, rng);
}

bool moving_average_converged(const std::vector<double>& trace, double tol,
                              int window) {
  int n = static_cast<int>(trace.size());
  if (window < 1 || n < window + 1) return false;
  double now = 0.0, prev = 0.0;
  for (int i = n - window; i < n; ++i) now += trace[i];
  for (int i = n - window - 1; i < n - 1; ++i) prev += trace[i];
  return std::abs(now - prev) / window < tol;
}

HardAssignment argmax_assignment(const Responsibilities& resp) {
  HardAssignment out;
  out.labels.resize(resp.r.rows());
  for (int i = 0; i < resp.r.rows(); ++i) {
    int best = 0;
    for (int k = 1; k < resp.r.cols(); ++k)
      if (resp.r(i, k) > resp.r(i, best)) best = k;
    out.labels[i] = best;
  }
  return out;
}

HardAssignment argmin_gmm_assignment(const Dataset& data, const GmmParams& params) {
  GmmDistanceCache cache(params);
  HardAssignment out;
  out.labels.resize(data.size());
  for (int i = 0; i < data.size(); ++i) {
    DistanceRow row = cache.row(data.points.row(i));
    int best = 0;
    for (int k = 1; k < row.components(); ++k)
      if (row.values[k] < row.values[best]) best = k;
    out.labels[i] = best;
  }
  return out;
}

FitResult run_em(const Dataset& data, const GmmParams& init, const EmConfig& config) {
  if (config.max_iters < 1) throw ConfigError("max_iters must be positive");
  if (!(config.tol >= 0.0)) throw ConfigError("tol must be nonnegative");
  data.validate();

  Rng rng = make_rng(config.seed);
  FitResult result;
  result.params = init;
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int t = 1; t <= config.max_iters; ++t) {
    Responsibilities resp = e_step(data, result.params);
    result.params = m_step(data, resp, config.cov_floor, rng, &result.reseeds);
    double ll = gmm_log_likelihood(data, result.params);
    result.loglik_trace.push_back(ll);
    result.iterations = t;
    if (t > 1 && std::abs(ll - prev_ll) < config.tol) {
      result.converged = true;
      break;
    }
    prev_ll = ll;
  }
  result.final_assignment = argmax_assignment(e_step(data, result.params));
  return result;
}

FitResult run_classification_em(const Dataset& data, const GmmParams& init,
                                const EmConfig& config, bool record_labels) {
  if (config.max_iters < 1) throw ConfigError("max_iters must be positive");
  data.validate();

  Rng rng = make_rng(config.seed);
  FitResult result;
  result.params = init;
  int k_total = init.components();
  for (int t = 1; t <= config.max_iters; ++t) {
    HardAssignment assignment = argmin_gmm_assignment(data, result.params);
    result.params = hard_m_step(data, assignment, k_total, config.cov_floor, rng,
                                &result.reseeds);
    result.loglik_trace.push_back(gmm_log_likelihood(data, result.params));
    result.iterations = t;
    if (record_labels) result.label_history.push_back(assignment.labels);
    result.final_assignment = assignment;
    if (moving_average_converged(result.loglik_trace, config.tol)) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace clab
