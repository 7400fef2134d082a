#include "quantum_emulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace clab {

namespace {

constexpr double kPi = std::numbers::pi;
// Grids up to this size keep a cumulative table; larger ones are streamed.
constexpr int kMaterializeLimit = 1 << 17;
constexpr int kGridCap = 1 << 26;

}  // namespace

int ModeEvalSpec::required_copies(double delta_fail, double a0) {
  if (!(delta_fail > 0.0 && delta_fail < 1.0))
    throw ConfigError("failure probability must lie in (0, 1)");
  if (!(a0 > 0.5 && a0 <= 1.0))
    throw ConfigError("per-sample success probability must lie in (1/2, 1]");
  double gap = a0 - 0.5;
  double l = std::log(1.0 / delta_fail) / (2.0 * gap * gap);
  return std::max(1, static_cast<int>(std::ceil(l)));
}

double inner_product_probability(const Eigen::VectorXd& y_hat,
                                 const Eigen::VectorXd& mu_hat,
                                 const Eigen::MatrixXd& g) {
  if (y_hat.size() != mu_hat.size()) throw ConfigError("dimension mismatch");
  if (g.rows() != g.cols() || g.rows() != y_hat.size())
    throw ConfigError("matrix dimension mismatch");
  if (std::abs(y_hat.norm() - 1.0) > 1e-9 || std::abs(mu_hat.norm() - 1.0) > 1e-9)
    throw ConfigError("inputs must be unit vectors");
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + g.cwiseAbs().maxCoeff()))
    throw ConfigError("matrix must be symmetric");
  double ip = (g * y_hat).dot(g * mu_hat);
  return std::clamp(0.5 * (1.0 - ip), 0.0, 1.0);
}

AeOutcomeDistribution::AeOutcomeDistribution(double p, int grid_size) {
  if (grid_size < 2) throw ConfigError("grid size must be at least 2");
  if (!(p >= -1e-12 && p <= 1.0 + 1e-12)) throw ConfigError("p must lie in [0, 1]");
  p_ = std::clamp(p, 0.0, 1.0);
  grid_ = grid_size;
  double omega = std::asin(std::sqrt(p_)) / kPi;  // phase in [0, 1/2]
  c_ = grid_ * omega;

  double nearest = std::round(c_);
  if (std::abs(c_ - nearest) <= 1e-8) {
    on_grid_ = true;
    m_on_ = static_cast<int>(nearest) % grid_;
    m_on2_ = (grid_ - m_on_) % grid_;
    z_ = 1.0;
    return;
  }

  double s = std::sin(kPi * c_);
  numerator_ = s * s;
  double acc = 0.0;
  if (grid_ <= kMaterializeLimit) {
    cum_.resize(grid_);
    scan_masses([&](int m, double mass) {
      acc += mass;
      cum_[m] = acc;
    });
  } else {
    scan_masses([&](int, double mass) { acc += mass; });
  }
  z_ = acc;
}

template <typename Visit>
void AeOutcomeDistribution::scan_masses(Visit visit) const {
  const double h = kPi / grid_;
  const double ch = std::cos(h), sh = std::sin(h);
  const double scale = 0.5 * numerator_ / (static_cast<double>(grid_) * grid_);
  double s1 = 0, c1 = 0, s2 = 0, c2 = 0;
  for (int m = 0; m < grid_; ++m) {
    if ((m & 4095) == 0) {
      // Resync the rotation recurrence to bound drift on long scans.
      double a1 = kPi * (m - c_) / grid_;
      double a2 = kPi * (m + c_) / grid_;
      s1 = std::sin(a1);
      c1 = std::cos(a1);
      s2 = std::sin(a2);
      c2 = std::cos(a2);
    }
    double f1 = s1 != 0.0 ? std::min(scale / (s1 * s1), 0.5) : 0.5;
    double f2 = s2 != 0.0 ? std::min(scale / (s2 * s2), 0.5) : 0.5;
    visit(m, f1 + f2);
    double t = s1 * ch + c1 * sh;
    c1 = c1 * ch - s1 * sh;
    s1 = t;
    t = s2 * ch + c2 * sh;
    c2 = c2 * ch - s2 * sh;
    s2 = t;
  }
}

double AeOutcomeDistribution::raw_mass(int m) const {
  const double scale = 0.5 * numerator_ / (static_cast<double>(grid_) * grid_);
  double s1 = std::sin(kPi * (m - c_) / grid_);
  double s2 = std::sin(kPi * (m + c_) / grid_);
  double f1 = s1 != 0.0 ? std::min(scale / (s1 * s1), 0.5) : 0.5;
  double f2 = s2 != 0.0 ? std::min(scale / (s2 * s2), 0.5) : 0.5;
  return f1 + f2;
}

double AeOutcomeDistribution::probability(int m) const {
  if (m < 0 || m >= grid_) throw ConfigError("outcome out of range");
  if (on_grid_) {
    if (m_on_ == m_on2_) return m == m_on_ ? 1.0 : 0.0;
    return (m == m_on_ || m == m_on2_) ? 0.5 : 0.0;
  }
  return raw_mass(m) / z_;
}

double AeOutcomeDistribution::estimate_for(int m) const {
  if (m < 0 || m >= grid_) throw ConfigError("outcome out of range");
  double s = std::sin(kPi * m / grid_);
  return s * s;
}

int AeOutcomeDistribution::sample(Rng& rng) const {
  if (on_grid_) {
    if (m_on_ == m_on2_) return m_on_;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return u(rng) < 0.5 ? m_on_ : m_on2_;
  }
  if (!cum_.empty()) {
    std::uniform_real_distribution<double> u(0.0, z_);
    auto it = std::upper_bound(cum_.begin(), cum_.end(), u(rng));
    if (it == cum_.end()) --it;
    return static_cast<int>(it - cum_.begin());
  }
  return sample_many(rng, 1).front();
}

std::vector<int> AeOutcomeDistribution::sample_many(Rng& rng, int count) const {
  if (count < 0) throw ConfigError("sample count must be nonnegative");
  std::vector<int> out(count);
  if (count == 0) return out;
  if (on_grid_ || !cum_.empty()) {
    for (int i = 0; i < count; ++i) out[i] = sample(rng);
    return out;
  }
  // Streamed grid: draw all thresholds first, then walk the pmf once.
  std::vector<std::pair<double, int>> thresholds(count);
  std::uniform_real_distribution<double> u(0.0, z_);
  for (int i = 0; i < count; ++i) thresholds[i] = {u(rng), i};
  std::sort(thresholds.begin(), thresholds.end());
  double acc = 0.0;
  std::size_t next = 0;
  scan_masses([&](int m, double mass) {
    acc += mass;
    while (next < thresholds.size() && thresholds[next].first < acc)
      out[thresholds[next++].second] = m;
  });
  while (next < thresholds.size()) out[thresholds[next++].second] = grid_ - 1;
  return out;
}

double ae_sample(double p, const AeChannel& channel, Rng& rng) {
  AeOutcomeDistribution dist(p, channel.grid_size);
  return dist.estimate_for(dist.sample(rng));
}

double mode_evaluate(const std::vector<double>& samples, const ModeEvalSpec& spec) {
  if (samples.empty()) throw ConfigError("no samples to vote over");
  if (static_cast<int>(samples.size()) != spec.effective_copies())
    throw ConfigError("sample count does not match the repetition spec");
  std::map<double, int> counts;
  for (double v : samples) ++counts[v];
  double best_value = samples.front();
  int best_count = 0;
  for (const auto& [value, count] : counts) {
    if (count > best_count) {
      best_count = count;
      best_value = value;
    }
  }
  return best_value;
}

Eigen::VectorXd tomography_apply(const Eigen::VectorXd& v,
                                 const TomographyChannel& channel, Rng& rng) {
  if (channel.eps_dir < 0.0 || channel.eps_norm < 0.0)
    throw ConfigError("channel parameters must be nonnegative");
  double norm = v.norm();
  if (!(norm > 0.0)) throw ConfigError("cannot read out a zero vector");
  int d = static_cast<int>(v.size());
  Eigen::VectorXd x_hat = v / norm;

  Eigen::VectorXd u_hat = x_hat;
  if (channel.eps_dir > 0.0 && d > 1) {
    // Pick a random direction orthogonal to x_hat, then move along the
    // sphere by a chord of the drawn length, which keeps ||u - x|| exact.
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd w(d);
    Eigen::VectorXd tangent;
    double tnorm = 0.0;
    do {
      for (int j = 0; j < d; ++j) w[j] = gauss(rng);
      tangent = w - w.dot(x_hat) * x_hat;
      tnorm = tangent.norm();
    } while (!(tnorm > 1e-9));
    tangent /= tnorm;
    std::uniform_real_distribution<double> u(0.0, channel.eps_dir);
    double chord = std::min(u(rng), 2.0);
    double alpha = 2.0 * std::asin(0.5 * chord);
    u_hat = std::cos(alpha) * x_hat + std::sin(alpha) * tangent;
  }

  double xi = 0.0;
  if (channel.eps_norm > 0.0) {
    std::uniform_real_distribution<double> u(-channel.eps_norm, channel.eps_norm);
    xi = u(rng);
  }
  return norm * (1.0 + xi) * u_hat;
}

Eigen::VectorXd estimate_weights(const Eigen::VectorXd& label_probs, int k_total,
                                 long n_pi_samples, Rng& rng) {
  if (label_probs.size() != k_total) throw ConfigError("probability vector size mismatch");
  if (n_pi_samples < 1) throw ConfigError("sample count must be at least 1");
  for (int k = 0; k < k_total; ++k)
    if (!(label_probs[k] >= 0.0) || !std::isfinite(label_probs[k]))
      throw ConfigError("invalid label probability");
  if (!(label_probs.sum() > 0.0)) throw ConfigError("all label probabilities vanish");

  std::discrete_distribution<int> dist(label_probs.data(),
                                       label_probs.data() + k_total);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(k_total);
  for (long i = 0; i < n_pi_samples; ++i) counts[dist(rng)] += 1.0;
  return counts / static_cast<double>(n_pi_samples);
}

namespace {

struct QemComponentCache {
  Eigen::MatrixXd g;  // Sigma^{-1/2}
  Eigen::VectorXd g_mu;
  double norm_g_mu = 0.0;
  double offset = 0.0;  // ln det Sigma - 2 ln(K pi)
};

std::vector<QemComponentCache> build_qem_cache(const GmmParams& params) {
  int k_total = params.components();
  if (k_total < 1) throw ConfigError("mixture has no components");
  std::vector<QemComponentCache> out(k_total);
  for (int k = 0; k < k_total; ++k) {
    if (!(params.weights[k] > 0.0))
      throw NumericError("component weight must be positive");
    const Eigen::MatrixXd& sigma = params.covariances[k];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (sigma + sigma.transpose()));
    if (es.info() != Eigen::Success)
      throw NumericError("eigenvalue computation failed");
    const Eigen::VectorXd& evals = es.eigenvalues();
    if (!(evals.minCoeff() > 0.0))
      throw NumericError("covariance is not positive definite");
    Eigen::VectorXd inv_sqrt = evals.cwiseSqrt().cwiseInverse();
    out[k].g = es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
    out[k].g_mu = out[k].g * params.means[k];
    out[k].norm_g_mu = out[k].g_mu.norm();
    out[k].offset = evals.array().log().sum() -
                    2.0 * std::log(k_total * params.weights[k]);
  }
  return out;
}

int derive_grid_size(double amp, double p, double eps1) {
  double spread = 2.0 * kPi * std::sqrt(std::max(0.0, p * (1.0 - p)));
  for (int grid = 2; grid <= kGridCap; grid *= 2) {
    double bound = amp * (spread / grid + (kPi / grid) * (kPi / grid));
    if (bound <= eps1) return grid;
  }
  throw ConfigError("amplitude-estimation grid would exceed the supported size");
}

// One channel-estimated entry; also reports the exact value.
double noisy_entry(const QemComponentCache& cc, const Eigen::VectorXd& y,
                   const QemConfig& config, Rng& rng, double* exact_out) {
  Eigen::VectorXd gy = cc.g * y;
  double ny = gy.norm();
  double nm = cc.norm_g_mu;
  double exact = (gy - cc.g_mu).squaredNorm() + cc.offset;
  if (exact_out) *exact_out = exact;
  if (config.eps1 == 0.0) return exact;
  if (ny == 0.0 || nm == 0.0) return exact;  // no cross term to estimate

  double cos_v = std::clamp(gy.dot(cc.g_mu) / (ny * nm), -1.0, 1.0);
  double p = std::clamp(0.5 * (1.0 - cos_v), 0.0, 1.0);
  int grid = derive_grid_size(4.0 * ny * nm, p, config.eps1);
  AeOutcomeDistribution dist(p, grid);
  int copies = config.mode_eval.effective_copies();
  std::vector<int> outcomes = dist.sample_many(rng, copies);
  std::vector<double> estimates(copies);
  for (int i = 0; i < copies; ++i) estimates[i] = dist.estimate_for(outcomes[i]);
  double p_tilde = mode_evaluate(estimates, config.mode_eval);
  double q = ny * ny + nm * nm - 2.0 * ny * nm * (1.0 - 2.0 * p_tilde);
  return q + cc.offset;
}

Eigen::VectorXd read_out(const Eigen::VectorXd& v, const TomographyChannel& channel,
                         Rng& rng) {
  if (channel.eps_dir == 0.0 && channel.eps_norm == 0.0) return v;
  if (!(v.norm() > 0.0)) return v;  // nothing to perturb
  return tomography_apply(v, channel, rng);
}

}  // namespace

QemConfig qem_config_from_budget(int k_total, double delta, const EpsilonBudget& budget,
                                 double pi_fail) {
  QemConfig config;
  config.k = k_total;
  config.delta = delta;
  config.eps1 = budget.eps1;
  config.mu_channel = {budget.eps3_mu, budget.eps4_mu};
  config.sigma_channel = {budget.eps3_sigma, budget.eps4_sigma};
  config.pi_channel = {0.0, budget.eps4_pi};
  config.n_pi_samples = n_pi_samples_required(k_total, budget.eps4_pi, pi_fail);
  return config;
}

void validate_qem_config(const QemConfig& config, double eta_mu, double eta_sigma) {
  if (config.k < 1) throw ConfigError("component count must be positive");
  if (config.delta < 0.0) throw ConfigError("delta must be nonnegative");
  if (config.eps1 < 0.0) throw ConfigError("eps1 must be nonnegative");
  if (config.eps1 > 0.0 && !(config.eps1 < config.delta / 2.0))
    throw ConfigError("eps1 must be below delta/2");
  if (config.n_pi_samples < 0) throw ConfigError("n_pi_samples must be nonnegative");

  auto check_channel = [&](const TomographyChannel& ch, double eta, const char* name) {
    if (ch.eps_dir < 0.0 || ch.eps_norm < 0.0)
      throw ConfigError(std::string(name) + " channel parameters must be nonnegative");
    if (!(eta > 0.0)) return;
    double bound = config.delta / (4.0 * std::sqrt(eta));
    if (ch.eps_dir > 0.0 && !(ch.eps_dir < bound))
      throw ConfigError(std::string(name) + " direction error exceeds delta/(4 sqrt(eta))");
    if (ch.eps_norm > 0.0 && !(ch.eps_norm < bound))
      throw ConfigError(std::string(name) + " norm error exceeds delta/(4 sqrt(eta))");
  };
  check_channel(config.mu_channel, eta_mu, "mean");
  check_channel(config.sigma_channel, eta_sigma, "covariance");
  if (config.pi_channel.eps_dir < 0.0 || config.pi_channel.eps_norm < 0.0)
    throw ConfigError("weight channel parameters must be nonnegative");
}

DistanceRow noisy_distance_row(const Eigen::VectorXd& y, const GmmParams& params,
                               const QemConfig& config, Rng& rng) {
  if (config.eps1 < 0.0) throw ConfigError("eps1 must be nonnegative");
  if (config.eps1 > 0.0 && !(config.eps1 < config.delta / 2.0))
    throw ConfigError("eps1 must be below delta/2");
  auto cache = build_qem_cache(params);
  DistanceRow row;
  row.metric = DistanceMetric::gmm;
  row.values.resize(params.components());
  for (int k = 0; k < params.components(); ++k)
    row.values[k] = noisy_entry(cache[k], y, config, rng, nullptr);
  return row;
}

FitResult run_qem_emulation(const Dataset& data, const GmmParams& init,
                            const QemConfig& config, QemObserver* observer) {
  if (config.max_iters < 1) throw ConfigError("max_iters must be positive");
  if (config.k != init.components())
    throw ConfigError("component count does not match the initial parameters");
  data.validate();
  auto [eta_mu, eta_sigma] = eta_values(data);
  validate_qem_config(config, eta_mu, eta_sigma);

  int n = data.size();
  int d = data.dim();
  int k_total = config.k;
  double small_cluster = static_cast<double>(n) / (10.0 * k_total);

  Rng rng = make_rng(config.seed);
  FitResult result;
  result.params = init;
  for (int t = 1; t <= config.max_iters; ++t) {
    auto cache = build_qem_cache(result.params);
    HardAssignment labels;
    labels.labels.resize(n);
    bool record = observer != nullptr;
    std::vector<DistanceRow> noisy_rows(record ? n : 0);
    std::vector<DistanceRow> exact_rows(record ? n : 0);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd y = data.points.row(i);
      DistanceRow row;
      row.metric = DistanceMetric::gmm;
      row.values.resize(k_total);
      DistanceRow exact = row;
      for (int k = 0; k < k_total; ++k)
        row.values[k] = noisy_entry(cache[k], y, config, rng, &exact.values[k]);
      labels.labels[i] = deterministic_label(row, config.delta);
      if (record) {
        noisy_rows[i] = row;
        exact_rows[i] = exact;
      }
    }
    result.discard_counts.push_back(labels.discarded_count());
    if (observer) observer->on_iteration(t, result.params, noisy_rows, exact_rows, labels);

    HardStats stats = hard_estimates(data, labels, k_total, rng);
    result.reseeds += stats.reseeds;
    for (int k = 0; k < k_total; ++k)
      if (stats.counts[k] > 0.0 && stats.counts[k] < small_cluster)
        ++result.small_cluster_events;

    for (int k = 0; k < k_total; ++k)
      stats.means[k] = read_out(stats.means[k], config.mu_channel, rng);
    for (int k = 0; k < k_total; ++k) {
      Eigen::VectorXd vec = Eigen::Map<Eigen::VectorXd>(stats.covs[k].data(), d * d);
      vec = read_out(vec, config.sigma_channel, rng);
      stats.covs[k] = Eigen::Map<Eigen::MatrixXd>(vec.data(), d, d);
    }
    if (config.n_pi_samples > 0)
      stats.weights = estimate_weights(stats.weights, k_total, config.n_pi_samples, rng);

    result.params = finish_hard_params(stats, config.cov_floor);
    result.loglik_trace.push_back(gmm_log_likelihood(data, result.params));
    result.iterations = t;
    result.final_assignment = labels;
    if (moving_average_converged(result.loglik_trace, config.tol)) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace clab
