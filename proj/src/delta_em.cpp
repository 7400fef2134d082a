#include "delta_em.hpp"

#include <cmath>

namespace clab {

HardAssignment delta_e_step(const Dataset& data, const GmmParams& params,
                            double delta, Rng& rng) {
  if (delta < 0.0) throw ConfigError("delta must be nonnegative");
  GmmDistanceCache cache(params);
  HardAssignment out;
  out.labels.resize(data.size());
  for (int i = 0; i < data.size(); ++i) {
    std::vector<int> hood = delta_neighbor_set(cache.row(data.points.row(i)), delta);
    if (hood.size() == 1) {
      out.labels[i] = hood.front();
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, hood.size() - 1);
      out.labels[i] = hood[pick(rng)];
    }
  }
  return out;
}

GmmParams noisy_m_step(const Dataset& data, const HardAssignment& assignment,
                       const DeltaEmConfig& config, Rng& rng, int* reseeds) {
  if (config.noise_pi_var < 0.0 || config.noise_mu_var < 0.0 ||
      config.noise_sigma_var < 0.0)
    throw ConfigError("noise variances must be nonnegative");

  HardStats stats = hard_estimates(data, assignment, config.k, rng);
  if (reseeds) *reseeds += stats.reseeds;

  int d = data.dim();
  if (config.noise_pi_var > 0.0) {
    std::normal_distribution<double> noise(0.0, std::sqrt(config.noise_pi_var));
    for (int k = 0; k < config.k; ++k) stats.weights[k] += noise(rng);
  }
  if (config.noise_mu_var > 0.0) {
    std::normal_distribution<double> noise(0.0, std::sqrt(config.noise_mu_var));
    for (int k = 0; k < config.k; ++k)
      for (int j = 0; j < d; ++j) stats.means[k][j] += noise(rng);
  }
  if (config.noise_sigma_var > 0.0) {
    std::normal_distribution<double> noise(0.0, std::sqrt(config.noise_sigma_var));
    for (int k = 0; k < config.k; ++k)
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) stats.covs[k](r, c) += noise(rng);
  }

  return finish_hard_params(stats, config.cov_floor);
}

FitResult run_delta_em(const Dataset& data, const GmmParams& init,
                       const DeltaEmConfig& config, bool record_labels) {
  if (config.max_iters < 1) throw ConfigError("max_iters must be positive");
  if (config.k != init.components())
    throw ConfigError("component count does not match the initial parameters");
  data.validate();

  Rng rng = make_rng(config.seed);
  FitResult result;
  result.params = init;
  for (int t = 1; t <= config.max_iters; ++t) {
    HardAssignment assignment = delta_e_step(data, result.params, config.delta, rng);
    result.params = noisy_m_step(data, assignment, config, rng, &result.reseeds);
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
