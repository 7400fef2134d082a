#include "bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "cost_model.hpp"

namespace clab {

Algorithm algorithm_from_string(const std::string& name) {
  std::string s = name;
  std::replace(s.begin(), s.end(), '_', '-');
  if (s == "em") return Algorithm::em;
  if (s == "delta-em") return Algorithm::delta_em;
  if (s == "kmeans" || s == "k-means") return Algorithm::kmeans;
  if (s == "delta-kmeans" || s == "delta-k-means") return Algorithm::delta_kmeans;
  if (s == "qem" || s == "qem-emulation") return Algorithm::qem_emulation;
  throw ConfigError("unknown algorithm '" + name + "'");
}

std::string algorithm_to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::em: return "em";
    case Algorithm::delta_em: return "delta-em";
    case Algorithm::kmeans: return "kmeans";
    case Algorithm::delta_kmeans: return "delta-kmeans";
    case Algorithm::qem_emulation: return "qem-emulation";
  }
  throw ConfigError("unknown algorithm");
}

ExperimentConfig experiment_config_from_json(const json& j) {
  try {
    ExperimentConfig config;
    std::string example = j.value("example", std::string("I"));
    if (example == "1") example = "I";
    if (example == "2") example = "II";
    if (example != "I" && example != "II" && example != "custom")
      throw ConfigError("example must be I, II or custom");
    config.example = example;
    config.algorithm = algorithm_from_string(j.value("algorithm", std::string("delta-em")));
    config.trials = j.value("trials", 100);
    if (config.trials < 1) throw ConfigError("trials must be at least 1");
    config.seed = j.value("seed", static_cast<std::uint64_t>(0));
    config.n = j.value("n", 1000);
    if (config.n < 1) throw ConfigError("n must be at least 1");
    config.threads = j.value("threads", 0);
    config.algo_config = j.value("config", json::object());
    config.output_path = j.value("output_path", std::string());
    return config;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed experiment config: ") + e.what());
  }
}

GmmParams example1_params() {
  GmmParams p;
  p.weights = Eigen::Vector2d(0.5, 0.5);
  p.means = {Eigen::Vector2d(0.3, 0.0), Eigen::Vector2d(-0.3, 0.0)};
  Eigen::Matrix2d s1, s2;
  s1 << 1.0, 0.98, 0.98, 1.0;
  s2 << 1.0, -0.98, -0.98, 1.0;
  p.covariances = {s1, s2};
  return p;
}

GmmParams example2_params() {
  GmmParams p;
  p.weights = Eigen::Vector2d(0.7, 0.3);
  p.means = {Eigen::Vector2d(0.0, -0.5), Eigen::Vector2d(0.0, 0.0)};
  Eigen::Matrix2d s1 = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d s2;
  s2 << 10.0, 0.0, 0.0, 0.1;
  p.covariances = {s1, s2};
  return p;
}

Dataset generate_gmm_dataset(const GmmParams& params, int n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("n must be at least 1");
  auto violations = validate_params(params);
  if (!violations.empty()) throw ConfigError("invalid mixture: " + violations.front());

  int k_total = params.components();
  int d = params.dim();
  std::vector<Eigen::MatrixXd> chol(k_total);
  for (int k = 0; k < k_total; ++k) {
    Eigen::LLT<Eigen::MatrixXd> llt(params.covariances[k]);
    if (llt.info() != Eigen::Success)
      throw NumericError("covariance is not positive definite");
    chol[k] = llt.matrixL();
  }

  Rng rng = make_rng(seed);
  std::discrete_distribution<int> comp(params.weights.data(),
                                       params.weights.data() + k_total);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Dataset data;
  data.points.resize(n, d);
  std::vector<int> labels(n);
  Eigen::VectorXd z(d);
  for (int i = 0; i < n; ++i) {
    int k = comp(rng);
    labels[i] = k;
    for (int j = 0; j < d; ++j) z[j] = gauss(rng);
    data.points.row(i) = (params.means[k] + chol[k] * z).transpose();
  }
  data.true_labels = std::move(labels);
  return data;
}

Dataset generate_example1(int n, std::uint64_t seed) {
  return generate_gmm_dataset(example1_params(), n, seed);
}

Dataset generate_example2(int n, std::uint64_t seed) {
  return generate_gmm_dataset(example2_params(), n, seed);
}

double success_rate(const HardAssignment& predicted, const std::vector<int>& truth,
                    int k_total) {
  if (predicted.labels.size() != truth.size())
    throw ConfigError("prediction and truth lengths differ");
  if (k_total < 1) throw ConfigError("component count must be positive");
  int n = static_cast<int>(truth.size());
  for (int v : predicted.labels)
    if (v >= k_total) throw ConfigError("predicted label out of range");
  for (int v : truth)
    if (v < 0 || v >= k_total) throw ConfigError("truth label out of range");

  if (k_total <= 8) {
    std::vector<int> perm(k_total);
    std::iota(perm.begin(), perm.end(), 0);
    int best = 0;
    do {
      int matched = 0;
      for (int i = 0; i < n; ++i) {
        int l = predicted.labels[i];
        if (l >= 0 && perm[l] == truth[i]) ++matched;
      }
      best = std::max(best, matched);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(best) / n;
  }

  static std::once_flag warned;
  std::call_once(warned, [] {
    std::cerr << "success_rate: K > 8, falling back to greedy label matching\n";
  });
  std::vector<std::vector<int>> confusion(k_total, std::vector<int>(k_total, 0));
  for (int i = 0; i < n; ++i)
    if (predicted.labels[i] >= 0) ++confusion[predicted.labels[i]][truth[i]];
  std::vector<bool> row_used(k_total, false), col_used(k_total, false);
  int matched = 0;
  for (int step = 0; step < k_total; ++step) {
    int best = -1, br = -1, bc = -1;
    for (int r = 0; r < k_total; ++r) {
      if (row_used[r]) continue;
      for (int c = 0; c < k_total; ++c) {
        if (col_used[c]) continue;
        if (confusion[r][c] > best) {
          best = confusion[r][c];
          br = r;
          bc = c;
        }
      }
    }
    if (br < 0) break;
    row_used[br] = true;
    col_used[bc] = true;
    matched += best;
  }
  return static_cast<double>(matched) / n;
}

namespace {

int config_k(const json& cfg) {
  int k = cfg.value("k", 2);
  if (k < 1) throw ConfigError("k must be positive");
  return k;
}

EmConfig em_config_from_json(const json& cfg) {
  EmConfig c;
  c.k = config_k(cfg);
  c.max_iters = cfg.value("max_iters", c.max_iters);
  c.tol = cfg.value("tol", c.tol);
  c.cov_floor = cfg.value("cov_floor", c.cov_floor);
  c.seed = cfg.value("seed", c.seed);
  return c;
}

DeltaEmConfig delta_em_config_from_json(const json& cfg) {
  DeltaEmConfig c;
  c.k = config_k(cfg);
  c.delta = cfg.value("delta", c.delta);
  c.noise_pi_var = cfg.value("noise_pi_var", c.noise_pi_var);
  c.noise_mu_var = cfg.value("noise_mu_var", c.noise_mu_var);
  c.noise_sigma_var = cfg.value("noise_sigma_var", c.noise_sigma_var);
  c.max_iters = cfg.value("max_iters", c.max_iters);
  c.tol = cfg.value("tol", c.tol);
  c.cov_floor = cfg.value("cov_floor", c.cov_floor);
  c.seed = cfg.value("seed", c.seed);
  return c;
}

KmeansConfig kmeans_config_from_json(const json& cfg) {
  KmeansConfig c;
  c.max_iters = cfg.value("max_iters", c.max_iters);
  c.seed = cfg.value("seed", c.seed);
  return c;
}

QemConfig qem_config_from_json(const json& cfg, const Dataset& data) {
  QemConfig c;
  c.k = config_k(cfg);
  c.delta = cfg.value("delta", c.delta);
  if (cfg.contains("eps1")) {
    c.eps1 = cfg.at("eps1").get<double>();
    c.mu_channel.eps_dir = cfg.value("eps3_mu", 0.0);
    c.mu_channel.eps_norm = cfg.value("eps4_mu", 0.0);
    c.sigma_channel.eps_dir = cfg.value("eps3_sigma", 0.0);
    c.sigma_channel.eps_norm = cfg.value("eps4_sigma", 0.0);
    c.pi_channel.eps_norm = cfg.value("eps4_pi", 0.0);
    c.n_pi_samples = cfg.value("n_pi_samples", static_cast<long>(0));
  } else {
    // No explicit channel precisions: derive the full budget from delta.
    auto [eta_mu, eta_sigma] = eta_values(data);
    EpsilonBudget budget = epsilon_budget(c.delta, eta_mu, eta_sigma);
    double pi_fail = cfg.value("pi_fail", 0.05);
    QemConfig derived = qem_config_from_budget(c.k, c.delta, budget, pi_fail);
    c.eps1 = derived.eps1;
    c.mu_channel = derived.mu_channel;
    c.sigma_channel = derived.sigma_channel;
    c.pi_channel = derived.pi_channel;
    c.n_pi_samples = cfg.value("n_pi_samples", derived.n_pi_samples);
  }
  if (cfg.contains("mode_eval")) {
    const json& m = cfg.at("mode_eval");
    c.mode_eval.copies = m.value("copies", c.mode_eval.copies);
    c.mode_eval.delta_fail = m.value("delta_fail", c.mode_eval.delta_fail);
    c.mode_eval.a0 = m.value("a0", c.mode_eval.a0);
  }
  c.max_iters = cfg.value("max_iters", c.max_iters);
  c.tol = cfg.value("tol", c.tol);
  c.cov_floor = cfg.value("cov_floor", c.cov_floor);
  c.seed = cfg.value("seed", c.seed);
  return c;
}

// Log-likelihood of the mixture a centroid set induces (uniform weights,
// unit covariances), so the k-means variants report a comparable score.
double centroid_loglik(const Dataset& data, const Centroids& centroids) {
  GmmParams p;
  int k_total = centroids.size();
  p.weights = Eigen::VectorXd::Constant(k_total, 1.0 / k_total);
  p.means = centroids.c;
  p.covariances.assign(k_total, Eigen::MatrixXd::Identity(data.dim(), data.dim()));
  return gmm_log_likelihood(data, p);
}

TrialOutcome run_trial(const Dataset& data, Algorithm algo, const json& cfg,
                       std::uint64_t trial_seed, int trial_index) {
  TrialOutcome outcome;
  outcome.trial_index = trial_index;
  outcome.seed_used = trial_seed;
  std::uint64_t init_seed = derive_seed(trial_seed, 1);
  std::uint64_t algo_seed = derive_seed(trial_seed, 2);
  if (!data.true_labels) throw ConfigError("dataset has no ground-truth labels");
  const std::vector<int>& truth = *data.true_labels;

  switch (algo) {
    case Algorithm::em: {
      EmConfig c = em_config_from_json(cfg);
      c.seed = algo_seed;
      FitResult r = run_em(data, random_init(data, c.k, init_seed), c);
      outcome.success_rate = success_rate(r.final_assignment, truth, c.k);
      outcome.final_loglik = r.loglik_trace.back();
      outcome.iterations = r.iterations;
      break;
    }
    case Algorithm::delta_em: {
      DeltaEmConfig c = delta_em_config_from_json(cfg);
      c.seed = algo_seed;
      FitResult r = run_delta_em(data, random_init(data, c.k, init_seed), c);
      outcome.success_rate = success_rate(r.final_assignment, truth, c.k);
      outcome.final_loglik = r.loglik_trace.back();
      outcome.iterations = r.iterations;
      break;
    }
    case Algorithm::kmeans: {
      KmeansConfig c = kmeans_config_from_json(cfg);
      c.seed = algo_seed;
      int k = config_k(cfg);
      KmeansResult r = run_kmeans(data, kmeans_random_init(data, k, init_seed), c);
      outcome.success_rate = success_rate(r.assignment, truth, k);
      outcome.final_loglik = centroid_loglik(data, r.centroids);
      outcome.iterations = r.iterations;
      break;
    }
    case Algorithm::delta_kmeans: {
      KmeansConfig c = kmeans_config_from_json(cfg);
      c.seed = algo_seed;
      int k = config_k(cfg);
      double delta = cfg.value("delta", 0.2);
      double noise_var = cfg.value("noise_var", 1e-4);
      KmeansResult r = run_delta_kmeans(data, kmeans_random_init(data, k, init_seed),
                                        delta, noise_var, c);
      outcome.success_rate = success_rate(r.assignment, truth, k);
      outcome.final_loglik = centroid_loglik(data, r.centroids);
      outcome.iterations = r.iterations;
      break;
    }
    case Algorithm::qem_emulation: {
      QemConfig c = qem_config_from_json(cfg, data);
      c.seed = algo_seed;
      FitResult r = run_qem_emulation(data, random_init(data, c.k, init_seed), c);
      outcome.success_rate = success_rate(r.final_assignment, truth, c.k);
      outcome.final_loglik = r.loglik_trace.back();
      outcome.iterations = r.iterations;
      break;
    }
  }
  return outcome;
}

void write_benchmark_outputs(const BenchmarkResult& result,
                             const ExperimentConfig& config) {
  if (config.output_path.empty()) return;
  json j;
  j["example"] = config.example;
  j["algorithm"] = algorithm_to_string(config.algorithm);
  j["trials"] = config.trials;
  j["seed"] = config.seed;
  j["n"] = config.n;
  j["numeric_failures"] = result.numeric_failures;
  j["best"] = {{"trial_index", result.best.trial_index},
               {"success_rate", result.best.success_rate},
               {"final_loglik", result.best.final_loglik},
               {"iterations", result.best.iterations},
               {"seed_used", result.best.seed_used}};
  j["all"] = json::array();
  for (const auto& o : result.all)
    j["all"].push_back({{"trial_index", o.trial_index},
                        {"success_rate", o.success_rate},
                        {"final_loglik", o.final_loglik},
                        {"iterations", o.iterations},
                        {"seed_used", o.seed_used}});
  write_text_file(config.output_path + ".json", j.dump(2) + "\n");

  std::ostringstream csv;
  csv << "trial,success_rate,final_loglik,iterations,seed_used\n";
  for (const auto& o : result.all)
    csv << o.trial_index << "," << o.success_rate << "," << o.final_loglik << ","
        << o.iterations << "," << o.seed_used << "\n";
  write_text_file(config.output_path + ".csv", csv.str());
}

}  // namespace

BenchmarkResult run_benchmark(const Dataset& data, const ExperimentConfig& config) {
  if (config.trials < 1) throw ConfigError("trials must be at least 1");
  data.validate();

  int trials = config.trials;
  BenchmarkResult result;
  result.all.resize(trials);
  std::vector<char> failed(trials, 0);

  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  int threads = config.threads > 0 ? config.threads : static_cast<int>(hw);
  threads = std::min(threads, trials);

  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int t = next.fetch_add(1); t < trials; t = next.fetch_add(1)) {
      std::uint64_t trial_seed = derive_seed(config.seed, static_cast<std::uint64_t>(t));
      try {
        result.all[t] =
            run_trial(data, config.algorithm, config.algo_config, trial_seed, t);
      } catch (const NumericError&) {
        // A numerically degenerate trial scores zero instead of sinking the
        // whole benchmark.
        result.all[t] = TrialOutcome{t, 0.0,
                                     -std::numeric_limits<double>::infinity(), 0,
                                     trial_seed};
        failed[t] = 1;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  result.numeric_failures = static_cast<int>(std::count(failed.begin(), failed.end(), 1));
  result.best = result.all.front();
  for (const auto& o : result.all)
    if (o.success_rate > result.best.success_rate) result.best = o;

  write_benchmark_outputs(result, config);
  return result;
}

BenchmarkResult run_benchmark(const ExperimentConfig& config) {
  std::uint64_t data_seed = derive_seed(config.seed, 1000003);
  Dataset data;
  if (config.example == "I") {
    data = generate_example1(config.n, data_seed);
  } else if (config.example == "II") {
    data = generate_example2(config.n, data_seed);
  } else {
    throw ConfigError("custom experiments need an explicit dataset");
  }
  return run_benchmark(data, config);
}

std::vector<std::pair<double, double>> delta_sweep(const Dataset& data,
                                                   const std::vector<double>& deltas,
                                                   const ExperimentConfig& base) {
  if (deltas.empty()) throw ConfigError("no deltas to sweep");
  std::vector<std::pair<double, double>> table;
  table.reserve(deltas.size());
  for (double delta : deltas) {
    if (delta < 0.0) throw ConfigError("delta must be nonnegative");
    ExperimentConfig config = base;
    config.algo_config["delta"] = delta;
    config.output_path.clear();
    BenchmarkResult r = run_benchmark(data, config);
    table.emplace_back(delta, r.best.success_rate);
  }
  if (!base.output_path.empty())
    emit_plot_data(table, base.output_path + ".csv", base.output_path + ".svg");
  return table;
}

json run_single_fit(const Dataset& data, Algorithm algo, const json& algo_config) {
  data.validate();
  std::uint64_t seed = algo_config.value("seed", static_cast<std::uint64_t>(0));
  std::uint64_t init_seed = derive_seed(seed, 1);
  std::uint64_t algo_seed = derive_seed(seed, 2);
  json out;
  int k = config_k(algo_config);
  HardAssignment final_assignment;

  switch (algo) {
    case Algorithm::em: {
      EmConfig c = em_config_from_json(algo_config);
      c.seed = algo_seed;
      FitResult r = run_em(data, random_init(data, c.k, init_seed), c);
      out = fit_result_to_json(r);
      final_assignment = r.final_assignment;
      break;
    }
    case Algorithm::delta_em: {
      DeltaEmConfig c = delta_em_config_from_json(algo_config);
      c.seed = algo_seed;
      FitResult r = run_delta_em(data, random_init(data, c.k, init_seed), c);
      out = fit_result_to_json(r);
      final_assignment = r.final_assignment;
      break;
    }
    case Algorithm::kmeans: {
      KmeansConfig c = kmeans_config_from_json(algo_config);
      c.seed = algo_seed;
      KmeansResult r = run_kmeans(data, kmeans_random_init(data, k, init_seed), c);
      out = kmeans_result_to_json(r);
      final_assignment = r.assignment;
      break;
    }
    case Algorithm::delta_kmeans: {
      KmeansConfig c = kmeans_config_from_json(algo_config);
      c.seed = algo_seed;
      double delta = algo_config.value("delta", 0.2);
      double noise_var = algo_config.value("noise_var", 1e-4);
      KmeansResult r = run_delta_kmeans(data, kmeans_random_init(data, k, init_seed),
                                        delta, noise_var, c);
      out = kmeans_result_to_json(r);
      final_assignment = r.assignment;
      break;
    }
    case Algorithm::qem_emulation: {
      QemConfig c = qem_config_from_json(algo_config, data);
      c.seed = algo_seed;
      FitResult r = run_qem_emulation(data, random_init(data, c.k, init_seed), c);
      out = fit_result_to_json(r);
      final_assignment = r.final_assignment;
      break;
    }
  }
  if (data.true_labels)
    out["success_rate"] = success_rate(final_assignment, *data.true_labels, k);
  return out;
}

}  // namespace clab
