#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "delta_em.hpp"
#include "em.hpp"
#include "io.hpp"
#include "kmeans.hpp"
#include "quantum_emulation.hpp"

namespace clab {

enum class Algorithm { em, delta_em, kmeans, delta_kmeans, qem_emulation };

Algorithm algorithm_from_string(const std::string& name);
std::string algorithm_to_string(Algorithm algo);

struct ExperimentConfig {
  std::string example = "I";  // "I", "II" or "custom" (caller-supplied data)
  Algorithm algorithm = Algorithm::delta_em;
  int trials = 100;
  std::uint64_t seed = 0;
  int n = 1000;
  int threads = 0;  // 0 = hardware concurrency
  json algo_config = json::object();
  std::string output_path;  // base path; empty disables writing
};

ExperimentConfig experiment_config_from_json(const json& j);

struct TrialOutcome {
  int trial_index = 0;
  double success_rate = 0.0;
  double final_loglik = 0.0;
  int iterations = 0;
  std::uint64_t seed_used = 0;
};

struct BenchmarkResult {
  TrialOutcome best;
  std::vector<TrialOutcome> all;
  int numeric_failures = 0;  // trials aborted by numeric errors, scored 0
};

GmmParams example1_params();
GmmParams example2_params();

// i.i.d. mixture sampling: component by weight, then mean + Cholesky * z.
Dataset generate_gmm_dataset(const GmmParams& params, int n, std::uint64_t seed);
Dataset generate_example1(int n, std::uint64_t seed);
Dataset generate_example2(int n, std::uint64_t seed);

// Fraction of points whose predicted label matches the truth under the best
// label permutation; discarded points always count as wrong. Exhaustive for
// K <= 8, greedy confusion-matrix matching (with a warning) above.
double success_rate(const HardAssignment& predicted, const std::vector<int>& truth,
                    int k_total);

// Runs config.trials independent fits with derived per-trial seeds over a
// parallel pool and scores each final hard assignment. Writes JSON + CSV
// when output_path is set.
BenchmarkResult run_benchmark(const Dataset& data, const ExperimentConfig& config);
// Variant generating the dataset named by config.example.
BenchmarkResult run_benchmark(const ExperimentConfig& config);

// (delta, best success rate) per entry; identical dataset and per-trial
// seed streams across deltas.
std::vector<std::pair<double, double>> delta_sweep(const Dataset& data,
                                                   const std::vector<double>& deltas,
                                                   const ExperimentConfig& base);

// One fit on one dataset, dispatched by algorithm; returns the result JSON
// (including a success_rate field when the dataset carries labels).
json run_single_fit(const Dataset& data, Algorithm algo, const json& algo_config);

}  // namespace clab
