#pragma once

#include <cstdint>
#include <vector>

#include "core_model.hpp"
#include "rng.hpp"

namespace clab {

struct Centroids {
  std::vector<Eigen::VectorXd> c;

  int size() const { return static_cast<int>(c.size()); }
  int dim() const { return c.empty() ? 0 : static_cast<int>(c.front().size()); }
};

struct KmeansConfig {
  int max_iters = 100;
  std::uint64_t seed = 0;
};

struct KmeansResult {
  Centroids centroids;
  HardAssignment assignment;
  std::vector<double> wcss_trace;  // one entry per assignment round
  int iterations = 0;              // centroid updates performed
  bool converged = false;
  int reseeds = 0;
  std::vector<std::vector<int>> label_history;
};

// Nearest centroid by squared Euclidean distance, ties to the lower index.
HardAssignment kmeans_assign(const Dataset& data, const Centroids& centroids);

// Mean of each cluster's points. Empty clusters are reseeded to a uniformly
// random data point and counted.
Centroids kmeans_update(const Dataset& data, const HardAssignment& assignment,
                        int k_total, Rng& rng, int* reseeds = nullptr);

// Round-robin deal after a seeded shuffle, then one update.
Centroids kmeans_random_init(const Dataset& data, int k_total, std::uint64_t seed);

double wcss(const Dataset& data, const HardAssignment& assignment,
            const Centroids& centroids);

// Lloyd iteration until the assignment repeats or max_iters.
KmeansResult run_kmeans(const Dataset& data, const Centroids& init,
                        const KmeansConfig& config, bool record_labels = false);

// Perturbed variant: labels are drawn uniformly from the delta-neighborhood
// of the Euclidean distance row (singletons consume no randomness) and each
// updated centroid entry receives zero-mean Gaussian noise unless the
// variance is zero. With delta = 0 and zero variance it retraces run_kmeans
// bit for bit on tie-free data.
KmeansResult run_delta_kmeans(const Dataset& data, const Centroids& init,
                              double delta, double noise_var,
                              const KmeansConfig& config, bool record_labels = false);

}  // namespace clab
