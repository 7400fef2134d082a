#include "kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "distances.hpp"

namespace clab {

namespace {

DistanceRow euclidean_row(const Eigen::VectorXd& y, const Centroids& centroids) {
  DistanceRow row;
  row.metric = DistanceMetric::euclidean;
  row.values.resize(centroids.size());
  for (int k = 0; k < centroids.size(); ++k)
    row.values[k] = (y - centroids.c[k]).squaredNorm();
  return row;
}

}  // namespace

HardAssignment kmeans_assign(const Dataset& data, const Centroids& centroids) {
  if (centroids.size() < 1) throw ConfigError("no centroids");
  if (centroids.dim() != data.dim())
    throw ConfigError("centroid dimension does not match dataset");
  HardAssignment out;
  out.labels.resize(data.size());
  for (int i = 0; i < data.size(); ++i) {
    Eigen::VectorXd y = data.points.row(i);
    int best = 0;
    double best_d = (y - centroids.c[0]).squaredNorm();
    for (int k = 1; k < centroids.size(); ++k) {
      double d = (y - centroids.c[k]).squaredNorm();
      if (d < best_d) {
        best = k;
        best_d = d;
      }
    }
    out.labels[i] = best;
  }
  return out;
}

Centroids kmeans_update(const Dataset& data, const HardAssignment& assignment,
                        int k_total, Rng& rng, int* reseeds) {
  int n = data.size();
  int d = data.dim();
  if (static_cast<int>(assignment.labels.size()) != n)
    throw ConfigError("assignment length does not match dataset");

  Centroids out;
  out.c.assign(k_total, Eigen::VectorXd::Zero(d));
  std::vector<double> counts(k_total, 0.0);
  for (int i = 0; i < n; ++i) {
    int l = assignment.labels[i];
    if (l < 0) continue;
    if (l >= k_total) throw ConfigError("label out of range");
    counts[l] += 1.0;
    out.c[l] += data.points.row(i).transpose();
  }
  for (int k = 0; k < k_total; ++k) {
    if (counts[k] > 0.0) {
      out.c[k] /= counts[k];
    } else {
      std::uniform_int_distribution<int> pick(0, n - 1);
      out.c[k] = data.points.row(pick(rng));
      if (reseeds) ++(*reseeds);
    }
  }
  return out;
}

Centroids kmeans_random_init(const Dataset& data, int k_total, std::uint64_t seed) {
  int n = data.size();
  if (k_total < 1) throw ConfigError("component count must be positive");
  if (n < k_total) throw ConfigError("fewer points than centroids");

  Rng rng = make_rng(seed);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  HardAssignment deal;
  deal.labels.resize(n);
  for (int i = 0; i < n; ++i) deal.labels[perm[i]] = i % k_total;
  return kmeans_update(data, deal, k_total, rng);
}

double wcss(const Dataset& data, const HardAssignment& assignment,
            const Centroids& centroids) {
  double total = 0.0;
  for (int i = 0; i < data.size(); ++i) {
    int l = assignment.labels[i];
    if (l < 0) continue;
    total += (data.points.row(i).transpose() - centroids.c[l]).squaredNorm();
  }
  return total;
}

namespace {

KmeansResult lloyd_engine(const Dataset& data, const Centroids& init, bool perturbed,
                          double delta, double noise_var, const KmeansConfig& config,
                          bool record_labels) {
  if (config.max_iters < 1) throw ConfigError("max_iters must be positive");
  if (delta < 0.0) throw ConfigError("delta must be nonnegative");
  if (noise_var < 0.0) throw ConfigError("noise variance must be nonnegative");
  data.validate();

  int n = data.size();
  int k_total = init.size();
  Rng rng = make_rng(config.seed);
  KmeansResult result;
  result.centroids = init;
  std::vector<int> prev;
  for (int t = 1; t <= config.max_iters; ++t) {
    HardAssignment labels;
    if (perturbed) {
      labels.labels.resize(n);
      for (int i = 0; i < n; ++i) {
        DistanceRow row = euclidean_row(data.points.row(i), result.centroids);
        std::vector<int> hood = delta_neighbor_set(row, delta);
        if (hood.size() == 1) {
          labels.labels[i] = hood.front();
        } else {
          std::uniform_int_distribution<std::size_t> pick(0, hood.size() - 1);
          labels.labels[i] = hood[pick(rng)];
        }
      }
    } else {
      labels = kmeans_assign(data, result.centroids);
    }
    result.wcss_trace.push_back(wcss(data, labels, result.centroids));
    if (record_labels) result.label_history.push_back(labels.labels);
    result.assignment = labels;
    if (t > 1 && labels.labels == prev) {
      result.converged = true;
      break;
    }
    result.centroids = kmeans_update(data, labels, k_total, rng, &result.reseeds);
    if (perturbed && noise_var > 0.0) {
      std::normal_distribution<double> noise(0.0, std::sqrt(noise_var));
      for (int k = 0; k < k_total; ++k)
        for (int j = 0; j < data.dim(); ++j) result.centroids.c[k][j] += noise(rng);
    }
    result.iterations = t;
    prev = labels.labels;
  }
  return result;
}

}  // namespace

KmeansResult run_kmeans(const Dataset& data, const Centroids& init,
                        const KmeansConfig& config, bool record_labels) {
  return lloyd_engine(data, init, false, 0.0, 0.0, config, record_labels);
}

KmeansResult run_delta_kmeans(const Dataset& data, const Centroids& init,
                              double delta, double noise_var,
                              const KmeansConfig& config, bool record_labels) {
  return lloyd_engine(data, init, true, delta, noise_var, config, record_labels);
}

}  // namespace clab
