#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "auth/forest.hpp"

namespace auth {

struct KmeansParams {
  std::size_t k = 8;
  std::size_t max_iter = 300;
  double tol = 1e-6;  // stop when no centroid moves further than this
};

struct KmeansResult {
  std::vector<std::vector<double>> centroids;  // k x dim
  std::vector<int> assignments;                // nearest centroid per vector
  std::vector<double> inertia_history;         // after each assignment pass
  double inertia = 0.0;
  std::size_t iterations = 0;
};

// Lloyd iterations from a k-means++ seeding. Clusters that empty out are
// reseeded at the point farthest from its current centroid.
KmeansResult kmeans(const std::vector<std::vector<double>>& vectors, const KmeansParams& params,
                    std::uint64_t seed);
// Single-threaded reference for the OpenMP assignment step.
KmeansResult kmeans_serial(const std::vector<std::vector<double>>& vectors,
                           const KmeansParams& params, std::uint64_t seed);

struct ContextParams {
  KmeansParams kmeans;
  std::size_t min_cluster_count = 30;
  double min_cluster_frac = 0.02;
  ForestParams cim_forest;
};

// Clustering plus the inference forest that routes new windows to one of the
// retained (non-pruned) clusters.
struct ContextModel {
  KmeansResult clustering;
  std::vector<int> retained;            // original cluster ids, ascending
  std::vector<int> cluster_to_context;  // k entries, -1 where pruned
  RandomForest cim;
  std::size_t dim = 0;
};

// Clusters the training vectors, prunes clusters smaller than
// max(min_cluster_count, ceil(min_cluster_frac * n)) while always keeping the
// largest one, and trains the inference forest on the surviving vectors.
ContextModel train_context_model(const std::vector<std::vector<double>>& vectors,
                                 const ContextParams& params, std::uint64_t seed);

// Index into model.retained for the context a new vector belongs to.
int predict_context(const ContextModel& model, std::span<const double> x);

// Routes impostor vectors (grouped per impostor user) to contexts. Vectors
// are taken round-robin across users so no single impostor dominates a
// context; cap_per_context = 0 means no cap.
std::vector<std::vector<std::vector<double>>> map_impostor_samples(
    const ContextModel& model,
    const std::vector<std::vector<std::vector<double>>>& per_user_vectors,
    std::size_t cap_per_context);

}  // namespace auth
