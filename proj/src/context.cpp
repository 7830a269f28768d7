#include "auth/context.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "auth/error.hpp"
#include "auth/rng.hpp"

namespace auth {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

std::vector<std::vector<double>> seed_centroids(const std::vector<std::vector<double>>& vectors,
                                                std::size_t k, Rng& rng) {
  const std::size_t n = vectors.size();
  std::vector<std::vector<double>> centroids;
  centroids.reserve(k);
  centroids.push_back(vectors[rng.uniform_int(n)]);

  std::vector<double> dist(n);
  while (centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids) best = std::min(best, squared_distance(vectors[i], c));
      dist[i] = best;
      total += best;
    }
    std::size_t pick;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double cum = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        cum += dist[i];
        if (r < cum) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.uniform_int(n);
    }
    centroids.push_back(vectors[pick]);
  }
  return centroids;
}

KmeansResult run_kmeans(const std::vector<std::vector<double>>& vectors,
                        const KmeansParams& params, std::uint64_t seed, bool parallel) {
  const std::size_t n = vectors.size();
  const std::size_t k = params.k;
  if (k == 0) throw Error(ErrorCode::InvalidSpec, "k must be positive");
  if (n < k) throw Error(ErrorCode::TooFewVectors, "fewer vectors than clusters");
  const std::size_t dim = vectors[0].size();
  for (const auto& v : vectors) {
    if (v.size() != dim) throw Error(ErrorCode::DimensionMismatch, "ragged vectors");
  }

  Rng rng(seed);
  KmeansResult result;
  result.centroids = seed_centroids(vectors, k, rng);
  result.assignments.assign(n, 0);
  std::vector<double> point_cost(n, 0.0);

  const auto count = static_cast<std::int64_t>(n);
  for (std::size_t iter = 0; iter < params.max_iter; ++iter) {
#pragma omp parallel for schedule(static) if (parallel)
    for (std::int64_t ii = 0; ii < count; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      double best = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const double d = squared_distance(vectors[i], result.centroids[c]);
        if (d < best) {
          best = d;
          best_c = static_cast<int>(c);
        }
      }
      result.assignments[i] = best_c;
      point_cost[i] = best;
    }

    double inertia = 0.0;
    for (double c : point_cost) inertia += c;
    result.inertia_history.push_back(inertia);
    result.inertia = inertia;
    result.iterations = iter + 1;

    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(result.assignments[i]);
      ++counts[c];
      for (std::size_t j = 0; j < dim; ++j) sums[c][j] += vectors[i][j];
    }

    std::vector<std::vector<double>> next(k);
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        next[c] = std::move(sums[c]);
        for (double& v : next[c]) v /= static_cast<double>(counts[c]);
      }
    }
    // Empty clusters grab the point currently worst served, one at a time so
    // two empty clusters never land on the same point.
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      std::size_t far = 0;
      for (std::size_t i = 1; i < n; ++i) {
        if (point_cost[i] > point_cost[far]) far = i;
      }
      next[c] = vectors[far];
      point_cost[far] = 0.0;
    }

    double max_shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      max_shift = std::max(max_shift, std::sqrt(squared_distance(next[c], result.centroids[c])));
    }
    result.centroids = std::move(next);
    if (max_shift < params.tol) break;
  }

  return result;
}

}  // namespace

KmeansResult kmeans(const std::vector<std::vector<double>>& vectors, const KmeansParams& params,
                    std::uint64_t seed) {
  return run_kmeans(vectors, params, seed, true);
}

KmeansResult kmeans_serial(const std::vector<std::vector<double>>& vectors,
                           const KmeansParams& params, std::uint64_t seed) {
  return run_kmeans(vectors, params, seed, false);
}

ContextModel train_context_model(const std::vector<std::vector<double>>& vectors,
                                 const ContextParams& params, std::uint64_t seed) {
  ContextModel model;
  model.clustering = kmeans(vectors, params.kmeans, derive_seed(seed, "kmeans"));
  model.dim = vectors[0].size();

  const std::size_t k = params.kmeans.k;
  std::vector<std::size_t> counts(k, 0);
  for (int a : model.clustering.assignments) ++counts[static_cast<std::size_t>(a)];

  const auto frac_floor = static_cast<std::size_t>(
      std::ceil(params.min_cluster_frac * static_cast<double>(vectors.size())));
  const std::size_t threshold = std::max(params.min_cluster_count, frac_floor);

  std::size_t largest = 0;
  for (std::size_t c = 1; c < k; ++c) {
    if (counts[c] > counts[largest]) largest = c;
  }

  model.cluster_to_context.assign(k, -1);
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] >= threshold || c == largest) {
      model.cluster_to_context[c] = static_cast<int>(model.retained.size());
      model.retained.push_back(static_cast<int>(c));
    }
  }

  std::vector<std::vector<double>> cim_x;
  std::vector<int> cim_y;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const int ctx = model.cluster_to_context[static_cast<std::size_t>(
        model.clustering.assignments[i])];
    if (ctx >= 0) {
      cim_x.push_back(vectors[i]);
      cim_y.push_back(ctx);
    }
  }
  model.cim = train_forest(cim_x, cim_y, model.retained.size(), params.cim_forest,
                           derive_seed(seed, "cim"));
  return model;
}

int predict_context(const ContextModel& model, std::span<const double> x) {
  if (x.size() != model.dim) {
    throw Error(ErrorCode::DimensionMismatch, "vector dimension does not match model");
  }
  return model.cim.predict(x);
}

std::vector<std::vector<std::vector<double>>> map_impostor_samples(
    const ContextModel& model,
    const std::vector<std::vector<std::vector<double>>>& per_user_vectors,
    std::size_t cap_per_context) {
  const std::size_t n_ctx = model.retained.size();
  // per context, per user, that user's vectors routed there
  std::vector<std::vector<std::vector<std::vector<double>>>> routed(
      n_ctx, std::vector<std::vector<std::vector<double>>>(per_user_vectors.size()));
  for (std::size_t u = 0; u < per_user_vectors.size(); ++u) {
    for (const auto& v : per_user_vectors[u]) {
      const auto ctx = static_cast<std::size_t>(predict_context(model, v));
      routed[ctx][u].push_back(v);
    }
  }

  std::vector<std::vector<std::vector<double>>> out(n_ctx);
  for (std::size_t c = 0; c < n_ctx; ++c) {
    std::size_t taken = 0;
    for (std::size_t round = 0;; ++round) {
      bool any = false;
      for (std::size_t u = 0; u < routed[c].size(); ++u) {
        if (round >= routed[c][u].size()) continue;
        any = true;
        out[c].push_back(routed[c][u][round]);
        ++taken;
        if (cap_per_context != 0 && taken >= cap_per_context) break;
      }
      if (!any || (cap_per_context != 0 && taken >= cap_per_context)) break;
    }
  }
  return out;
}

}  // namespace auth
