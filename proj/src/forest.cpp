#include "auth/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "auth/error.hpp"
#include "auth/rng.hpp"

namespace auth {

namespace {

struct BuildContext {
  const std::vector<std::vector<double>>& x;
  const std::vector<int>& y;
  std::size_t n_classes;
  ForestParams params;
  Rng rng;
};

int majority_label(const BuildContext& ctx, const std::vector<std::size_t>& idx) {
  std::vector<std::size_t> counts(ctx.n_classes, 0);
  for (std::size_t i : idx) ++counts[static_cast<std::size_t>(ctx.y[i])];
  std::size_t best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c) {
    if (counts[c] > counts[best]) best = c;
  }
  return static_cast<int>(best);
}

double gini(const std::vector<std::size_t>& counts, double total) {
  double sum_sq = 0.0;
  for (std::size_t c : counts) {
    const double p = static_cast<double>(c) / total;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

struct Split {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double impurity = std::numeric_limits<double>::infinity();
};

Split find_split(BuildContext& ctx, const std::vector<std::size_t>& idx) {
  const std::size_t dim = ctx.x[0].size();
  std::size_t mtry = ctx.params.mtry;
  if (mtry == 0) mtry = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(dim))));
  mtry = std::min(mtry, dim);
  const auto candidates = ctx.rng.sample_without_replacement(dim, mtry);

  const std::size_t n = idx.size();
  const double total = static_cast<double>(n);
  Split best;

  std::vector<std::pair<double, int>> column(n);  // (value, label) sorted per feature
  std::vector<std::size_t> left_counts(ctx.n_classes);
  std::vector<std::size_t> right_counts(ctx.n_classes);

  for (std::size_t f : candidates) {
    for (std::size_t i = 0; i < n; ++i) {
      column[i] = {ctx.x[idx[i]][f], ctx.y[idx[i]]};
    }
    std::sort(column.begin(), column.end());
    if (column.front().first == column.back().first) continue;

    std::fill(left_counts.begin(), left_counts.end(), 0);
    std::fill(right_counts.begin(), right_counts.end(), 0);
    for (const auto& [v, label] : column) ++right_counts[static_cast<std::size_t>(label)];

    for (std::size_t pos = 1; pos < n; ++pos) {
      const auto label = static_cast<std::size_t>(column[pos - 1].second);
      ++left_counts[label];
      --right_counts[label];
      if (column[pos].first == column[pos - 1].first) continue;
      const std::size_t nl = pos;
      const std::size_t nr = n - pos;
      if (nl < ctx.params.min_leaf || nr < ctx.params.min_leaf) continue;
      const double weighted =
          (static_cast<double>(nl) * gini(left_counts, static_cast<double>(nl)) +
           static_cast<double>(nr) * gini(right_counts, static_cast<double>(nr))) /
          total;
      if (weighted < best.impurity) {
        best.impurity = weighted;
        best.feature = static_cast<std::int32_t>(f);
        best.threshold = 0.5 * (column[pos - 1].first + column[pos].first);
      }
    }
  }
  return best;
}

int build_node(DecisionTree& tree, BuildContext& ctx, std::vector<std::size_t>& idx,
               std::size_t depth) {
  const int node_id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  tree.nodes[node_id].label = majority_label(ctx, idx);

  bool pure = true;
  for (std::size_t i = 1; i < idx.size(); ++i) {
    if (ctx.y[idx[i]] != ctx.y[idx[0]]) {
      pure = false;
      break;
    }
  }
  const bool depth_capped = ctx.params.max_depth != 0 && depth >= ctx.params.max_depth;
  if (pure || depth_capped || idx.size() < 2 * ctx.params.min_leaf || idx.size() < 2) {
    return node_id;
  }

  const Split split = find_split(ctx, idx);
  if (split.feature < 0) return node_id;

  std::vector<std::size_t> left_idx, right_idx;
  left_idx.reserve(idx.size());
  right_idx.reserve(idx.size());
  for (std::size_t i : idx) {
    if (ctx.x[i][static_cast<std::size_t>(split.feature)] < split.threshold) {
      left_idx.push_back(i);
    } else {
      right_idx.push_back(i);
    }
  }
  if (left_idx.empty() || right_idx.empty()) return node_id;

  idx.clear();
  idx.shrink_to_fit();

  tree.nodes[node_id].feature = split.feature;
  tree.nodes[node_id].threshold = split.threshold;
  const int left = build_node(tree, ctx, left_idx, depth + 1);
  tree.nodes[node_id].left = left;
  const int right = build_node(tree, ctx, right_idx, depth + 1);
  tree.nodes[node_id].right = right;
  return node_id;
}

DecisionTree build_tree(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                        std::size_t n_classes, const ForestParams& params, std::uint64_t seed) {
  BuildContext ctx{x, y, n_classes, params, Rng(seed)};
  const std::size_t n = x.size();
  std::vector<std::size_t> bootstrap(n);
  for (std::size_t i = 0; i < n; ++i) bootstrap[i] = ctx.rng.uniform_int(n);
  DecisionTree tree;
  build_node(tree, ctx, bootstrap, 0);
  return tree;
}

void validate_training_input(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                             std::size_t n_classes, const ForestParams& params) {
  if (x.empty()) throw Error(ErrorCode::SingleClassDataset, "empty training set");
  if (x.size() != y.size()) {
    throw Error(ErrorCode::DimensionMismatch, "feature and label counts differ");
  }
  const std::size_t dim = x[0].size();
  if (dim == 0) throw Error(ErrorCode::DimensionMismatch, "zero-dimensional features");
  for (const auto& row : x) {
    if (row.size() != dim) throw Error(ErrorCode::DimensionMismatch, "ragged feature matrix");
  }
  if (n_classes == 0) throw Error(ErrorCode::InvalidSpec, "n_classes must be positive");
  for (int label : y) {
    if (label < 0 || static_cast<std::size_t>(label) >= n_classes) {
      throw Error(ErrorCode::InvalidSpec, "label outside [0, n_classes)");
    }
  }
  if (params.n_trees == 0) throw Error(ErrorCode::InvalidSpec, "n_trees must be positive");
}

}  // namespace

int DecisionTree::predict(std::span<const double> x) const {
  std::size_t node = 0;
  while (nodes[node].feature >= 0) {
    const auto& nd = nodes[node];
    node = static_cast<std::size_t>(x[static_cast<std::size_t>(nd.feature)] < nd.threshold
                                        ? nd.left
                                        : nd.right);
  }
  return nodes[node].label;
}

std::vector<double> RandomForest::predict_proba(std::span<const double> x) const {
  std::vector<double> votes(n_classes, 0.0);
  for (const auto& tree : trees) {
    ++votes[static_cast<std::size_t>(tree.predict(x))];
  }
  const double total = static_cast<double>(trees.size());
  for (double& v : votes) v /= total;
  return votes;
}

int RandomForest::predict(std::span<const double> x) const {
  const auto proba = predict_proba(x);
  std::size_t best = 0;
  for (std::size_t c = 1; c < proba.size(); ++c) {
    if (proba[c] > proba[best]) best = c;
  }
  return static_cast<int>(best);
}

RandomForest train_forest(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                          std::size_t n_classes, const ForestParams& params, std::uint64_t seed) {
  validate_training_input(x, y, n_classes, params);
  RandomForest forest;
  forest.n_classes = n_classes;
  forest.trees.resize(params.n_trees);
  const auto count = static_cast<std::int64_t>(params.n_trees);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t t = 0; t < count; ++t) {
    forest.trees[static_cast<std::size_t>(t)] =
        build_tree(x, y, n_classes, params,
                   derive_seed(seed, "tree", static_cast<std::uint64_t>(t)));
  }
  return forest;
}

RandomForest train_forest_serial(const std::vector<std::vector<double>>& x,
                                 const std::vector<int>& y, std::size_t n_classes,
                                 const ForestParams& params, std::uint64_t seed) {
  validate_training_input(x, y, n_classes, params);
  RandomForest forest;
  forest.n_classes = n_classes;
  forest.trees.resize(params.n_trees);
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    forest.trees[t] = build_tree(x, y, n_classes, params, derive_seed(seed, "tree", t));
  }
  return forest;
}

}  // namespace auth
