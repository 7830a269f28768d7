#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace auth {

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::int32_t label = 0;  // majority class, meaningful at leaves
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  int predict(std::span<const double> x) const;
};

struct ForestParams {
  std::size_t n_trees = 100;
  std::size_t mtry = 0;  // features tried per split, 0 = floor(sqrt(d))
  std::size_t min_leaf = 1;
  std::size_t max_depth = 0;  // 0 = unlimited
};

// Bagged CART forest with Gini impurity and midpoint thresholds. Each tree
// draws its own seed from the master seed, so the OpenMP build is
// bit-identical to the serial one at any thread count.
struct RandomForest {
  std::size_t n_classes = 0;
  std::vector<DecisionTree> trees;

  // Fraction of trees voting for each class.
  std::vector<double> predict_proba(std::span<const double> x) const;
  int predict(std::span<const double> x) const;
};

RandomForest train_forest(const std::vector<std::vector<double>>& x,
                          const std::vector<int>& y, std::size_t n_classes,
                          const ForestParams& params, std::uint64_t seed);

// Single-threaded reference used to pin down the parallel build in tests.
RandomForest train_forest_serial(const std::vector<std::vector<double>>& x,
                                 const std::vector<int>& y, std::size_t n_classes,
                                 const ForestParams& params, std::uint64_t seed);

}  // namespace auth
