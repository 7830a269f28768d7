#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "auth/forest.hpp"

namespace auth {

enum class Algorithm { kLogReg, kMlp, kKnn, kSvm, kForest };

constexpr Algorithm kAllAlgorithms[] = {Algorithm::kLogReg, Algorithm::kMlp, Algorithm::kKnn,
                                        Algorithm::kSvm, Algorithm::kForest};

const char* algorithm_name(Algorithm algo);
Algorithm parse_algorithm(const std::string& name);

// Binary training set: y is 1 for genuine windows, 0 for impostor windows.
struct LabeledDataset {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
};

struct ClassifierParams {
  double ridge = 1e-6;             // logistic regression L2 strength
  std::size_t logreg_max_iter = 50;
  std::size_t mlp_hidden = 10;
  double mlp_lr = 0.1;
  std::size_t mlp_epochs = 500;
  std::size_t knn_k = 10;
  double svm_c = 1.0;
  double svm_tol = 1e-3;
  std::size_t svm_max_passes = 5;
  ForestParams forest;
};

struct LogRegModel {
  std::vector<double> weights;
  double bias = 0.0;
};

struct MlpModel {
  std::size_t in_dim = 0;
  std::size_t hidden = 0;
  std::vector<double> w1;  // hidden x in_dim, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // hidden
  double b2 = 0.0;
};

struct MlpGradients {
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0.0;
};

struct KnnModel {
  std::size_t k = 10;
  std::vector<std::vector<double>> train_x;
  std::vector<int> train_y;
};

struct SvmModel {
  double gamma = 0.0;
  double bias = 0.0;
  std::vector<double> coefs;  // alpha_i * y_i for retained support vectors
  std::vector<std::vector<double>> support_x;
};

struct ForestModel {
  RandomForest forest;
};

struct AuthModel {
  Algorithm algorithm = Algorithm::kLogReg;
  std::size_t dim = 0;
  std::variant<LogRegModel, MlpModel, KnnModel, SvmModel, ForestModel> model;
};

AuthModel train_classifier(Algorithm algo, const LabeledDataset& data, std::uint64_t seed,
                           const ClassifierParams& params = {});

// Score in [0, 1]; larger means more likely genuine.
double score(const AuthModel& model, std::span<const double> x);

// Pieces exposed for direct testing.
double sigmoid(double z);
double mlp_forward(const MlpModel& model, std::span<const double> x);
double mlp_loss_and_grad(const MlpModel& model, const LabeledDataset& data, MlpGradients& grad);
double svm_decision_value(const SvmModel& model, std::span<const double> x);
SvmModel train_svm_smo(const LabeledDataset& data, std::uint64_t seed,
                       const ClassifierParams& params, std::vector<double>* alphas_out = nullptr);

}  // namespace auth
