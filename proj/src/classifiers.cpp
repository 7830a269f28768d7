#include "auth/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "auth/error.hpp"
#include "auth/rng.hpp"

namespace auth {

namespace {

void validate_dataset(const LabeledDataset& data) {
  if (data.x.empty()) throw Error(ErrorCode::SingleClassDataset, "empty training set");
  if (data.x.size() != data.y.size()) {
    throw Error(ErrorCode::DimensionMismatch, "feature and label counts differ");
  }
  const std::size_t dim = data.x[0].size();
  if (dim == 0) throw Error(ErrorCode::DimensionMismatch, "zero-dimensional features");
  for (const auto& row : data.x) {
    if (row.size() != dim) throw Error(ErrorCode::DimensionMismatch, "ragged feature matrix");
  }
  bool saw_pos = false;
  bool saw_neg = false;
  for (int label : data.y) {
    if (label != 0 && label != 1) throw Error(ErrorCode::InvalidSpec, "labels must be 0 or 1");
    (label == 1 ? saw_pos : saw_neg) = true;
  }
  if (!saw_pos || !saw_neg) {
    throw Error(ErrorCode::SingleClassDataset, "training set needs both classes");
  }
}

// -log(sigmoid(a)) + (1-y) * a written in overflow-safe form.
double softplus(double a) { return std::max(a, 0.0) + std::log1p(std::exp(-std::fabs(a))); }

// In-place Cholesky of a symmetric positive definite matrix, row-major.
// Returns false when a pivot is not positive.
bool cholesky(std::vector<double>& m, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = m[i * n + j];
      for (std::size_t k = 0; k < j; ++k) sum -= m[i * n + k] * m[j * n + k];
      if (i == j) {
        if (sum <= 0.0 || !std::isfinite(sum)) return false;
        m[i * n + i] = std::sqrt(sum);
      } else {
        m[i * n + j] = sum / m[j * n + j];
      }
    }
  }
  return true;
}

void cholesky_solve(const std::vector<double>& l, std::size_t n, std::vector<double>& rhs) {
  for (std::size_t i = 0; i < n; ++i) {
    double sum = rhs[i];
    for (std::size_t k = 0; k < i; ++k) sum -= l[i * n + k] * rhs[k];
    rhs[i] = sum / l[i * n + i];
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double sum = rhs[ii];
    for (std::size_t k = ii + 1; k < n; ++k) sum -= l[k * n + ii] * rhs[k];
    rhs[ii] = sum / l[ii * n + ii];
  }
}

LogRegModel train_logreg(const LabeledDataset& data, const ClassifierParams& params) {
  const std::size_t n = data.x.size();
  const std::size_t d = data.x[0].size();
  const std::size_t p = d + 1;  // weights plus intercept
  std::vector<double> w(p, 0.0);

  std::vector<double> prob(n);
  auto update_probs = [&](const std::vector<double>& wv) {
    for (std::size_t i = 0; i < n; ++i) {
      double eta = wv[d];
      for (std::size_t j = 0; j < d; ++j) eta += wv[j] * data.x[i][j];
      prob[i] = sigmoid(eta);
    }
  };

  auto gradient = [&](const std::vector<double>& wv, std::vector<double>& g) {
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = static_cast<double>(data.y[i]) - prob[i];
      for (std::size_t j = 0; j < d; ++j) g[j] += r * data.x[i][j];
      g[d] += r;
    }
    for (std::size_t j = 0; j < p; ++j) g[j] -= params.ridge * wv[j];
  };

  auto gd_fallback = [&](std::vector<double> wv) {
    std::vector<double> g(p);
    const double lr = 0.1;
    for (std::size_t it = 0; it < 2000; ++it) {
      update_probs(wv);
      gradient(wv, g);
      for (std::size_t j = 0; j < p; ++j) wv[j] += lr * g[j] / static_cast<double>(n);
    }
    return wv;
  };

  std::vector<double> hess(p * p);
  std::vector<double> step(p);
  bool fell_back = false;
  for (std::size_t iter = 0; iter < params.logreg_max_iter; ++iter) {
    update_probs(w);
    gradient(w, step);

    std::fill(hess.begin(), hess.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double wt = std::max(prob[i] * (1.0 - prob[i]), 1e-10);
      for (std::size_t a = 0; a < d; ++a) {
        const double xa = data.x[i][a] * wt;
        for (std::size_t b = 0; b <= a; ++b) hess[a * p + b] += xa * data.x[i][b];
        hess[d * p + a] += xa;
      }
      hess[d * p + d] += wt;
    }
    for (std::size_t j = 0; j < p; ++j) hess[j * p + j] += params.ridge;

    if (!cholesky(hess, p)) {
      w = gd_fallback(w);
      fell_back = true;
      break;
    }
    cholesky_solve(hess, p, step);

    double max_step = 0.0;
    bool finite = true;
    for (double s : step) {
      if (!std::isfinite(s)) finite = false;
      max_step = std::max(max_step, std::fabs(s));
    }
    if (!finite) {
      w = gd_fallback(w);
      fell_back = true;
      break;
    }
    for (std::size_t j = 0; j < p; ++j) w[j] += step[j];
    if (max_step < 1e-8) break;
  }
  (void)fell_back;

  LogRegModel model;
  model.weights.assign(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(d));
  model.bias = w[d];
  return model;
}

MlpModel init_mlp(std::size_t in_dim, std::size_t hidden, Rng& rng) {
  MlpModel m;
  m.in_dim = in_dim;
  m.hidden = hidden;
  m.w1.resize(hidden * in_dim);
  m.b1.resize(hidden);
  m.w2.resize(hidden);
  for (double& v : m.w1) v = rng.uniform(-0.5, 0.5);
  for (double& v : m.b1) v = rng.uniform(-0.5, 0.5);
  for (double& v : m.w2) v = rng.uniform(-0.5, 0.5);
  m.b2 = rng.uniform(-0.5, 0.5);
  return m;
}

MlpModel train_mlp(const LabeledDataset& data, std::uint64_t seed,
                   const ClassifierParams& params) {
  Rng rng(seed);
  MlpModel model = init_mlp(data.x[0].size(), params.mlp_hidden, rng);
  MlpGradients grad;
  for (std::size_t epoch = 0; epoch < params.mlp_epochs; ++epoch) {
    mlp_loss_and_grad(model, data, grad);
    for (std::size_t j = 0; j < model.w1.size(); ++j) model.w1[j] -= params.mlp_lr * grad.w1[j];
    for (std::size_t j = 0; j < model.b1.size(); ++j) model.b1[j] -= params.mlp_lr * grad.b1[j];
    for (std::size_t j = 0; j < model.w2.size(); ++j) model.w2[j] -= params.mlp_lr * grad.w2[j];
    model.b2 -= params.mlp_lr * grad.b2;
  }
  return model;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

}  // namespace

const char* algorithm_name(Algorithm algo) {
  switch (algo) {
    case Algorithm::kLogReg: return "LOGREG";
    case Algorithm::kMlp: return "MLP";
    case Algorithm::kKnn: return "KNN";
    case Algorithm::kSvm: return "SVM";
    case Algorithm::kForest: return "RF";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  for (Algorithm algo : kAllAlgorithms) {
    if (name == algorithm_name(algo)) return algo;
  }
  throw Error(ErrorCode::InvalidSpec, "unknown algorithm '" + name + "'");
}

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double mlp_forward(const MlpModel& model, std::span<const double> x) {
  double a = model.b2;
  for (std::size_t j = 0; j < model.hidden; ++j) {
    double h = model.b1[j];
    const double* row = model.w1.data() + j * model.in_dim;
    for (std::size_t k = 0; k < model.in_dim; ++k) h += row[k] * x[k];
    a += model.w2[j] * std::tanh(h);
  }
  return sigmoid(a);
}

double mlp_loss_and_grad(const MlpModel& model, const LabeledDataset& data, MlpGradients& grad) {
  const std::size_t n = data.x.size();
  const std::size_t d = model.in_dim;
  const std::size_t h = model.hidden;
  grad.w1.assign(h * d, 0.0);
  grad.b1.assign(h, 0.0);
  grad.w2.assign(h, 0.0);
  grad.b2 = 0.0;

  std::vector<double> z(h);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& x = data.x[i];
    double a = model.b2;
    for (std::size_t j = 0; j < h; ++j) {
      double pre = model.b1[j];
      const double* row = model.w1.data() + j * d;
      for (std::size_t k = 0; k < d; ++k) pre += row[k] * x[k];
      z[j] = std::tanh(pre);
      a += model.w2[j] * z[j];
    }
    const double y = static_cast<double>(data.y[i]);
    loss += softplus(a) - y * a;

    const double delta = sigmoid(a) - y;
    grad.b2 += delta;
    for (std::size_t j = 0; j < h; ++j) {
      grad.w2[j] += delta * z[j];
      const double dz = delta * model.w2[j] * (1.0 - z[j] * z[j]);
      grad.b1[j] += dz;
      double* row = grad.w1.data() + j * d;
      for (std::size_t k = 0; k < d; ++k) row[k] += dz * x[k];
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  for (double& g : grad.w1) g *= inv_n;
  for (double& g : grad.b1) g *= inv_n;
  for (double& g : grad.w2) g *= inv_n;
  grad.b2 *= inv_n;
  return loss * inv_n;
}

double svm_decision_value(const SvmModel& model, std::span<const double> x) {
  double f = model.bias;
  for (std::size_t i = 0; i < model.coefs.size(); ++i) {
    f += model.coefs[i] * std::exp(-model.gamma * squared_distance(model.support_x[i], x));
  }
  return f;
}

SvmModel train_svm_smo(const LabeledDataset& data, std::uint64_t seed,
                       const ClassifierParams& params, std::vector<double>* alphas_out) {
  const std::size_t n = data.x.size();
  const std::size_t d = data.x[0].size();
  const double gamma = 1.0 / static_cast<double>(d);
  const double c = params.svm_c;
  const double tol = params.svm_tol;

  std::vector<double> ypm(n);
  for (std::size_t i = 0; i < n; ++i) ypm[i] = data.y[i] == 1 ? 1.0 : -1.0;

  std::vector<double> kernel(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    kernel[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double k = std::exp(-gamma * squared_distance(data.x[i], data.x[j]));
      kernel[i * n + j] = k;
      kernel[j * n + i] = k;
    }
  }

  std::vector<double> alpha(n, 0.0);
  double bias = 0.0;
  Rng rng(seed);

  auto decision = [&](std::size_t i) {
    double f = bias;
    const double* krow = kernel.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      if (alpha[j] > 0.0) f += alpha[j] * ypm[j] * krow[j];
    }
    return f;
  };

  // One pair update; false when the pair cannot make progress.
  auto try_update = [&](std::size_t i, std::size_t j, double ei) {
    const double ej = decision(j) - ypm[j];

    const double ai_old = alpha[i];
    const double aj_old = alpha[j];
    double lo, hi;
    if (ypm[i] != ypm[j]) {
      lo = std::max(0.0, aj_old - ai_old);
      hi = std::min(c, c + aj_old - ai_old);
    } else {
      lo = std::max(0.0, ai_old + aj_old - c);
      hi = std::min(c, ai_old + aj_old);
    }
    if (lo == hi) return false;

    const double eta = 2.0 * kernel[i * n + j] - kernel[i * n + i] - kernel[j * n + j];
    if (eta >= 0.0) return false;

    double aj = aj_old - ypm[j] * (ei - ej) / eta;
    aj = std::clamp(aj, lo, hi);
    if (std::fabs(aj - aj_old) < 1e-5) return false;
    const double ai = ai_old + ypm[i] * ypm[j] * (aj_old - aj);
    alpha[i] = ai;
    alpha[j] = aj;

    const double b1 = bias - ei - ypm[i] * (ai - ai_old) * kernel[i * n + i] -
                      ypm[j] * (aj - aj_old) * kernel[i * n + j];
    const double b2 = bias - ej - ypm[i] * (ai - ai_old) * kernel[i * n + j] -
                      ypm[j] * (aj - aj_old) * kernel[j * n + j];
    if (ai > 0.0 && ai < c) {
      bias = b1;
    } else if (aj > 0.0 && aj < c) {
      bias = b2;
    } else {
      bias = 0.5 * (b1 + b2);
    }
    return true;
  };

  std::size_t passes = 0;
  const std::size_t max_passes = params.svm_max_passes;
  for (std::size_t outer = 0; outer < 1000 && passes < max_passes; ++outer) {
    std::size_t changed = 0;
    std::size_t violations = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ei = decision(i) - ypm[i];
      const bool violates = (ypm[i] * ei < -tol && alpha[i] < c) ||
                            (ypm[i] * ei > tol && alpha[i] > 0.0);
      if (!violates) continue;
      ++violations;

      // Scan every partner from a random start so a stuck pair cannot stall
      // the solver short of its tolerance.
      const std::size_t start = rng.uniform_int(n);
      for (std::size_t step = 0; step < n; ++step) {
        const std::size_t j = (start + step) % n;
        if (j == i) continue;
        if (try_update(i, j, ei)) {
          ++changed;
          break;
        }
      }
    }
    if (violations == 0) break;
    passes = changed == 0 ? passes + 1 : 0;
  }

  if (alphas_out != nullptr) *alphas_out = alpha;

  SvmModel model;
  model.gamma = gamma;
  model.bias = bias;
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i] > 1e-12) {
      model.coefs.push_back(alpha[i] * ypm[i]);
      model.support_x.push_back(data.x[i]);
    }
  }
  return model;
}

AuthModel train_classifier(Algorithm algo, const LabeledDataset& data, std::uint64_t seed,
                           const ClassifierParams& params) {
  validate_dataset(data);
  AuthModel out;
  out.algorithm = algo;
  out.dim = data.x[0].size();
  switch (algo) {
    case Algorithm::kLogReg:
      out.model = train_logreg(data, params);
      break;
    case Algorithm::kMlp:
      out.model = train_mlp(data, seed, params);
      break;
    case Algorithm::kKnn: {
      KnnModel knn;
      knn.k = std::min(params.knn_k, data.x.size());
      knn.train_x = data.x;
      knn.train_y = data.y;
      out.model = std::move(knn);
      break;
    }
    case Algorithm::kSvm:
      out.model = train_svm_smo(data, seed, params);
      break;
    case Algorithm::kForest: {
      ForestModel fm;
      fm.forest = train_forest(data.x, data.y, 2, params.forest, seed);
      out.model = std::move(fm);
      break;
    }
  }
  return out;
}

double score(const AuthModel& model, std::span<const double> x) {
  if (x.size() != model.dim) {
    throw Error(ErrorCode::DimensionMismatch, "sample dimension does not match model");
  }
  switch (model.algorithm) {
    case Algorithm::kLogReg: {
      const auto& m = std::get<LogRegModel>(model.model);
      double eta = m.bias;
      for (std::size_t j = 0; j < m.weights.size(); ++j) eta += m.weights[j] * x[j];
      return sigmoid(eta);
    }
    case Algorithm::kMlp:
      return mlp_forward(std::get<MlpModel>(model.model), x);
    case Algorithm::kKnn: {
      const auto& m = std::get<KnnModel>(model.model);
      std::vector<std::pair<double, std::size_t>> dist(m.train_x.size());
      for (std::size_t i = 0; i < m.train_x.size(); ++i) {
        dist[i] = {squared_distance(m.train_x[i], x), i};
      }
      std::sort(dist.begin(), dist.end());
      std::size_t hits = 0;
      for (std::size_t i = 0; i < m.k; ++i) {
        hits += static_cast<std::size_t>(m.train_y[dist[i].second]);
      }
      return static_cast<double>(hits) / static_cast<double>(m.k);
    }
    case Algorithm::kSvm:
      return sigmoid(svm_decision_value(std::get<SvmModel>(model.model), x));
    case Algorithm::kForest:
      return std::get<ForestModel>(model.model).forest.predict_proba(x)[1];
  }
  return 0.0;
}

}  // namespace auth
