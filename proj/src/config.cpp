#include "auth/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "auth/error.hpp"
#include "json.hpp"

namespace auth {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
  throw Error(ErrorCode::ConfigError, key + ": " + why);
}

// Reads one section object, tracking which keys were consumed so typos and
// stale keys fail loudly instead of silently keeping a default.
class Section {
 public:
  Section(const json& root, const std::string& name) : name_(name) {
    if (const auto it = root.find(name); it != root.end()) {
      if (!it->is_object()) bad_key(name, "must be an object");
      obj_ = &*it;
    }
  }

  template <typename T>
  void get(const char* key, T& out) {
    if (obj_ == nullptr) return;
    const auto it = obj_->find(key);
    if (it == obj_->end()) return;
    seen_.insert(key);
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      bad_key(name_ + "." + key, "wrong type");
    }
  }

  void finish() const {
    if (obj_ == nullptr) return;
    for (const auto& [key, value] : obj_->items()) {
      if (!seen_.contains(key)) bad_key(name_ + "." + key, "unknown key");
    }
  }

 private:
  const json* obj_ = nullptr;
  std::string name_;
  std::set<std::string> seen_;
};

}  // namespace

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, path);
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("invalid config json: ") + e.what());
  }
  if (!root.is_object()) throw Error(ErrorCode::ConfigError, "config root must be an object");

  RunConfig config;
  std::set<std::string> top_seen;

  if (const auto it = root.find("seed"); it != root.end()) {
    top_seen.insert("seed");
    try {
      config.seed = it->get<std::uint64_t>();
    } catch (const json::exception&) {
      bad_key("seed", "wrong type");
    }
  }
  if (const auto it = root.find("jobs"); it != root.end()) {
    top_seen.insert("jobs");
    try {
      config.jobs = it->get<std::size_t>();
    } catch (const json::exception&) {
      bad_key("jobs", "wrong type");
    }
  }
  if (const auto it = root.find("algorithms"); it != root.end()) {
    top_seen.insert("algorithms");
    if (!it->is_array() || it->empty()) bad_key("algorithms", "must be a non-empty array");
    config.algorithms.clear();
    for (const auto& entry : *it) {
      if (!entry.is_string()) bad_key("algorithms", "entries must be strings");
      try {
        config.algorithms.push_back(parse_algorithm(entry.get<std::string>()));
      } catch (const Error&) {
        bad_key("algorithms", "unknown algorithm '" + entry.get<std::string>() + "'");
      }
    }
  }

  Section preprocess(root, "preprocess");
  top_seen.insert("preprocess");
  preprocess.get("lx", config.eval.unattended.lx);
  preprocess.get("ux", config.eval.unattended.ux);
  preprocess.get("ly", config.eval.unattended.ly);
  preprocess.get("uy", config.eval.unattended.uy);
  preprocess.get("lz", config.eval.unattended.lz);
  preprocess.get("uz", config.eval.unattended.uz);
  preprocess.get("segment_len_ms", config.eval.unattended.segment_len_ms);
  preprocess.get("median_span", config.eval.median_span);
  preprocess.finish();

  Section features(root, "features");
  top_seen.insert("features");
  features.get("window_ms", config.eval.features.window_ms);
  features.get("step_ms", config.eval.features.step_ms);
  features.get("min_samples", config.eval.features.min_samples);
  features.get("max_gap_ms", config.eval.features.max_gap_ms);
  features.get("dtw_max_points", config.eval.features.dtw_max_points);
  features.finish();

  Section context(root, "context");
  top_seen.insert("context");
  context.get("k", config.eval.context.kmeans.k);
  context.get("max_iter", config.eval.context.kmeans.max_iter);
  context.get("tol", config.eval.context.kmeans.tol);
  context.get("min_cluster_count", config.eval.context.min_cluster_count);
  context.get("min_cluster_frac", config.eval.context.min_cluster_frac);
  context.get("cim_trees", config.eval.context.cim_forest.n_trees);
  context.finish();

  Section classifiers(root, "classifiers");
  top_seen.insert("classifiers");
  classifiers.get("ridge", config.eval.classifier.ridge);
  classifiers.get("logreg_max_iter", config.eval.classifier.logreg_max_iter);
  classifiers.get("mlp_hidden", config.eval.classifier.mlp_hidden);
  classifiers.get("mlp_lr", config.eval.classifier.mlp_lr);
  classifiers.get("mlp_epochs", config.eval.classifier.mlp_epochs);
  classifiers.get("knn_k", config.eval.classifier.knn_k);
  classifiers.get("svm_c", config.eval.classifier.svm_c);
  classifiers.get("svm_tol", config.eval.classifier.svm_tol);
  classifiers.get("svm_max_passes", config.eval.classifier.svm_max_passes);
  classifiers.get("rf_trees", config.eval.classifier.forest.n_trees);
  classifiers.finish();

  Section eval(root, "eval");
  top_seen.insert("eval");
  eval.get("min_windows", config.eval.min_windows);
  eval.get("impostor_cap", config.eval.impostor_cap);
  eval.get("removal_fractions", config.removal_fractions);
  eval.finish();

  Section synth(root, "synth");
  top_seen.insert("synth");
  synth.get("n_users", config.synth_users);
  synth.get("distinctiveness", config.distinctiveness);
  synth.get("n_contexts", config.population.n_contexts);
  synth.get("total_duration_ms", config.population.total_duration_ms);
  synth.get("unattended_fraction", config.population.unattended_fraction);
  synth.get("base_rate_hz", config.population.base_rate_hz);
  synth.get("rate_spread_hz", config.population.rate_spread_hz);
  synth.get("mean_bout_ms", config.population.mean_bout_ms);
  synth.finish();

  for (const auto& [key, value] : root.items()) {
    if (!top_seen.contains(key)) bad_key(key, "unknown key");
  }
  return config;
}

void validate_config(const RunConfig& config) {
  const auto& e = config.eval;
  if (!(e.unattended.lx < e.unattended.ux)) bad_key("preprocess.lx", "requires lx < ux");
  if (!(e.unattended.ly < e.unattended.uy)) bad_key("preprocess.ly", "requires ly < uy");
  if (!(e.unattended.lz < e.unattended.uz)) bad_key("preprocess.lz", "requires lz < uz");
  if (e.unattended.segment_len_ms <= 0) bad_key("preprocess.segment_len_ms", "must be positive");
  if (e.median_span < 1 || e.median_span % 2 == 0) {
    bad_key("preprocess.median_span", "must be odd and positive");
  }

  if (e.features.window_ms <= 0) bad_key("features.window_ms", "must be positive");
  if (e.features.step_ms <= 0) bad_key("features.step_ms", "must be positive");
  if (e.features.min_samples < 2) bad_key("features.min_samples", "must be at least 2");
  if (e.features.max_gap_ms <= 0) bad_key("features.max_gap_ms", "must be positive");
  if (e.features.dtw_max_points < 2) bad_key("features.dtw_max_points", "must be at least 2");

  if (e.context.kmeans.k == 0) bad_key("context.k", "must be positive");
  if (e.context.kmeans.max_iter == 0) bad_key("context.max_iter", "must be positive");
  if (!(e.context.kmeans.tol > 0.0)) bad_key("context.tol", "must be positive");
  if (e.context.min_cluster_count == 0) bad_key("context.min_cluster_count", "must be positive");
  if (e.context.min_cluster_frac < 0.0 || e.context.min_cluster_frac >= 1.0) {
    bad_key("context.min_cluster_frac", "must be in [0, 1)");
  }
  if (e.context.cim_forest.n_trees == 0) bad_key("context.cim_trees", "must be positive");

  if (!(e.classifier.ridge > 0.0)) bad_key("classifiers.ridge", "must be positive");
  if (e.classifier.logreg_max_iter == 0) bad_key("classifiers.logreg_max_iter", "must be positive");
  if (e.classifier.mlp_hidden == 0) bad_key("classifiers.mlp_hidden", "must be positive");
  if (!(e.classifier.mlp_lr > 0.0)) bad_key("classifiers.mlp_lr", "must be positive");
  if (e.classifier.mlp_epochs == 0) bad_key("classifiers.mlp_epochs", "must be positive");
  if (e.classifier.knn_k == 0) bad_key("classifiers.knn_k", "must be positive");
  if (!(e.classifier.svm_c > 0.0)) bad_key("classifiers.svm_c", "must be positive");
  if (!(e.classifier.svm_tol > 0.0)) bad_key("classifiers.svm_tol", "must be positive");
  if (e.classifier.svm_max_passes == 0) bad_key("classifiers.svm_max_passes", "must be positive");
  if (e.classifier.forest.n_trees == 0) bad_key("classifiers.rf_trees", "must be positive");

  if (e.min_windows < 2) bad_key("eval.min_windows", "must be at least 2");
  for (double f : config.removal_fractions) {
    if (f < 0.0 || f >= 1.0) bad_key("eval.removal_fractions", "entries must be in [0, 1)");
  }
  if (config.algorithms.empty()) bad_key("algorithms", "must not be empty");

  if (config.synth_users < 2) bad_key("synth.n_users", "must be at least 2");
  if (config.distinctiveness < 0.0 || config.distinctiveness > 1.0) {
    bad_key("synth.distinctiveness", "must be in [0, 1]");
  }
  if (config.population.n_contexts == 0) bad_key("synth.n_contexts", "must be positive");
  if (config.population.total_duration_ms <= 0) {
    bad_key("synth.total_duration_ms", "must be positive");
  }
  if (config.population.unattended_fraction < 0.0 ||
      config.population.unattended_fraction >= 1.0) {
    bad_key("synth.unattended_fraction", "must be in [0, 1)");
  }
  const double half_spread = 0.5 * config.population.rate_spread_hz;
  if (config.population.base_rate_hz - half_spread < 4.0 ||
      config.population.base_rate_hz + half_spread > 40.0) {
    bad_key("synth.base_rate_hz", "rate range must stay within [4, 40]");
  }
  if (config.population.mean_bout_ms <= 0) bad_key("synth.mean_bout_ms", "must be positive");
}

std::string config_to_json(const RunConfig& config) {
  json root;
  root["seed"] = config.seed;
  json algos = json::array();
  for (Algorithm algo : config.algorithms) algos.push_back(algorithm_name(algo));
  root["algorithms"] = std::move(algos);
  root["jobs"] = config.jobs;

  const auto& e = config.eval;
  root["preprocess"] = json{{"lx", e.unattended.lx},
                            {"ux", e.unattended.ux},
                            {"ly", e.unattended.ly},
                            {"uy", e.unattended.uy},
                            {"lz", e.unattended.lz},
                            {"uz", e.unattended.uz},
                            {"segment_len_ms", e.unattended.segment_len_ms},
                            {"median_span", e.median_span}};
  root["features"] = json{{"window_ms", e.features.window_ms},
                          {"step_ms", e.features.step_ms},
                          {"min_samples", e.features.min_samples},
                          {"max_gap_ms", e.features.max_gap_ms},
                          {"dtw_max_points", e.features.dtw_max_points}};
  root["context"] = json{{"k", e.context.kmeans.k},
                         {"max_iter", e.context.kmeans.max_iter},
                         {"tol", e.context.kmeans.tol},
                         {"min_cluster_count", e.context.min_cluster_count},
                         {"min_cluster_frac", e.context.min_cluster_frac},
                         {"cim_trees", e.context.cim_forest.n_trees}};
  root["classifiers"] = json{{"ridge", e.classifier.ridge},
                             {"logreg_max_iter", e.classifier.logreg_max_iter},
                             {"mlp_hidden", e.classifier.mlp_hidden},
                             {"mlp_lr", e.classifier.mlp_lr},
                             {"mlp_epochs", e.classifier.mlp_epochs},
                             {"knn_k", e.classifier.knn_k},
                             {"svm_c", e.classifier.svm_c},
                             {"svm_tol", e.classifier.svm_tol},
                             {"svm_max_passes", e.classifier.svm_max_passes},
                             {"rf_trees", e.classifier.forest.n_trees}};
  root["eval"] = json{{"min_windows", e.min_windows},
                      {"impostor_cap", e.impostor_cap},
                      {"removal_fractions", config.removal_fractions}};
  root["synth"] = json{{"n_users", config.synth_users},
                       {"distinctiveness", config.distinctiveness},
                       {"n_contexts", config.population.n_contexts},
                       {"total_duration_ms", config.population.total_duration_ms},
                       {"unattended_fraction", config.population.unattended_fraction},
                       {"base_rate_hz", config.population.base_rate_hz},
                       {"rate_spread_hz", config.population.rate_spread_hz},
                       {"mean_bout_ms", config.population.mean_bout_ms}};
  return root.dump(2);
}

std::uint64_t config_hash(const RunConfig& config) {
  const std::string canonical = config_to_json(config);
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : canonical) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

}  // namespace auth
