#include "auth/profile_io.hpp"

#include <cmath>
#include <fstream>

#include "auth/error.hpp"
#include "json.hpp"

namespace auth {

namespace {

using json = nlohmann::ordered_json;

void require_finite(double v) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::SerializationError, "non-finite value in profile");
  }
}

json doubles_to_json(const std::vector<double>& values) {
  for (double v : values) require_finite(v);
  return json(values);
}

json matrix_to_json(const std::vector<std::vector<double>>& rows) {
  json arr = json::array();
  for (const auto& row : rows) arr.push_back(doubles_to_json(row));
  return arr;
}

json forest_to_json(const RandomForest& forest) {
  json trees = json::array();
  for (const auto& tree : forest.trees) {
    json nodes = json::array();
    for (const auto& node : tree.nodes) {
      require_finite(node.threshold);
      nodes.push_back(json::array({node.feature, node.threshold, node.left, node.right,
                                   node.label}));
    }
    trees.push_back(std::move(nodes));
  }
  return json{{"n_classes", forest.n_classes}, {"trees", std::move(trees)}};
}

RandomForest forest_from_json(const json& j) {
  RandomForest forest;
  forest.n_classes = j.at("n_classes").get<std::size_t>();
  for (const auto& tree_json : j.at("trees")) {
    DecisionTree tree;
    for (const auto& node_json : tree_json) {
      TreeNode node;
      node.feature = node_json.at(0).get<std::int32_t>();
      node.threshold = node_json.at(1).get<double>();
      node.left = node_json.at(2).get<std::int32_t>();
      node.right = node_json.at(3).get<std::int32_t>();
      node.label = node_json.at(4).get<std::int32_t>();
      tree.nodes.push_back(node);
    }
    forest.trees.push_back(std::move(tree));
  }
  return forest;
}

json model_to_json(const AuthModel& model) {
  json j;
  j["type"] = algorithm_name(model.algorithm);
  j["dim"] = model.dim;
  switch (model.algorithm) {
    case Algorithm::kLogReg: {
      const auto& m = std::get<LogRegModel>(model.model);
      require_finite(m.bias);
      j["weights"] = doubles_to_json(m.weights);
      j["bias"] = m.bias;
      break;
    }
    case Algorithm::kMlp: {
      const auto& m = std::get<MlpModel>(model.model);
      require_finite(m.b2);
      j["in_dim"] = m.in_dim;
      j["hidden"] = m.hidden;
      j["w1"] = doubles_to_json(m.w1);
      j["b1"] = doubles_to_json(m.b1);
      j["w2"] = doubles_to_json(m.w2);
      j["b2"] = m.b2;
      break;
    }
    case Algorithm::kKnn: {
      const auto& m = std::get<KnnModel>(model.model);
      j["k"] = m.k;
      j["train_x"] = matrix_to_json(m.train_x);
      j["train_y"] = json(m.train_y);
      break;
    }
    case Algorithm::kSvm: {
      const auto& m = std::get<SvmModel>(model.model);
      require_finite(m.gamma);
      require_finite(m.bias);
      j["gamma"] = m.gamma;
      j["bias"] = m.bias;
      j["coefs"] = doubles_to_json(m.coefs);
      j["support_x"] = matrix_to_json(m.support_x);
      break;
    }
    case Algorithm::kForest: {
      const auto& m = std::get<ForestModel>(model.model);
      j["forest"] = forest_to_json(m.forest);
      break;
    }
  }
  return j;
}

AuthModel model_from_json(const json& j) {
  AuthModel model;
  model.algorithm = parse_algorithm(j.at("type").get<std::string>());
  model.dim = j.at("dim").get<std::size_t>();
  switch (model.algorithm) {
    case Algorithm::kLogReg: {
      LogRegModel m;
      m.weights = j.at("weights").get<std::vector<double>>();
      m.bias = j.at("bias").get<double>();
      model.model = std::move(m);
      break;
    }
    case Algorithm::kMlp: {
      MlpModel m;
      m.in_dim = j.at("in_dim").get<std::size_t>();
      m.hidden = j.at("hidden").get<std::size_t>();
      m.w1 = j.at("w1").get<std::vector<double>>();
      m.b1 = j.at("b1").get<std::vector<double>>();
      m.w2 = j.at("w2").get<std::vector<double>>();
      m.b2 = j.at("b2").get<double>();
      model.model = std::move(m);
      break;
    }
    case Algorithm::kKnn: {
      KnnModel m;
      m.k = j.at("k").get<std::size_t>();
      m.train_x = j.at("train_x").get<std::vector<std::vector<double>>>();
      m.train_y = j.at("train_y").get<std::vector<int>>();
      model.model = std::move(m);
      break;
    }
    case Algorithm::kSvm: {
      SvmModel m;
      m.gamma = j.at("gamma").get<double>();
      m.bias = j.at("bias").get<double>();
      m.coefs = j.at("coefs").get<std::vector<double>>();
      m.support_x = j.at("support_x").get<std::vector<std::vector<double>>>();
      model.model = std::move(m);
      break;
    }
    case Algorithm::kForest: {
      ForestModel m;
      m.forest = forest_from_json(j.at("forest"));
      model.model = std::move(m);
      break;
    }
  }
  return model;
}

}  // namespace

void save_profile(const UserProfile& profile, const std::string& path) {
  json j;
  j["schema_version"] = kProfileSchemaVersion;
  j["user_id"] = profile.user_id;
  j["seed"] = profile.seed;
  json algos = json::array();
  for (Algorithm algo : profile.algorithms) algos.push_back(algorithm_name(algo));
  j["algorithms"] = std::move(algos);
  j["train_window_count"] = profile.train_window_count;
  j["total_window_count"] = profile.total_window_count;
  j["impostor_train_users"] = json(profile.impostor_train_users);
  j["reused_impostors"] = profile.reused_impostors;
  j["normalizer"] = json{{"lo", doubles_to_json(profile.normalizer.lo)},
                         {"hi", doubles_to_json(profile.normalizer.hi)}};

  json ctx;
  ctx["dim"] = profile.context.dim;
  ctx["centroids"] = matrix_to_json(profile.context.clustering.centroids);
  ctx["retained"] = json(profile.context.retained);
  ctx["cluster_to_context"] = json(profile.context.cluster_to_context);
  ctx["cim"] = forest_to_json(profile.context.cim);
  j["context"] = std::move(ctx);

  json contexts = json::array();
  for (const auto& enrollment : profile.contexts) {
    json e;
    e["trained"] = enrollment.trained;
    e["genuine_train_count"] = enrollment.genuine_train_count;
    e["impostor_train_count"] = enrollment.impostor_train_count;
    e["subset"] = json{{"indices", json(enrollment.subset.indices)},
                       {"merit", enrollment.subset.merit}};
    json models = json::array();
    for (const auto& model : enrollment.models) models.push_back(model_to_json(model));
    e["models"] = std::move(models);
    contexts.push_back(std::move(e));
  }
  j["contexts"] = std::move(contexts);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::SerializationError, "cannot open " + path);
  out << j.dump(1) << '\n';
  if (!out) throw Error(ErrorCode::SerializationError, "write failed for " + path);
}

UserProfile load_profile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SerializationError, std::string("invalid profile json: ") + e.what());
  }

  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kProfileSchemaVersion) {
      throw Error(ErrorCode::SchemaVersionMismatch,
                  "profile schema " + std::to_string(version) + ", expected " +
                      std::to_string(kProfileSchemaVersion));
    }

    UserProfile profile;
    profile.user_id = j.at("user_id").get<std::string>();
    profile.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& name : j.at("algorithms")) {
      profile.algorithms.push_back(parse_algorithm(name.get<std::string>()));
    }
    profile.train_window_count = j.at("train_window_count").get<std::size_t>();
    profile.total_window_count = j.at("total_window_count").get<std::size_t>();
    profile.impostor_train_users =
        j.at("impostor_train_users").get<std::vector<std::string>>();
    profile.reused_impostors = j.at("reused_impostors").get<bool>();
    profile.normalizer.lo = j.at("normalizer").at("lo").get<std::vector<double>>();
    profile.normalizer.hi = j.at("normalizer").at("hi").get<std::vector<double>>();

    const auto& ctx = j.at("context");
    profile.context.dim = ctx.at("dim").get<std::size_t>();
    profile.context.clustering.centroids =
        ctx.at("centroids").get<std::vector<std::vector<double>>>();
    profile.context.retained = ctx.at("retained").get<std::vector<int>>();
    profile.context.cluster_to_context = ctx.at("cluster_to_context").get<std::vector<int>>();
    profile.context.cim = forest_from_json(ctx.at("cim"));

    for (const auto& e : j.at("contexts")) {
      ContextEnrollment enrollment;
      enrollment.trained = e.at("trained").get<bool>();
      enrollment.genuine_train_count = e.at("genuine_train_count").get<std::size_t>();
      enrollment.impostor_train_count = e.at("impostor_train_count").get<std::size_t>();
      enrollment.subset.indices = e.at("subset").at("indices").get<std::vector<std::size_t>>();
      enrollment.subset.merit = e.at("subset").at("merit").get<double>();
      for (const auto& model_json : e.at("models")) {
        enrollment.models.push_back(model_from_json(model_json));
      }
      profile.contexts.push_back(std::move(enrollment));
    }
    return profile;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SerializationError, std::string("malformed profile: ") + e.what());
  }
}

}  // namespace auth
