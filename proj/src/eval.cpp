#include "auth/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <utility>

#include "auth/error.hpp"
#include "auth/rng.hpp"
#include "auth/strfmt.hpp"
#include "json.hpp"

namespace auth {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

}  // namespace

EerResult compute_eer(std::span<const double> genuine, std::span<const double> impostor) {
  if (genuine.empty() || impostor.empty()) {
    throw Error(ErrorCode::EmptyScores, "both score lists must be non-empty");
  }
  std::vector<double> gen(genuine.begin(), genuine.end());
  std::vector<double> imp(impostor.begin(), impostor.end());
  std::sort(gen.begin(), gen.end());
  std::sort(imp.begin(), imp.end());

  std::vector<double> thresholds;
  thresholds.reserve(gen.size() + imp.size() + 2);
  thresholds.push_back(-std::numeric_limits<double>::infinity());
  std::merge(gen.begin(), gen.end(), imp.begin(), imp.end(), std::back_inserter(thresholds));
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  thresholds.push_back(std::numeric_limits<double>::infinity());

  const double ng = static_cast<double>(gen.size());
  const double ni = static_cast<double>(imp.size());
  EerResult best;
  double best_diff = std::numeric_limits<double>::infinity();
  for (double t : thresholds) {
    const auto below_g = std::lower_bound(gen.begin(), gen.end(), t) - gen.begin();
    const auto below_i = std::lower_bound(imp.begin(), imp.end(), t) - imp.begin();
    const double frr = static_cast<double>(below_g) / ng;
    const double far = static_cast<double>(imp.size() - static_cast<std::size_t>(below_i)) / ni;
    const double diff = std::fabs(far - frr);
    if (diff < best_diff) {
      best_diff = diff;
      best.eer = 0.5 * (far + frr);
      best.threshold = t;
      best.far = far;
      best.frr = frr;
    }
  }
  return best;
}

UserData prepare_user_data(const AccelTrace& trace, const EvalConfig& config) {
  UserData data;
  data.user_id = trace.user_id;
  const AccelTrace attended = remove_unattended(trace, config.unattended);
  const AccelTrace filtered = median_filter(attended, config.median_span);
  const auto windows = window_trace(filtered, config.features);
  data.windows = extract_features_all(windows, config.features);
  return data;
}

UserProfile enroll_user(const UserData& candidate, const std::vector<UserData>& impostors,
                        const std::vector<Algorithm>& algorithms, const EvalConfig& config,
                        std::uint64_t seed) {
  if (algorithms.empty()) throw Error(ErrorCode::InvalidSpec, "no algorithms requested");
  const std::size_t n = candidate.windows.size();
  if (n < config.min_windows) {
    throw Error(ErrorCode::EnrollmentFailure,
                candidate.user_id + ": too few windows (" + std::to_string(n) + " < " +
                    std::to_string(config.min_windows) + ")");
  }
  if (impostors.empty()) {
    throw Error(ErrorCode::EnrollmentFailure, candidate.user_id + ": no impostor users");
  }

  UserProfile profile;
  profile.user_id = candidate.user_id;
  profile.seed = seed;
  profile.algorithms = algorithms;
  profile.total_window_count = n;
  profile.train_window_count = n / 2;
  const std::size_t n_train = profile.train_window_count;

  std::vector<std::vector<double>> train_raw(n_train);
  for (std::size_t i = 0; i < n_train; ++i) train_raw[i] = candidate.windows[i].values;
  profile.normalizer = fit_minmax(train_raw);

  std::vector<std::vector<double>> train(n_train);
  for (std::size_t i = 0; i < n_train; ++i) {
    train[i] = apply_minmax(profile.normalizer, train_raw[i]);
  }

  try {
    profile.context = train_context_model(train, config.context, derive_seed(seed, "context"));
  } catch (const Error& e) {
    throw Error(ErrorCode::EnrollmentFailure,
                candidate.user_id + ": context discovery failed (" + e.what() + ")");
  }

  // Disjoint impostor training and test pools when the population allows it;
  // with a single impostor its first half trains and its second half tests.
  const std::size_t m = impostors.size();
  std::vector<std::size_t> pool;
  if (m >= 2) {
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng pool_rng(derive_seed(seed, "impostor-pool"));
    pool_rng.shuffle(order);
    pool.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>((m + 1) / 2));
    std::sort(pool.begin(), pool.end());
  } else {
    pool.push_back(0);
    profile.reused_impostors = true;
  }
  for (std::size_t idx : pool) profile.impostor_train_users.push_back(impostors[idx].user_id);

  std::vector<std::vector<std::vector<double>>> impostor_train(pool.size());
  for (std::size_t p = 0; p < pool.size(); ++p) {
    const auto& user = impostors[pool[p]];
    const std::size_t take =
        profile.reused_impostors ? user.windows.size() / 2 : user.windows.size();
    impostor_train[p].reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
      impostor_train[p].push_back(apply_minmax(profile.normalizer, user.windows[i].values));
    }
  }

  const std::size_t n_ctx = profile.context.retained.size();
  auto mapped = map_impostor_samples(profile.context, impostor_train, 0);

  std::vector<std::vector<std::vector<double>>> genuine_by_ctx(n_ctx);
  for (std::size_t i = 0; i < n_train; ++i) {
    const int ctx = profile.context.cluster_to_context[static_cast<std::size_t>(
        profile.context.clustering.assignments[i])];
    if (ctx >= 0) genuine_by_ctx[static_cast<std::size_t>(ctx)].push_back(train[i]);
  }

  profile.contexts.resize(n_ctx);
  std::size_t trained = 0;
  for (std::size_t c = 0; c < n_ctx; ++c) {
    auto& enrollment = profile.contexts[c];
    auto& genuine = genuine_by_ctx[c];
    auto& impostor = mapped[c];
    enrollment.genuine_train_count = genuine.size();
    if (genuine.empty() || impostor.empty()) continue;

    const std::size_t cap = config.impostor_cap != 0 ? config.impostor_cap : genuine.size();
    if (impostor.size() > cap) impostor.resize(cap);
    enrollment.impostor_train_count = impostor.size();

    std::vector<std::vector<double>> combined;
    combined.reserve(genuine.size() + impostor.size());
    std::vector<bool> labels;
    labels.reserve(genuine.size() + impostor.size());
    for (const auto& v : genuine) {
      combined.push_back(v);
      labels.push_back(true);
    }
    for (const auto& v : impostor) {
      combined.push_back(v);
      labels.push_back(false);
    }
    enrollment.subset = cfs_select(combined, labels);

    LabeledDataset data;
    data.x.reserve(combined.size());
    for (const auto& v : combined) data.x.push_back(apply_subset(enrollment.subset, v));
    data.y.assign(labels.size(), 0);
    for (std::size_t i = 0; i < labels.size(); ++i) data.y[i] = labels[i] ? 1 : 0;

    for (Algorithm algo : algorithms) {
      enrollment.models.push_back(
          train_classifier(algo, data, derive_seed(seed, algorithm_name(algo), c),
                           config.classifier));
    }
    enrollment.trained = true;
    ++trained;
  }

  if (trained == 0) {
    throw Error(ErrorCode::EnrollmentFailure,
                candidate.user_id + ": all contexts unevaluable (no impostor coverage)");
  }
  return profile;
}

TestSet make_test_set(const UserProfile& profile, const UserData& candidate,
                      const std::vector<UserData>& impostors) {
  TestSet test;
  test.candidate.assign(candidate.windows.begin() +
                            static_cast<std::ptrdiff_t>(profile.train_window_count),
                        candidate.windows.end());

  auto in_train_pool = [&profile](const std::string& id) {
    return std::find(profile.impostor_train_users.begin(), profile.impostor_train_users.end(),
                     id) != profile.impostor_train_users.end();
  };

  bool any_disjoint = false;
  for (const auto& user : impostors) {
    if (!in_train_pool(user.user_id)) any_disjoint = true;
  }

  if (any_disjoint) {
    for (const auto& user : impostors) {
      if (in_train_pool(user.user_id)) continue;
      test.impostors.push_back(user.windows);
    }
  } else {
    // Training-pool users must double as test users; score only their
    // untrained halves and flag the reuse.
    test.reused_impostors = true;
    for (const auto& user : impostors) {
      if (!in_train_pool(user.user_id)) continue;
      std::vector<WindowFeatures> half(user.windows.begin() +
                                           static_cast<std::ptrdiff_t>(user.windows.size() / 2),
                                       user.windows.end());
      test.impostors.push_back(std::move(half));
    }
  }
  return test;
}

std::vector<EvalResult> verify_and_score(const UserProfile& profile, const TestSet& test) {
  const std::size_t n_ctx = profile.contexts.size();
  const std::size_t n_algo = profile.algorithms.size();

  std::vector<std::size_t> trained_contexts;
  for (std::size_t c = 0; c < n_ctx; ++c) {
    if (profile.contexts[c].trained) trained_contexts.push_back(c);
  }

  auto route = [&](std::span<const double> v) -> std::size_t {
    const auto ctx = static_cast<std::size_t>(predict_context(profile.context, v));
    if (profile.contexts[ctx].trained) return ctx;
    // The CIM can route to a context that never got impostor coverage; fall
    // back to the trained context with the nearest cluster centroid.
    std::size_t best = trained_contexts[0];
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c : trained_contexts) {
      const auto cluster = static_cast<std::size_t>(profile.context.retained[c]);
      const double d = squared_distance(v, profile.context.clustering.centroids[cluster]);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    return best;
  };

  std::vector<std::vector<std::vector<double>>> genuine(
      n_ctx, std::vector<std::vector<double>>(n_algo));
  std::vector<std::vector<std::vector<double>>> impostor(
      n_ctx, std::vector<std::vector<double>>(n_algo));

  auto score_window = [&](const WindowFeatures& wf, bool is_genuine) {
    const auto v = apply_minmax(profile.normalizer, wf.values);
    const std::size_t ctx = route(v);
    const auto& enrollment = profile.contexts[ctx];
    const auto reduced = apply_subset(enrollment.subset, v);
    for (std::size_t a = 0; a < n_algo; ++a) {
      const double s = score(enrollment.models[a], reduced);
      (is_genuine ? genuine : impostor)[ctx][a].push_back(s);
    }
  };

  for (const auto& wf : test.candidate) score_window(wf, true);
  for (const auto& user : test.impostors) {
    for (const auto& wf : user) score_window(wf, false);
  }

  std::vector<EvalResult> results;
  for (std::size_t c = 0; c < n_ctx; ++c) {
    for (std::size_t a = 0; a < n_algo; ++a) {
      if (genuine[c][a].empty() || impostor[c][a].empty()) continue;
      EvalResult r;
      r.user_id = profile.user_id;
      r.context = static_cast<int>(c);
      r.algorithm = profile.algorithms[a];
      r.genuine_scores = std::move(genuine[c][a]);
      r.impostor_scores = std::move(impostor[c][a]);
      const EerResult eer = compute_eer(r.genuine_scores, r.impostor_scores);
      r.eer = eer.eer;
      r.threshold_at_eer = eer.threshold;
      r.reused_impostors = test.reused_impostors;
      results.push_back(std::move(r));
    }
  }
  return results;
}

PopulationSummary aggregate(const std::vector<EvalResult>& results) {
  if (results.empty()) throw Error(ErrorCode::EmptyScores, "no results to aggregate");

  PopulationSummary summary;
  for (Algorithm algo : kAllAlgorithms) {
    for (const auto& r : results) {
      if (r.algorithm == algo) {
        summary.algorithms.push_back(algo);
        break;
      }
    }
  }
  for (const auto& r : results) {
    if (std::find(summary.users.begin(), summary.users.end(), r.user_id) ==
        summary.users.end()) {
      summary.users.push_back(r.user_id);
    }
  }

  const std::size_t nu = summary.users.size();
  const std::size_t na = summary.algorithms.size();
  std::vector<std::vector<double>> sums(nu, std::vector<double>(na, 0.0));
  summary.user_context_counts.assign(nu, std::vector<std::size_t>(na, 0));

  auto user_index = [&summary](const std::string& id) {
    return static_cast<std::size_t>(
        std::find(summary.users.begin(), summary.users.end(), id) - summary.users.begin());
  };
  auto algo_index = [&summary](Algorithm algo) {
    return static_cast<std::size_t>(
        std::find(summary.algorithms.begin(), summary.algorithms.end(), algo) -
        summary.algorithms.begin());
  };

  for (const auto& r : results) {
    const std::size_t u = user_index(r.user_id);
    const std::size_t a = algo_index(r.algorithm);
    sums[u][a] += r.eer;
    ++summary.user_context_counts[u][a];
  }

  summary.user_mean_eer.assign(nu, std::vector<double>(na, kNan));
  for (std::size_t u = 0; u < nu; ++u) {
    for (std::size_t a = 0; a < na; ++a) {
      if (summary.user_context_counts[u][a] > 0) {
        summary.user_mean_eer[u][a] =
            sums[u][a] / static_cast<double>(summary.user_context_counts[u][a]);
      }
    }
  }

  summary.population_mean.assign(na, kNan);
  summary.population_std.assign(na, kNan);
  for (std::size_t a = 0; a < na; ++a) {
    std::vector<double> vals;
    for (std::size_t u = 0; u < nu; ++u) {
      if (!std::isnan(summary.user_mean_eer[u][a])) vals.push_back(summary.user_mean_eer[u][a]);
    }
    if (vals.empty()) continue;
    const double mean =
        std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
    summary.population_mean[a] = mean;
    if (vals.size() >= 2) {
      double ss = 0.0;
      for (double v : vals) ss += (v - mean) * (v - mean);
      summary.population_std[a] = std::sqrt(ss / static_cast<double>(vals.size() - 1));
    } else {
      summary.population_std[a] = 0.0;
    }
  }
  return summary;
}

namespace {

FteStep build_step(const PopulationSummary& summary, const std::vector<std::size_t>& keep,
                   double fraction, std::vector<std::string> removed_users) {
  FteStep step;
  step.fraction = fraction;
  step.removed = removed_users.size();
  step.removed_users = std::move(removed_users);

  const std::size_t na = summary.algorithms.size();
  step.population_mean.assign(na, kNan);
  step.population_std.assign(na, kNan);
  step.cdf.resize(na);
  for (std::size_t a = 0; a < na; ++a) {
    std::vector<double> vals;
    for (std::size_t u : keep) {
      if (!std::isnan(summary.user_mean_eer[u][a])) vals.push_back(summary.user_mean_eer[u][a]);
    }
    if (vals.empty()) continue;
    std::sort(vals.begin(), vals.end());
    const double mean =
        std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
    step.population_mean[a] = mean;
    if (vals.size() >= 2) {
      double ss = 0.0;
      for (double v : vals) ss += (v - mean) * (v - mean);
      step.population_std[a] = std::sqrt(ss / static_cast<double>(vals.size() - 1));
    } else {
      step.population_std[a] = 0.0;
    }
    for (std::size_t i = 0; i < vals.size(); ++i) {
      step.cdf[a].emplace_back(vals[i],
                               static_cast<double>(i + 1) / static_cast<double>(vals.size()));
    }
  }
  return step;
}

}  // namespace

FteReport failure_to_enroll(const PopulationSummary& summary, std::span<const double> fractions) {
  const std::size_t nu = summary.users.size();
  if (nu < 2) throw Error(ErrorCode::InvalidSpec, "failure-to-enroll needs at least 2 users");

  // Badness = mean EER across the algorithms the user was evaluated on;
  // users with no results at all rank worst.
  std::vector<double> badness(nu, std::numeric_limits<double>::infinity());
  for (std::size_t u = 0; u < nu; ++u) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t a = 0; a < summary.algorithms.size(); ++a) {
      if (!std::isnan(summary.user_mean_eer[u][a])) {
        sum += summary.user_mean_eer[u][a];
        ++count;
      }
    }
    if (count > 0) badness[u] = sum / static_cast<double>(count);
  }

  std::vector<std::size_t> ranked(nu);
  std::iota(ranked.begin(), ranked.end(), std::size_t{0});
  std::stable_sort(ranked.begin(), ranked.end(), [&badness](std::size_t a, std::size_t b) {
    return badness[a] > badness[b];
  });

  FteReport report;
  report.algorithms = summary.algorithms;

  std::vector<double> all_fractions;
  all_fractions.push_back(0.0);
  all_fractions.insert(all_fractions.end(), fractions.begin(), fractions.end());

  for (double f : all_fractions) {
    if (f < 0.0 || f >= 1.0) throw Error(ErrorCode::InvalidSpec, "removal fraction outside [0,1)");
    const auto r = static_cast<std::size_t>(std::ceil(f * static_cast<double>(nu)));
    std::vector<std::string> removed;
    std::vector<bool> is_removed(nu, false);
    for (std::size_t i = 0; i < r && i < nu; ++i) {
      removed.push_back(summary.users[ranked[i]]);
      is_removed[ranked[i]] = true;
    }
    std::vector<std::size_t> keep;
    for (std::size_t u = 0; u < nu; ++u) {
      if (!is_removed[u]) keep.push_back(u);
    }
    report.steps.push_back(build_step(summary, keep, f, std::move(removed)));
  }
  return report;
}

PopulationSummary read_summary_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, path);

  auto split = [](const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    return fields;
  };

  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::SerializationError, "empty summary file " + path);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  if (header.size() < 2 || header[0] != "user_id") {
    throw Error(ErrorCode::SerializationError, "unexpected summary header in " + path);
  }

  PopulationSummary summary;
  for (std::size_t i = 1; i < header.size(); ++i) {
    summary.algorithms.push_back(parse_algorithm(header[i]));
  }

  const std::size_t na = summary.algorithms.size();
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != na + 1) {
      throw Error(ErrorCode::SerializationError, "ragged summary row in " + path);
    }
    if (fields[0] == "(mean)" || fields[0] == "(std)") continue;
    summary.users.push_back(fields[0]);
    std::vector<double> row(na, kNan);
    std::vector<std::size_t> counts(na, 0);
    for (std::size_t a = 0; a < na; ++a) {
      const auto& field = fields[a + 1];
      if (field.empty()) continue;
      double value = 0.0;
      const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
      if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
        throw Error(ErrorCode::SerializationError, "bad number in " + path);
      }
      row[a] = value;
      counts[a] = 1;
    }
    summary.user_mean_eer.push_back(std::move(row));
    summary.user_context_counts.push_back(std::move(counts));
  }

  const std::size_t nu = summary.users.size();
  summary.population_mean.assign(na, kNan);
  summary.population_std.assign(na, kNan);
  for (std::size_t a = 0; a < na; ++a) {
    std::vector<double> vals;
    for (std::size_t u = 0; u < nu; ++u) {
      if (!std::isnan(summary.user_mean_eer[u][a])) vals.push_back(summary.user_mean_eer[u][a]);
    }
    if (vals.empty()) continue;
    const double mean =
        std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
    summary.population_mean[a] = mean;
    if (vals.size() >= 2) {
      double ss = 0.0;
      for (double v : vals) ss += (v - mean) * (v - mean);
      summary.population_std[a] = std::sqrt(ss / static_cast<double>(vals.size() - 1));
    } else {
      summary.population_std[a] = 0.0;
    }
  }
  return summary;
}

void write_results_csv(const std::string& path, const std::vector<EvalResult>& results) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::SerializationError, "cannot open " + path);
  std::string body =
      "user_id,context,algorithm,eer,threshold_at_eer,genuine_count,impostor_count,"
      "reused_impostors\n";
  for (const auto& r : results) {
    body += r.user_id;
    body += ',';
    body += std::to_string(r.context);
    body += ',';
    body += algorithm_name(r.algorithm);
    body += ',';
    append_double(body, r.eer);
    body += ',';
    append_double(body, r.threshold_at_eer);
    body += ',';
    body += std::to_string(r.genuine_scores.size());
    body += ',';
    body += std::to_string(r.impostor_scores.size());
    body += ',';
    body += r.reused_impostors ? '1' : '0';
    body += '\n';
  }
  out << body;
  if (!out) throw Error(ErrorCode::SerializationError, "write failed for " + path);
}

void write_results_json(const std::string& path, const std::vector<EvalResult>& results) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    nlohmann::ordered_json item;
    item["user_id"] = r.user_id;
    item["context"] = r.context;
    item["algorithm"] = algorithm_name(r.algorithm);
    item["eer"] = r.eer;
    item["threshold_at_eer"] = r.threshold_at_eer;
    item["reused_impostors"] = r.reused_impostors;
    item["genuine_scores"] = r.genuine_scores;
    item["impostor_scores"] = r.impostor_scores;
    arr.push_back(std::move(item));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::SerializationError, "cannot open " + path);
  out << arr.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::SerializationError, "write failed for " + path);
}

void write_summary_csv(const std::string& path, const PopulationSummary& summary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::SerializationError, "cannot open " + path);
  std::string body = "user_id";
  for (Algorithm algo : summary.algorithms) {
    body += ',';
    body += algorithm_name(algo);
  }
  body += '\n';
  for (std::size_t u = 0; u < summary.users.size(); ++u) {
    body += summary.users[u];
    for (std::size_t a = 0; a < summary.algorithms.size(); ++a) {
      body += ',';
      if (!std::isnan(summary.user_mean_eer[u][a])) {
        append_double(body, summary.user_mean_eer[u][a]);
      }
    }
    body += '\n';
  }
  // Population rows; parentheses keep the ids clear of real user names.
  body += "(mean)";
  for (double v : summary.population_mean) {
    body += ',';
    if (!std::isnan(v)) append_double(body, v);
  }
  body += "\n(std)";
  for (double v : summary.population_std) {
    body += ',';
    if (!std::isnan(v)) append_double(body, v);
  }
  body += '\n';
  out << body;
  if (!out) throw Error(ErrorCode::SerializationError, "write failed for " + path);
}

void write_fte_summary_csv(const std::string& path, const FteReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::SerializationError, "cannot open " + path);
  std::string body = "fraction,removed,algorithm,mean_eer,std_eer\n";
  for (const auto& step : report.steps) {
    for (std::size_t a = 0; a < report.algorithms.size(); ++a) {
      append_double(body, step.fraction);
      body += ',';
      body += std::to_string(step.removed);
      body += ',';
      body += algorithm_name(report.algorithms[a]);
      body += ',';
      if (!std::isnan(step.population_mean[a])) append_double(body, step.population_mean[a]);
      body += ',';
      if (!std::isnan(step.population_std[a])) append_double(body, step.population_std[a]);
      body += '\n';
    }
  }
  out << body;
  if (!out) throw Error(ErrorCode::SerializationError, "write failed for " + path);
}

void write_fte_cdf_csv(const std::string& path, const FteStep& step, std::size_t algo_index) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::SerializationError, "cannot open " + path);
  std::string body = "eer,cumulative_fraction\n";
  for (const auto& [eer, frac] : step.cdf[algo_index]) {
    append_double(body, eer);
    body += ',';
    append_double(body, frac);
    body += '\n';
  }
  out << body;
  if (!out) throw Error(ErrorCode::SerializationError, "write failed for " + path);
}

}  // namespace auth
