#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "auth/config.hpp"
#include "auth/error.hpp"
#include "auth/eval.hpp"
#include "auth/profile_io.hpp"
#include "auth/rng.hpp"
#include "auth/stats.hpp"
#include "auth/synthgen.hpp"
#include "json.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using auth::Error;
using auth::ErrorCode;
using auth::RunConfig;

namespace {

constexpr const char* kToolVersion = "1.0.0";

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> algorithms;
  std::optional<std::size_t> jobs;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "JSON config file");
  cmd->add_option("--out-dir", opts.out_dir, "output directory");
  cmd->add_option("--seed", opts.seed, "master seed override");
  cmd->add_option("--algorithms", opts.algorithms,
                  "algorithm subset (LOGREG MLP KNN SVM RF)")
      ->delimiter(',');
  cmd->add_option("--jobs", opts.jobs, "worker threads for per-user jobs (0 = auto)");
}

RunConfig resolve_config(const CommonOpts& opts) {
  RunConfig config;
  if (!opts.config_path.empty()) config = auth::load_config(opts.config_path);
  if (opts.seed) config.seed = *opts.seed;
  if (opts.jobs) config.jobs = *opts.jobs;
  if (!opts.algorithms.empty()) {
    config.algorithms.clear();
    for (const auto& name : opts.algorithms) {
      config.algorithms.push_back(auth::parse_algorithm(name));
    }
  }
  auth::validate_config(config);
  return config;
}

int thread_count(const RunConfig& config) {
#ifdef _OPENMP
  if (config.jobs > 0) return static_cast<int>(config.jobs);
  return omp_get_max_threads();
#else
  (void)config;
  return 1;
#endif
}

struct Skip {
  std::string user_id;
  std::string stage;
  std::string reason;
};

void write_skips(const fs::path& path, const std::vector<Skip>& skips) {
  std::ofstream out(path, std::ios::binary);
  std::string body = "user_id,stage,reason\n";
  for (const auto& s : skips) {
    std::string reason = s.reason;
    std::replace(reason.begin(), reason.end(), ',', ';');
    std::replace(reason.begin(), reason.end(), '\n', ' ');
    body += s.user_id + ',' + s.stage + ',' + reason + '\n';
  }
  out << body;
}

std::vector<fs::path> list_trace_files(const std::string& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    if (!name.ends_with(".csv")) continue;
    if (name.ends_with("_truth.csv")) continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

struct PreparedPopulation {
  std::vector<auth::UserData> users;  // successfully prepared, input order
  std::vector<Skip> skips;
};

PreparedPopulation prepare_population(const std::vector<auth::AccelTrace>& traces,
                                      const RunConfig& config) {
  const std::size_t n = traces.size();
  std::vector<std::optional<auth::UserData>> slots(n);
  std::vector<std::string> errors(n);

  const int threads = thread_count(config);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::int64_t i = 0; i < count; ++i) {
    const auto u = static_cast<std::size_t>(i);
    try {
      slots[u] = auth::prepare_user_data(traces[u], config.eval);
    } catch (const std::exception& e) {
      errors[u] = e.what();
    }
  }

  PreparedPopulation out;
  for (std::size_t u = 0; u < n; ++u) {
    if (slots[u]) {
      out.users.push_back(std::move(*slots[u]));
    } else {
      out.skips.push_back({traces[u].user_id, "prepare", errors[u]});
    }
  }
  return out;
}

void write_clustering_csv(const fs::path& path,
                          const std::vector<auth::UserProfile>& profiles) {
  std::ofstream out(path, std::ios::binary);
  std::string body = "user_id,cluster,size,retained,context\n";
  for (const auto& profile : profiles) {
    const std::size_t k = profile.context.cluster_to_context.size();
    std::vector<std::size_t> counts(k, 0);
    for (int a : profile.context.clustering.assignments) {
      ++counts[static_cast<std::size_t>(a)];
    }
    for (std::size_t c = 0; c < k; ++c) {
      const int ctx = profile.context.cluster_to_context[c];
      body += profile.user_id + ',' + std::to_string(c) + ',' + std::to_string(counts[c]) + ',' +
              (ctx >= 0 ? "1" : "0") + ',' + std::to_string(ctx) + '\n';
    }
  }
  out << body;
}

struct EnrollOutcome {
  std::vector<auth::UserProfile> profiles;  // successful, input order
  std::vector<Skip> skips;
};

EnrollOutcome enroll_population(const std::vector<auth::UserData>& users,
                                const RunConfig& config) {
  const std::size_t n = users.size();
  std::vector<std::optional<auth::UserProfile>> slots(n);
  std::vector<std::string> errors(n);

  const int threads = thread_count(config);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::int64_t i = 0; i < count; ++i) {
    const auto u = static_cast<std::size_t>(i);
    try {
      std::vector<auth::UserData> impostors;
      impostors.reserve(n - 1);
      for (std::size_t v = 0; v < n; ++v) {
        if (v != u) impostors.push_back(users[v]);
      }
      slots[u] = auth::enroll_user(users[u], impostors, config.algorithms, config.eval,
                                   auth::derive_seed(config.seed, users[u].user_id));
    } catch (const std::exception& e) {
      errors[u] = e.what();
    }
  }

  EnrollOutcome out;
  for (std::size_t u = 0; u < n; ++u) {
    if (slots[u]) {
      out.profiles.push_back(std::move(*slots[u]));
    } else {
      out.skips.push_back({users[u].user_id, "enroll", errors[u]});
    }
  }
  return out;
}

struct EvaluateOutcome {
  std::vector<auth::EvalResult> results;
  std::vector<Skip> skips;
};

EvaluateOutcome evaluate_population(const std::vector<auth::UserProfile>& profiles,
                                    const std::vector<auth::UserData>& users,
                                    const RunConfig& config) {
  const std::size_t n = profiles.size();
  std::vector<std::vector<auth::EvalResult>> slots(n);
  std::vector<std::string> errors(n);
  std::vector<bool> failed(n, false);

  const int threads = thread_count(config);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::int64_t i = 0; i < count; ++i) {
    const auto p = static_cast<std::size_t>(i);
    try {
      const auto candidate =
          std::find_if(users.begin(), users.end(), [&](const auth::UserData& u) {
            return u.user_id == profiles[p].user_id;
          });
      if (candidate == users.end()) {
        throw Error(ErrorCode::FileNotFound, "no trace for profile user");
      }
      std::vector<auth::UserData> impostors;
      for (const auto& u : users) {
        if (u.user_id != profiles[p].user_id) impostors.push_back(u);
      }
      const auto test = auth::make_test_set(profiles[p], *candidate, impostors);
      slots[p] = auth::verify_and_score(profiles[p], test);
      if (slots[p].empty()) {
        failed[p] = true;
        errors[p] = "no context produced both genuine and impostor scores";
      }
    } catch (const std::exception& e) {
      failed[p] = true;
      errors[p] = e.what();
    }
  }

  EvaluateOutcome out;
  for (std::size_t p = 0; p < n; ++p) {
    if (failed[p]) {
      out.skips.push_back({profiles[p].user_id, "evaluate", errors[p]});
    } else {
      for (auto& r : slots[p]) out.results.push_back(std::move(r));
    }
  }
  return out;
}

// Users with a full row of per-algorithm EERs, for the paired tests.
std::pair<std::vector<std::vector<double>>, std::vector<std::string>> complete_rows(
    const auth::PopulationSummary& summary) {
  std::vector<std::vector<double>> matrix;
  std::vector<std::string> names;
  for (auth::Algorithm algo : summary.algorithms) names.push_back(auth::algorithm_name(algo));
  for (std::size_t u = 0; u < summary.users.size(); ++u) {
    bool complete = true;
    for (double v : summary.user_mean_eer[u]) {
      if (std::isnan(v)) complete = false;
    }
    if (complete) matrix.push_back(summary.user_mean_eer[u]);
  }
  return {matrix, names};
}

void write_comparison(const fs::path& path, const auth::PopulationSummary& summary) {
  const auto [matrix, names] = complete_rows(summary);
  if (matrix.size() < 2) {
    throw Error(ErrorCode::DegenerateMatrix,
                "need at least 2 users with complete results to compare");
  }
  const auto report = auth::compare_classifiers(matrix, names);
  auth::write_comparison_csv(path.string(), report);
}

void write_fte_outputs(const fs::path& dir, const auth::PopulationSummary& summary,
                       const RunConfig& config) {
  const auto report = auth::failure_to_enroll(summary, config.removal_fractions);
  auth::write_fte_summary_csv((dir / "fte_summary.csv").string(), report);
  for (const auto& step : report.steps) {
    const auto pct = static_cast<int>(std::lround(step.fraction * 100.0));
    for (std::size_t a = 0; a < report.algorithms.size(); ++a) {
      char name[64];
      std::snprintf(name, sizeof(name), "fte_cdf_%s_%02d.csv",
                    auth::algorithm_name(report.algorithms[a]), pct);
      auth::write_fte_cdf_csv((dir / name).string(), step, a);
    }
  }
}

void write_manifest(const fs::path& path, const RunConfig& config) {
  nlohmann::ordered_json manifest;
  manifest["tool"] = "authcli";
  manifest["version"] = kToolVersion;
  manifest["schema_version"] = 1;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  manifest["created_utc"] = stamp;
  manifest["seed"] = config.seed;
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(auth::config_hash(config)));
  manifest["config_hash"] = hash;
  manifest["config"] = nlohmann::ordered_json::parse(auth::config_to_json(config));
  std::ofstream out(path, std::ios::binary);
  out << manifest.dump(2) << '\n';
}

std::vector<std::vector<auth::GroundTruthRow>>& synth_truth_storage() {
  static std::vector<std::vector<auth::GroundTruthRow>> storage;
  return storage;
}

std::vector<auth::AccelTrace> synth_traces(const RunConfig& config) {
  const auto specs = auth::generate_population(config.synth_users, config.distinctiveness,
                                               config.seed, config.population);
  std::vector<auth::AccelTrace> traces;
  std::vector<std::vector<auth::GroundTruthRow>> truths;
  for (const auto& spec : specs) {
    auto result = auth::generate_trace(spec);
    traces.push_back(std::move(result.trace));
    truths.push_back(std::move(result.truth));
  }
  synth_truth_storage() = std::move(truths);
  return traces;
}

void save_population(const std::vector<auth::AccelTrace>& traces, const fs::path& dir) {
  fs::create_directories(dir);
  const auto& truths = synth_truth_storage();
  for (std::size_t i = 0; i < traces.size(); ++i) {
    auth::save_trace(traces[i], (dir / (traces[i].user_id + ".csv")).string());
    auth::save_ground_truth(truths[i], (dir / (traces[i].user_id + "_truth.csv")).string());
  }
}

int cmd_synth(const CommonOpts& opts) {
  const RunConfig config = resolve_config(opts);
  const auto traces = synth_traces(config);
  save_population(traces, opts.out_dir);
  std::cout << "[synth] wrote " << traces.size() << " traces to " << opts.out_dir << "\n";
  return 0;
}

int cmd_enroll(const CommonOpts& opts, const std::string& trace_dir, bool export_features) {
  const RunConfig config = resolve_config(opts);
  std::vector<auth::AccelTrace> traces;
  for (const auto& file : list_trace_files(trace_dir)) {
    traces.push_back(auth::load_trace(file.string()));
  }
  if (traces.empty()) throw Error(ErrorCode::FileNotFound, "no trace files in " + trace_dir);

  auto prepared = prepare_population(traces, config);
  auto outcome = enroll_population(prepared.users, config);

  const fs::path out(opts.out_dir);
  fs::create_directories(out);
  for (const auto& profile : outcome.profiles) {
    auth::save_profile(profile, (out / (profile.user_id + ".profile.json")).string());
  }
  if (export_features) {
    for (const auto& user : prepared.users) {
      auth::write_features_csv((out / (user.user_id + ".features.csv")).string(),
                               user.windows);
    }
  }
  write_clustering_csv(out / "clustering.csv", outcome.profiles);

  std::vector<Skip> skips = std::move(prepared.skips);
  skips.insert(skips.end(), outcome.skips.begin(), outcome.skips.end());
  write_skips(out / "skipped.csv", skips);
  for (const auto& s : skips) {
    std::cout << "[enroll] skipped " << s.user_id << " (" << s.stage << "): " << s.reason
              << "\n";
  }
  std::cout << "[enroll] wrote " << outcome.profiles.size() << " profiles to " << opts.out_dir
            << "\n";
  if (outcome.profiles.empty()) {
    throw Error(ErrorCode::EnrollmentFailure, "every user failed enrollment");
  }
  return 0;
}

int cmd_evaluate(const CommonOpts& opts, const std::string& profile_dir,
                 const std::string& trace_dir) {
  const RunConfig config = resolve_config(opts);

  std::vector<auth::UserProfile> profiles;
  std::vector<fs::path> profile_files;
  for (const auto& entry : fs::directory_iterator(profile_dir)) {
    if (entry.is_regular_file() && entry.path().filename().string().ends_with(".profile.json")) {
      profile_files.push_back(entry.path());
    }
  }
  std::sort(profile_files.begin(), profile_files.end());
  for (const auto& file : profile_files) profiles.push_back(auth::load_profile(file.string()));
  if (profiles.empty()) {
    throw Error(ErrorCode::FileNotFound, "no profiles in " + profile_dir);
  }

  std::vector<auth::AccelTrace> traces;
  for (const auto& file : list_trace_files(trace_dir)) {
    traces.push_back(auth::load_trace(file.string()));
  }
  auto prepared = prepare_population(traces, config);

  auto outcome = evaluate_population(profiles, prepared.users, config);
  const fs::path out(opts.out_dir);
  fs::create_directories(out);

  auth::write_results_csv((out / "results.csv").string(), outcome.results);
  auth::write_results_json((out / "results.json").string(), outcome.results);
  const auto summary = auth::aggregate(outcome.results);
  auth::write_summary_csv((out / "summary.csv").string(), summary);

  std::vector<Skip> skips = std::move(prepared.skips);
  skips.insert(skips.end(), outcome.skips.begin(), outcome.skips.end());
  write_skips(out / "skipped.csv", skips);
  for (const auto& s : skips) {
    std::cout << "[evaluate] skipped " << s.user_id << " (" << s.stage << "): " << s.reason
              << "\n";
  }
  std::cout << "[evaluate] " << outcome.results.size() << " (user, context, algorithm) results\n";
  return 0;
}

int cmd_compare(const CommonOpts& opts, const std::string& summary_path) {
  resolve_config(opts);
  const auto summary = auth::read_summary_csv(summary_path);
  const fs::path out(opts.out_dir);
  fs::create_directories(out);
  write_comparison(out / "comparison.csv", summary);
  std::cout << "[compare] wrote " << (out / "comparison.csv").string() << "\n";
  return 0;
}

int cmd_fte(const CommonOpts& opts, const std::string& summary_path) {
  const RunConfig config = resolve_config(opts);
  const auto summary = auth::read_summary_csv(summary_path);
  const fs::path out(opts.out_dir);
  fs::create_directories(out);
  write_fte_outputs(out, summary, config);
  std::cout << "[fte] wrote FTE summary and CDF tables to " << opts.out_dir << "\n";
  return 0;
}

int cmd_run_all(const CommonOpts& opts, std::string run_name) {
  const RunConfig config = resolve_config(opts);

  if (run_name.empty()) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", std::gmtime(&now));
    run_name = std::string("run_") + stamp + "_" + std::to_string(config.seed);
  }
  fs::path run_dir = fs::path(opts.out_dir) / run_name;
  for (int suffix = 2; fs::exists(run_dir); ++suffix) {
    run_dir = fs::path(opts.out_dir) / (run_name + "_" + std::to_string(suffix));
  }
  fs::create_directories(run_dir);
  write_manifest(run_dir / "manifest.json", config);

  const auto traces = synth_traces(config);
  save_population(traces, run_dir / "traces");
  std::cout << "[run-all] generated " << traces.size() << " traces\n";

  auto prepared = prepare_population(traces, config);
  auto enrollment = enroll_population(prepared.users, config);
  const fs::path profile_dir = run_dir / "profiles";
  fs::create_directories(profile_dir);
  for (const auto& profile : enrollment.profiles) {
    auth::save_profile(profile, (profile_dir / (profile.user_id + ".profile.json")).string());
  }
  write_clustering_csv(run_dir / "clustering.csv", enrollment.profiles);
  std::cout << "[run-all] enrolled " << enrollment.profiles.size() << "/" << traces.size()
            << " users\n";

  auto evaluation = evaluate_population(enrollment.profiles, prepared.users, config);

  std::vector<Skip> skips = std::move(prepared.skips);
  skips.insert(skips.end(), enrollment.skips.begin(), enrollment.skips.end());
  skips.insert(skips.end(), evaluation.skips.begin(), evaluation.skips.end());
  write_skips(run_dir / "skipped.csv", skips);
  for (const auto& s : skips) {
    std::cout << "[run-all] skipped " << s.user_id << " (" << s.stage << "): " << s.reason
              << "\n";
  }

  auth::write_results_csv((run_dir / "results.csv").string(), evaluation.results);
  auth::write_results_json((run_dir / "results.json").string(), evaluation.results);
  const auto summary = auth::aggregate(evaluation.results);
  auth::write_summary_csv((run_dir / "summary.csv").string(), summary);
  write_comparison(run_dir / "comparison.csv", summary);
  write_fte_outputs(run_dir, summary, config);

  std::cout << "[run-all] report bundle in " << run_dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"context-aware continuous authentication pipeline"};
  app.require_subcommand(1);

  CommonOpts synth_opts;
  auto* synth = app.add_subcommand("synth", "generate a synthetic trace population");
  add_common(synth, synth_opts);

  CommonOpts enroll_opts;
  std::string enroll_traces;
  bool export_features = false;
  auto* enroll = app.add_subcommand("enroll", "train per-user profiles from traces");
  add_common(enroll, enroll_opts);
  enroll->add_option("--traces", enroll_traces, "directory of trace CSVs")->required();
  enroll->add_flag("--export-features", export_features, "also write per-user feature CSVs");

  CommonOpts eval_opts;
  std::string eval_profiles;
  std::string eval_traces;
  auto* evaluate = app.add_subcommand("evaluate", "score test windows against profiles");
  add_common(evaluate, eval_opts);
  evaluate->add_option("--profiles", eval_profiles, "directory of profile JSON files")
      ->required();
  evaluate->add_option("--traces", eval_traces, "directory of trace CSVs")->required();

  CommonOpts compare_opts;
  std::string compare_summary;
  auto* compare = app.add_subcommand("compare", "pairwise statistical comparison of algorithms");
  add_common(compare, compare_opts);
  compare->add_option("--summary", compare_summary, "summary.csv from evaluate")->required();

  CommonOpts fte_opts;
  std::string fte_summary;
  auto* fte = app.add_subcommand("fte", "failure-to-enroll analysis");
  add_common(fte, fte_opts);
  fte->add_option("--summary", fte_summary, "summary.csv from evaluate")->required();

  CommonOpts runall_opts;
  std::string run_name;
  auto* runall = app.add_subcommand("run-all", "synth + enroll + evaluate + compare + fte");
  add_common(runall, runall_opts);
  runall->add_option("--run-name", run_name, "run directory name (default: timestamp + seed)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth) return cmd_synth(synth_opts);
    if (*enroll) return cmd_enroll(enroll_opts, enroll_traces, export_features);
    if (*evaluate) return cmd_evaluate(eval_opts, eval_profiles, eval_traces);
    if (*compare) return cmd_compare(compare_opts, compare_summary);
    if (*fte) return cmd_fte(fte_opts, fte_summary);
    if (*runall) return cmd_run_all(runall_opts, run_name);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    const bool validation =
        e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::InvalidSpec;
    return validation ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
