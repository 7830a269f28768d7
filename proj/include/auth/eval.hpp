#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "auth/classifiers.hpp"
#include "auth/context.hpp"
#include "auth/features.hpp"
#include "auth/preprocess.hpp"

namespace auth {

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
  double far = 0.0;
  double frr = 0.0;
};

// Threshold sweep over all distinct scores plus +-infinity. FAR(t) is the
// fraction of impostor scores >= t, FRR(t) the fraction of genuine scores
// < t; the reported EER is (FAR+FRR)/2 at the threshold minimizing
// |FAR-FRR|, smallest threshold on ties.
EerResult compute_eer(std::span<const double> genuine, std::span<const double> impostor);

struct EvalConfig {
  UnattendedThresholds unattended;
  int median_span = 3;
  FeatureParams features;
  ContextParams context;
  ClassifierParams classifier;
  std::size_t min_windows = 20;   // enrollment gate on usable windows
  std::size_t impostor_cap = 0;   // per-context training cap, 0 = match genuine count
};

// One user's trace reduced to chronological feature windows, computed once
// and shared between the candidate and impostor roles.
struct UserData {
  std::string user_id;
  std::vector<WindowFeatures> windows;
};

UserData prepare_user_data(const AccelTrace& trace, const EvalConfig& config);

struct ContextEnrollment {
  bool trained = false;
  FeatureSubset subset;
  std::vector<AuthModel> models;  // parallel to UserProfile::algorithms
  std::size_t genuine_train_count = 0;
  std::size_t impostor_train_count = 0;
};

struct UserProfile {
  std::string user_id;
  std::uint64_t seed = 0;
  std::vector<Algorithm> algorithms;
  MinMaxNormalizer normalizer;
  ContextModel context;
  std::vector<ContextEnrollment> contexts;  // one per retained context
  std::size_t train_window_count = 0;       // chronological split point
  std::size_t total_window_count = 0;
  std::vector<std::string> impostor_train_users;
  bool reused_impostors = false;  // impostor test pool overlaps the training pool
};

// Chronological 50/50 split of the candidate's windows; the training half
// fits the normalizer, context model, per-context feature subsets and one
// model per algorithm. Impostor users are split into disjoint training and
// test pools when at least two are available.
UserProfile enroll_user(const UserData& candidate, const std::vector<UserData>& impostors,
                        const std::vector<Algorithm>& algorithms, const EvalConfig& config,
                        std::uint64_t seed);

struct EvalResult {
  std::string user_id;
  int context = 0;  // index into the profile's retained contexts
  Algorithm algorithm = Algorithm::kLogReg;
  std::vector<double> genuine_scores;
  std::vector<double> impostor_scores;
  double eer = 0.0;
  double threshold_at_eer = 0.0;
  bool reused_impostors = false;
};

struct TestSet {
  std::vector<WindowFeatures> candidate;               // candidate's test half
  std::vector<std::vector<WindowFeatures>> impostors;  // per test-pool user
  bool reused_impostors = false;
};

// Builds the candidate's test half and the impostor test pool recorded in the
// profile. Impostor windows reuse training-pool users only when no disjoint
// user is available, in which case the reuse flag is set and only those
// users' test halves are taken.
TestSet make_test_set(const UserProfile& profile, const UserData& candidate,
                      const std::vector<UserData>& impostors);

// Routes every test window through the CIM, scores it with the context's
// models, and computes one EER per (context, algorithm). Contexts without a
// trained model fall back to the nearest trained centroid; contexts that end
// up with an empty genuine or impostor score list are omitted.
std::vector<EvalResult> verify_and_score(const UserProfile& profile, const TestSet& test);

struct PopulationSummary {
  std::vector<std::string> users;
  std::vector<Algorithm> algorithms;
  // users x algorithms; cell is the unweighted mean over that user's
  // evaluated contexts, NaN when the user has none for that algorithm.
  std::vector<std::vector<double>> user_mean_eer;
  std::vector<std::vector<std::size_t>> user_context_counts;
  std::vector<double> population_mean;  // per algorithm, over users with data
  std::vector<double> population_std;   // sample standard deviation
};

PopulationSummary aggregate(const std::vector<EvalResult>& results);

// Reference population mean EERs for LOGREG, MLP, KNN, SVM, RF measured on a
// real 57-user deployment; useful for ranking context, not as reproduction
// targets, since that dataset is private.
inline constexpr double kReferenceMeanEer[5] = {0.137, 0.135, 0.121, 0.107, 0.056};

struct FteStep {
  double fraction = 0.0;
  std::size_t removed = 0;
  std::vector<std::string> removed_users;
  std::vector<double> population_mean;  // per algorithm
  std::vector<double> population_std;
  // Per algorithm: (eer, cumulative fraction of users) sorted by eer.
  std::vector<std::vector<std::pair<double, double>>> cdf;
};

struct FteReport {
  std::vector<Algorithm> algorithms;
  std::vector<FteStep> steps;  // fraction 0 baseline first, then the requested fractions
};

// Ranks users by mean EER averaged across algorithms and removes the worst
// ceil(fraction * n) for each requested fraction.
FteReport failure_to_enroll(const PopulationSummary& summary, std::span<const double> fractions);

// Rebuilds a PopulationSummary from a summary CSV; context counts are not
// stored in the file, so cells read back as count 1 (0 when empty).
PopulationSummary read_summary_csv(const std::string& path);

void write_results_csv(const std::string& path, const std::vector<EvalResult>& results);
void write_results_json(const std::string& path, const std::vector<EvalResult>& results);
void write_summary_csv(const std::string& path, const PopulationSummary& summary);
void write_fte_summary_csv(const std::string& path, const FteReport& report);
void write_fte_cdf_csv(const std::string& path, const FteStep& step, std::size_t algo_index);

}  // namespace auth
