#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "auth/context.hpp"
#include "auth/features.hpp"
#include "auth/forest.hpp"
#include "auth/rng.hpp"
#include "auth/synthgen.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using clock_type = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int repeat) {
  double best = 1e300;
  for (int r = 0; r < repeat; ++r) {
    const auto t0 = clock_type::now();
    fn();
    const auto t1 = clock_type::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

bool same_features(const std::vector<auth::WindowFeatures>& a,
                   const std::vector<auth::WindowFeatures>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].start_ms != b[i].start_ms || a[i].values != b[i].values) return false;
  }
  return true;
}

bool same_kmeans(const auth::KmeansResult& a, const auth::KmeansResult& b) {
  return a.centroids == b.centroids && a.assignments == b.assignments &&
         a.inertia == b.inertia && a.iterations == b.iterations;
}

bool same_forest(const auth::RandomForest& a, const auth::RandomForest& b) {
  if (a.trees.size() != b.trees.size()) return false;
  for (std::size_t t = 0; t < a.trees.size(); ++t) {
    const auto& ta = a.trees[t].nodes;
    const auto& tb = b.trees[t].nodes;
    if (ta.size() != tb.size()) return false;
    for (std::size_t n = 0; n < ta.size(); ++n) {
      if (ta[n].feature != tb[n].feature || ta[n].threshold != tb[n].threshold ||
          ta[n].left != tb[n].left || ta[n].right != tb[n].right ||
          ta[n].label != tb[n].label) {
        return false;
      }
    }
  }
  return true;
}

void report(const char* kernel, double serial_ms, double parallel_ms, bool match) {
  std::printf("%-18s serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx   %s\n", kernel,
              serial_ms, parallel_ms, serial_ms / parallel_ms, match ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  std::uint64_t seed = 42;
  int repeat = 3;
  std::int64_t duration_min = 60;
  CLI::App app{"serial vs OpenMP kernel benchmark"};
  app.add_option("--seed", seed, "rng seed");
  app.add_option("--repeat", repeat, "timing repetitions, best of N");
  app.add_option("--minutes", duration_min, "synthetic trace length in minutes");
  CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP: not available, both columns run serial code\n");
#endif

  auth::PopulationParams pop;
  pop.total_duration_ms = duration_min * 60000;
  const auto specs = auth::generate_population(2, 0.8, seed, pop);
  const auto synth = auth::generate_trace(specs[0]);
  const auto windows = auth::window_trace(synth.trace);
  std::printf("input: %zu samples, %zu windows\n", synth.trace.samples.size(), windows.size());

  bool all_match = true;

  std::vector<auth::WindowFeatures> feat_serial, feat_parallel;
  const double fs = time_ms([&] { feat_serial = auth::extract_features_all_serial(windows); },
                            repeat);
  const double fp = time_ms([&] { feat_parallel = auth::extract_features_all(windows); }, repeat);
  const bool fmatch = same_features(feat_serial, feat_parallel);
  all_match = all_match && fmatch;
  report("features", fs, fp, fmatch);

  std::vector<std::vector<double>> vectors;
  for (const auto& f : feat_parallel) vectors.push_back(f.values);
  auth::KmeansParams kp;
  kp.k = 8;
  auth::KmeansResult km_serial, km_parallel;
  const double ks = time_ms([&] { km_serial = auth::kmeans_serial(vectors, kp, seed); }, repeat);
  const double kpms = time_ms([&] { km_parallel = auth::kmeans(vectors, kp, seed); }, repeat);
  const bool kmatch = same_kmeans(km_serial, km_parallel);
  all_match = all_match && kmatch;
  report("kmeans", ks, kpms, kmatch);

  std::vector<int> labels(vectors.size());
  auth::Rng label_rng(auth::derive_seed(seed, "bench-labels"));
  for (auto& y : labels) y = label_rng.uniform() < 0.5 ? 0 : 1;
  auth::ForestParams fparams;
  auth::RandomForest rf_serial, rf_parallel;
  const double rs = time_ms(
      [&] { rf_serial = auth::train_forest_serial(vectors, labels, 2, fparams, seed); }, repeat);
  const double rp = time_ms(
      [&] { rf_parallel = auth::train_forest(vectors, labels, 2, fparams, seed); }, repeat);
  const bool rmatch = same_forest(rf_serial, rf_parallel);
  all_match = all_match && rmatch;
  report("forest", rs, rp, rmatch);

  return all_match ? 0 : 1;
}
