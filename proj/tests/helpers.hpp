#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "auth/rng.hpp"
#include "auth/trace.hpp"

namespace testutil {

// Scratch directory removed when the guard leaves scope.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("motionauth_" + tag + "_" + std::to_string(++counter) + "_" +
             std::to_string(static_cast<std::uint64_t>(
                 std::chrono::steady_clock::now().time_since_epoch().count())));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

// O(N^2) transform straight from the definition, as a check on the fft.
inline std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> sum{0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j) {
      const double angle = -2.0 * 3.14159265358979323846 * static_cast<double>(j) *
                           static_cast<double>(k) / static_cast<double>(n);
      sum += x[j] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[k] = sum;
  }
  return out;
}

// Memoized recursion straight from the alignment definition.
inline double naive_dtw(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> memo(n + 1, std::vector<double>(m + 1, -1.0));

  auto rec = [&](auto&& self, std::size_t i, std::size_t j) -> double {
    if (i == 0 && j == 0) return 0.0;
    if (i == 0 || j == 0) return inf;
    double& slot = memo[i][j];
    if (slot >= 0.0) return slot;
    const double cost = std::abs(a[i - 1] - b[j - 1]);
    const double best =
        std::min({self(self, i - 1, j), self(self, i, j - 1), self(self, i - 1, j - 1)});
    slot = cost + best;
    return slot;
  };
  return rec(rec, n, m);
}

struct OracleEer {
  double eer = 0.0;
  double threshold = 0.0;
  double far = 0.0;
  double frr = 0.0;
};

// Direct counting sweep over -inf, every distinct score, +inf.
inline OracleEer oracle_eer(std::vector<double> genuine, std::vector<double> impostor) {
  std::vector<double> thresholds;
  thresholds.push_back(-std::numeric_limits<double>::infinity());
  std::vector<double> all = genuine;
  all.insert(all.end(), impostor.begin(), impostor.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  thresholds.insert(thresholds.end(), all.begin(), all.end());
  thresholds.push_back(std::numeric_limits<double>::infinity());

  OracleEer best;
  double best_diff = std::numeric_limits<double>::infinity();
  for (double t : thresholds) {
    std::size_t fa = 0;
    for (double s : impostor) {
      if (s >= t) ++fa;
    }
    std::size_t fr = 0;
    for (double s : genuine) {
      if (s < t) ++fr;
    }
    const double far = static_cast<double>(fa) / static_cast<double>(impostor.size());
    const double frr = static_cast<double>(fr) / static_cast<double>(genuine.size());
    if (std::fabs(far - frr) < best_diff) {
      best_diff = std::fabs(far - frr);
      best = {0.5 * (far + frr), t, far, frr};
    }
  }
  return best;
}

// Exact two-sided signed-rank p via the distribution of W+ built by
// convolution over doubled (integer) midranks.
inline double oracle_wilcoxon_exact_p(const std::vector<double>& ranks, double w_observed) {
  std::map<long long, long long> dist;
  dist[0] = 1;
  long long total2 = 0;
  for (double r : ranks) {
    const auto r2 = static_cast<long long>(std::llround(2.0 * r));
    total2 += r2;
    std::map<long long, long long> next;
    for (const auto& [value, count] : dist) {
      next[value] += count;
      next[value + r2] += count;
    }
    dist = std::move(next);
  }
  const auto w2 = static_cast<long long>(std::llround(2.0 * w_observed));
  long long hits = 0;
  long long patterns = 0;
  for (const auto& [value, count] : dist) {
    patterns += count;
    if (std::min(value, total2 - value) <= w2) hits += count;
  }
  return static_cast<double>(hits) / static_cast<double>(patterns);
}

// Gaussian blobs around the given centers, `per_center` points each.
inline std::vector<std::vector<double>> make_blobs(
    const std::vector<std::vector<double>>& centers, std::size_t per_center, double spread,
    std::uint64_t seed) {
  auth::Rng rng(seed);
  std::vector<std::vector<double>> out;
  for (const auto& c : centers) {
    for (std::size_t i = 0; i < per_center; ++i) {
      std::vector<double> v(c.size());
      for (std::size_t d = 0; d < c.size(); ++d) v[d] = c[d] + spread * rng.gauss();
      out.push_back(std::move(v));
    }
  }
  return out;
}

// Uniformly spaced trace with constant axis values, `rate_hz` samples/s.
inline auth::AccelTrace flat_trace(const std::string& user, double x, double y, double z,
                                   std::int64_t duration_ms, double rate_hz = 20.0,
                                   bool screen = true) {
  auth::AccelTrace trace;
  trace.user_id = user;
  trace.nominal_rate_hz = rate_hz;
  const auto dt = static_cast<std::int64_t>(1000.0 / rate_hz);
  for (std::int64_t t = 0; t < duration_ms; t += dt) {
    trace.samples.push_back({t, x, y, z, screen});
  }
  return trace;
}

}  // namespace testutil
