#include "auth/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>

#include "auth/error.hpp"
#include "auth/strfmt.hpp"

namespace auth {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Ranks 1..n with ties sharing the mean of their positions.
std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = shared;
    i = j + 1;
  }
  return ranks;
}

double gamma_ln(double x) {
  static const double cof[6] = {76.18009172947146,     -86.50532032941677,
                                24.01409824083091,     -1.231739572450155,
                                0.1208650973866179e-2, -0.5395239384953e-5};
  double y = x;
  double tmp = x + 5.5;
  tmp -= (x + 0.5) * std::log(tmp);
  double ser = 1.000000000190015;
  for (int j = 0; j < 6; ++j) ser += cof[j] / ++y;
  return -tmp + std::log(2.5066282746310005 * ser / x);
}

// Lower regularized incomplete gamma by series, valid for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int it = 0; it < 1000; ++it) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-14) break;
  }
  return sum * std::exp(-x + a * std::log(x) - gamma_ln(a));
}

// Upper regularized incomplete gamma by Lentz continued fraction, x >= a + 1.
double gamma_q_cf(double a, double x) {
  const double fpmin = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / fpmin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-14) break;
  }
  return std::exp(-x + a * std::log(x) - gamma_ln(a)) * h;
}

}  // namespace

double erf_approx(double x) {
  // The polynomial's coefficients sum to 1 - 1e-9, so x = 0 needs its exact value.
  if (x == 0.0) return x;
  const double sign = x < 0.0 ? -1.0 : 1.0;
  const double ax = std::fabs(x);
  const double t = 1.0 / (1.0 + 0.3275911 * ax);
  const double poly =
      t * (0.254829592 +
           t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
  return sign * (1.0 - poly * std::exp(-ax * ax));
}

double normal_cdf(double x) { return 0.5 * (1.0 + erf_approx(x * kInvSqrt2)); }

double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  const double a2 = -2.0 * lambda * lambda;
  double fac = 2.0;
  double sum = 0.0;
  double prev_term = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = fac * std::exp(a2 * static_cast<double>(j) * static_cast<double>(j));
    sum += term;
    if (std::fabs(term) <= 0.001 * prev_term || std::fabs(term) <= 1e-12 * std::fabs(sum)) {
      return std::clamp(sum, 0.0, 1.0);
    }
    fac = -fac;
    prev_term = std::fabs(term);
  }
  return 1.0;  // series failed to converge, only happens for tiny lambda
}

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw Error(ErrorCode::InvalidSpec, "gamma_q domain");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi2_sf(double x, double df) {
  if (df <= 0.0) throw Error(ErrorCode::InvalidSpec, "chi2_sf needs df > 0");
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * df, 0.5 * x);
}

TestOutcome ks_test_standard_normal(std::span<const double> samples) {
  if (samples.empty()) throw Error(ErrorCode::EmptySample, "ks test on empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double cdf = normal_cdf(sorted[i]);
    const double hi = static_cast<double>(i + 1) / n - cdf;
    const double lo = cdf - static_cast<double>(i) / n;
    d = std::max({d, std::fabs(hi), std::fabs(lo)});
  }
  const double sqrt_n = std::sqrt(n);
  const double lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
  TestOutcome out;
  out.statistic = d;
  out.p_value = kolmogorov_sf(lambda);
  out.method = "ks";
  out.n = sorted.size();
  return out;
}

TestOutcome friedman_test(const std::vector<std::vector<double>>& matrix) {
  const std::size_t n = matrix.size();
  if (n < 2) throw Error(ErrorCode::DegenerateMatrix, "friedman needs at least 2 blocks");
  const std::size_t k = matrix[0].size();
  if (k < 2) throw Error(ErrorCode::DegenerateMatrix, "friedman needs at least 2 treatments");
  for (const auto& row : matrix) {
    if (row.size() != k) throw Error(ErrorCode::DegenerateMatrix, "ragged matrix");
  }

  std::vector<double> rank_sum(k, 0.0);
  double tie_sum = 0.0;  // sum over rows of sum(t^3 - t) per tie group
  for (const auto& row : matrix) {
    const auto ranks = midranks(row);
    for (std::size_t j = 0; j < k; ++j) rank_sum[j] += ranks[j];
    std::vector<double> sorted(row);
    std::sort(sorted.begin(), sorted.end());
    std::size_t i = 0;
    while (i < k) {
      std::size_t j = i;
      while (j + 1 < k && sorted[j + 1] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i + 1);
      tie_sum += t * t * t - t;
      i = j + 1;
    }
  }

  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  double rank_sq = 0.0;
  for (double r : rank_sum) rank_sq += r * r;
  const double uncorrected = 12.0 / (nd * kd * (kd + 1.0)) * rank_sq - 3.0 * nd * (kd + 1.0);
  const double correction = 1.0 - tie_sum / (nd * kd * (kd * kd - 1.0));
  if (correction <= 0.0) {
    throw Error(ErrorCode::DegenerateMatrix, "every block fully tied");
  }

  TestOutcome out;
  out.statistic = std::max(uncorrected / correction, 0.0);
  out.p_value = chi2_sf(out.statistic, kd - 1.0);
  out.method = "friedman";
  out.n = n;
  out.k = k;
  return out;
}

TestOutcome wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::LengthMismatch, "paired samples differ in length");
  }
  if (a.empty()) throw Error(ErrorCode::EmptySample, "wilcoxon on empty sample");

  std::vector<double> diffs;
  diffs.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) diffs.push_back(d);
  }
  if (diffs.empty()) {
    throw Error(ErrorCode::AllZeroDifferences, "all paired differences are zero");
  }

  const std::size_t n = diffs.size();
  std::vector<double> abs_d(n);
  for (std::size_t i = 0; i < n; ++i) abs_d[i] = std::fabs(diffs[i]);
  const auto ranks = midranks(abs_d);

  double w_plus = 0.0;
  double w_minus = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (diffs[i] > 0.0) {
      w_plus += ranks[i];
    } else {
      w_minus += ranks[i];
    }
  }
  const double w = std::min(w_plus, w_minus);

  TestOutcome out;
  out.statistic = w;
  out.n = n;

  if (n <= 12) {
    // Exact two-sided p: count sign assignments whose min(W+, W-) is at
    // least as extreme as the observed one.
    const double total = std::accumulate(ranks.begin(), ranks.end(), 0.0);
    const std::uint64_t patterns = std::uint64_t{1} << n;
    std::uint64_t hits = 0;
    for (std::uint64_t mask = 0; mask < patterns; ++mask) {
      double plus = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (std::uint64_t{1} << i)) plus += ranks[i];
      }
      const double stat = std::min(plus, total - plus);
      if (stat <= w + 1e-9) ++hits;
    }
    out.p_value = static_cast<double>(hits) / static_cast<double>(patterns);
    out.method = "wilcoxon-exact";
    return out;
  }

  const double nd = static_cast<double>(n);
  const double mu = nd * (nd + 1.0) / 4.0;
  double tie_sum = 0.0;
  std::vector<double> sorted(abs_d);
  std::sort(sorted.begin(), sorted.end());
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    tie_sum += t * t * t - t;
    i = j + 1;
  }
  const double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_sum / 48.0;
  if (var <= 0.0) {
    out.p_value = 1.0;
    out.method = "wilcoxon-normal";
    return out;
  }
  // W <= mu by construction, so the continuity correction moves toward mu.
  const double z = (w - mu + 0.5) / std::sqrt(var);
  out.p_value = std::clamp(2.0 * normal_cdf(z), 0.0, 1.0);
  out.method = "wilcoxon-normal";
  return out;
}

ComparisonReport compare_classifiers(const std::vector<std::vector<double>>& eer_matrix,
                                     const std::vector<std::string>& algorithm_names) {
  const std::size_t k = algorithm_names.size();
  if (k < 2) throw Error(ErrorCode::DegenerateMatrix, "need at least 2 algorithms");
  for (const auto& row : eer_matrix) {
    if (row.size() != k) throw Error(ErrorCode::DegenerateMatrix, "ragged eer matrix");
  }

  ComparisonReport report;
  try {
    report.omnibus_friedman = friedman_test(eer_matrix);
    report.omnibus_valid = true;
  } catch (const Error&) {
    report.omnibus_valid = false;
  }

  const std::size_t n = eer_matrix.size();
  for (std::size_t ia = 0; ia < k; ++ia) {
    for (std::size_t ib = ia + 1; ib < k; ++ib) {
      PairComparison pair;
      pair.algo_a = algorithm_names[ia];
      pair.algo_b = algorithm_names[ib];

      std::vector<double> col_a(n), col_b(n), diffs(n);
      for (std::size_t u = 0; u < n; ++u) {
        col_a[u] = eer_matrix[u][ia];
        col_b[u] = eer_matrix[u][ib];
        diffs[u] = col_a[u] - col_b[u];
      }

      try {
        if (n < 2) throw Error(ErrorCode::EmptySample, "too few users to standardize");
        double mean = std::accumulate(diffs.begin(), diffs.end(), 0.0) / static_cast<double>(n);
        double ss = 0.0;
        for (double d : diffs) ss += (d - mean) * (d - mean);
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        std::vector<double> standardized(n, 0.0);
        if (sd > 0.0) {
          for (std::size_t u = 0; u < n; ++u) standardized[u] = (diffs[u] - mean) / sd;
        }
        pair.ks_normality = ks_test_standard_normal(standardized);
      } catch (const Error& e) {
        pair.note += std::string("ks: ") + error_code_name(e.code()) + "; ";
      }

      try {
        std::vector<std::vector<double>> sub(n, std::vector<double>(2));
        for (std::size_t u = 0; u < n; ++u) {
          sub[u][0] = col_a[u];
          sub[u][1] = col_b[u];
        }
        pair.friedman = friedman_test(sub);
      } catch (const Error& e) {
        pair.note += std::string("friedman: ") + error_code_name(e.code()) + "; ";
      }

      try {
        pair.wilcoxon = wilcoxon_signed_rank(col_a, col_b);
      } catch (const Error& e) {
        pair.note += std::string("wilcoxon: ") + error_code_name(e.code()) + "; ";
      }

      report.pairs.push_back(std::move(pair));
    }
  }
  return report;
}

void write_comparison_csv(const std::string& path, const ComparisonReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::SerializationError, "cannot open " + path);

  std::string body = "algo_a,algo_b,test,statistic,p_value,method,n,note\n";
  auto add_row = [&body](const std::string& a, const std::string& b, const std::string& test,
                         const TestOutcome& t, const std::string& note) {
    body += a;
    body += ',';
    body += b;
    body += ',';
    body += test;
    body += ',';
    append_double(body, t.statistic);
    body += ',';
    append_double(body, t.p_value);
    body += ',';
    body += t.method;
    body += ',';
    body += std::to_string(t.n);
    body += ',';
    body += note;
    body += '\n';
  };

  if (report.omnibus_valid) {
    add_row("*", "*", "friedman-omnibus", report.omnibus_friedman, "");
  }
  for (const auto& p : report.pairs) {
    add_row(p.algo_a, p.algo_b, "ks-normality", p.ks_normality, p.note);
    add_row(p.algo_a, p.algo_b, "friedman", p.friedman, p.note);
    add_row(p.algo_a, p.algo_b, "wilcoxon", p.wilcoxon, p.note);
  }
  out << body;
  if (!out) throw Error(ErrorCode::SerializationError, "write failed for " + path);
}

}  // namespace auth
