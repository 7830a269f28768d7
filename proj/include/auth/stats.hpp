#pragma once

#include <span>
#include <string>
#include <vector>

namespace auth {

struct TestOutcome {
  double statistic = 0.0;
  double p_value = 1.0;
  std::string method;
  std::size_t n = 0;
  std::size_t k = 0;
};

// Rational approximation of erf with max error <= 1.5e-7; hand-rolled so
// results are bit-stable across libm versions.
double erf_approx(double x);

double normal_cdf(double x);

// Survival function of the Kolmogorov distribution,
// Q(lambda) = 2 * sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
double kolmogorov_sf(double lambda);

// Regularized upper incomplete gamma Q(a, x), series/continued-fraction.
double gamma_q(double a, double x);

// Chi-square survival function with df degrees of freedom.
double chi2_sf(double x, double df);

// One-sample KS test against the standard normal.
// D = sup over sorted samples of max(|i/n - Phi(x_i)|, |(i-1)/n - Phi(x_i)|);
// p from the asymptotic Kolmogorov distribution with
// lambda = (sqrt(n) + 0.12 + 0.11/sqrt(n)) * D.
TestOutcome ks_test_standard_normal(std::span<const double> samples);

// Friedman test on an n-blocks x k-treatments matrix, midranks for ties,
// standard tie correction, p from chi-square with k-1 df.
TestOutcome friedman_test(const std::vector<std::vector<double>>& matrix);

// Wilcoxon signed-rank test on paired samples. Zero differences dropped,
// midranks for ties, W = min(W+, W-). Exact two-sided p by full sign
// enumeration for effective n <= 12, else normal approximation with
// continuity correction and tie-adjusted variance.
TestOutcome wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

struct PairComparison {
  std::string algo_a;
  std::string algo_b;
  TestOutcome ks_normality;  // KS on the standardized paired differences
  TestOutcome friedman;
  TestOutcome wilcoxon;
  std::string note;  // non-empty when a sub-test could not run
};

struct ComparisonReport {
  std::vector<PairComparison> pairs;      // one row per unordered pair
  TestOutcome omnibus_friedman;           // single test across all algorithms
  bool omnibus_valid = false;
};

// eer_matrix rows are users, columns are algorithms. Sub-test failures are
// recorded per pair without aborting the report.
ComparisonReport compare_classifiers(const std::vector<std::vector<double>>& eer_matrix,
                                     const std::vector<std::string>& algorithm_names);

void write_comparison_csv(const std::string& path, const ComparisonReport& report);

}  // namespace auth
