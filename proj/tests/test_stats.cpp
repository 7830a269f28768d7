#include <algorithm>
#include <cmath>
#include <vector>

#include "auth/error.hpp"
#include "auth/rng.hpp"
#include "auth/stats.hpp"
#include "doctest.h"
#include "helpers.hpp"

using auth::Error;
using auth::ErrorCode;
using auth::Rng;
using auth::TestOutcome;

TEST_CASE("erf approximation stays within its stated error bound") {
  // Reference values to 12 digits.
  CHECK(auth::erf_approx(0.0) == 0.0);
  CHECK(std::fabs(auth::erf_approx(0.5) - 0.520499877813) <= 3e-7);
  CHECK(std::fabs(auth::erf_approx(1.0) - 0.842700792950) <= 3e-7);
  CHECK(std::fabs(auth::erf_approx(1.5) - 0.966105146475) <= 3e-7);
  CHECK(std::fabs(auth::erf_approx(2.0) - 0.995322265019) <= 3e-7);
  // Odd by construction.
  CHECK(auth::erf_approx(-1.3) == -auth::erf_approx(1.3));
}

TEST_CASE("normal cdf reference points") {
  CHECK(auth::normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::fabs(auth::normal_cdf(1.0) - 0.841344746069) <= 2e-7);
  CHECK(std::fabs(auth::normal_cdf(-1.0) - 0.158655253931) <= 2e-7);
  CHECK(std::fabs(auth::normal_cdf(1.959963985) - 0.975) <= 2e-7);
  CHECK(std::fabs(auth::normal_cdf(2.5) - 0.993790334674) <= 2e-7);
}

TEST_CASE("kolmogorov survival function reference points") {
  CHECK(std::fabs(auth::kolmogorov_sf(0.5) - 0.96394524366488) <= 1e-10);
  CHECK(std::fabs(auth::kolmogorov_sf(1.0) - 0.26999967167735) <= 1e-10);
  CHECK(std::fabs(auth::kolmogorov_sf(1.36) - 0.04948587675538) <= 1e-10);
  CHECK(std::fabs(auth::kolmogorov_sf(2.0) - 0.00067092525578) <= 1e-10);
  CHECK(auth::kolmogorov_sf(0.0) == 1.0);
  CHECK(auth::kolmogorov_sf(8.0) == doctest::Approx(0.0).epsilon(1e-30));
}

TEST_CASE("chi-square survival function reference points") {
  CHECK(auth::chi2_sf(8.0, 2) == doctest::Approx(std::exp(-4.0)).epsilon(1e-10));
  CHECK(auth::chi2_sf(5.0, 3) == doctest::Approx(0.17179714429673).epsilon(1e-8));
  CHECK(auth::chi2_sf(10.2, 4) == doctest::Approx(0.03719015404965).epsilon(1e-8));
  CHECK(auth::chi2_sf(1.3, 1) == doctest::Approx(0.25421322360396).epsilon(1e-8));
  CHECK(auth::chi2_sf(20.0, 7) == doctest::Approx(0.00556968307295).epsilon(1e-8));
  CHECK(auth::chi2_sf(0.0, 3) == 1.0);
}

TEST_CASE("ks test hand cases") {
  SUBCASE("single point at zero") {
    const TestOutcome t = auth::ks_test_standard_normal(std::vector<double>{0.0});
    CHECK(t.statistic == 0.5);
    CHECK(t.p_value == doctest::Approx(0.8438198245415606).epsilon(1e-9));
    CHECK(t.n == 1);
  }
  SUBCASE("symmetric three points") {
    const TestOutcome t = auth::ks_test_standard_normal(std::vector<double>{-1.0, 0.0, 1.0});
    CHECK(std::fabs(t.statistic - 0.174678079401876) <= 1e-6);
    CHECK(std::fabs(t.p_value - 0.999877236266529) <= 1e-5);
  }
  SUBCASE("shifted cluster is strongly rejected") {
    const TestOutcome t =
        auth::ks_test_standard_normal(std::vector<double>{2.0, 2.5, 3.0, 3.5, 4.0});
    CHECK(std::fabs(t.statistic - 0.977249868051821) <= 1e-6);
    CHECK(std::fabs(t.p_value - 0.000031771429902) <= 1e-7);
  }
  SUBCASE("unsorted input gives the same answer") {
    const TestOutcome a = auth::ks_test_standard_normal(std::vector<double>{1.0, -1.0, 0.0});
    const TestOutcome b = auth::ks_test_standard_normal(std::vector<double>{-1.0, 0.0, 1.0});
    CHECK(a.statistic == b.statistic);
    CHECK(a.p_value == b.p_value);
  }
  SUBCASE("empty sample throws") {
    CHECK_THROWS_AS(auth::ks_test_standard_normal(std::vector<double>{}), Error);
  }
}

TEST_CASE("friedman test hand cases") {
  SUBCASE("fully consistent ranks over 4 blocks and 3 treatments") {
    const std::vector<std::vector<double>> m{{1, 2, 3}, {1, 2, 3}, {1, 2, 3}, {1, 2, 3}};
    const TestOutcome t = auth::friedman_test(m);
    CHECK(t.statistic == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(std::fabs(t.p_value - 0.0183156388887342) <= 1e-6);
    CHECK(t.n == 4);
    CHECK(t.k == 3);
  }
  SUBCASE("ties get midranks and the tie correction") {
    const std::vector<std::vector<double>> m{
        {1.0, 1.0, 2.0}, {3.0, 2.0, 2.0}, {1.0, 2.0, 3.0}, {2.0, 2.0, 2.0}, {1.0, 3.0, 2.0}};
    const TestOutcome t = auth::friedman_test(m);
    CHECK(t.statistic == doctest::Approx(1.285714285714294).epsilon(1e-9));
    CHECK(std::fabs(t.p_value - 0.5257880244257778) <= 1e-6);
  }
  SUBCASE("identical columns make the correction degenerate") {
    const std::vector<std::vector<double>> m{{1, 1, 1}, {2, 2, 2}, {3, 3, 3}};
    CHECK_THROWS_AS(auth::friedman_test(m), Error);
    try {
      auth::friedman_test(m);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DegenerateMatrix);
    }
  }
  SUBCASE("shape validation") {
    CHECK_THROWS_AS(auth::friedman_test({}), Error);
    CHECK_THROWS_AS(auth::friedman_test({{1.0, 2.0}, {1.0}}), Error);
    CHECK_THROWS_AS(auth::friedman_test({{1.0}, {2.0}}), Error);
  }
}

TEST_CASE("wilcoxon exact branch") {
  SUBCASE("all-positive small sample") {
    const std::vector<double> a{1.0, 2.0, 3.0};
    const std::vector<double> b{0.0, 0.0, 0.0};
    const TestOutcome t = auth::wilcoxon_signed_rank(a, b);
    CHECK(t.statistic == 0.0);
    CHECK(t.p_value == 0.25);  // 2 of 8 sign patterns reach min rank sum 0
    CHECK(t.method == "wilcoxon-exact");
  }
  SUBCASE("matches an independent enumeration for n <= 8, ties included") {
    Rng rng(55);
    for (int trial = 0; trial < 120; ++trial) {
      const std::size_t n = 2 + rng.uniform_int(7);
      std::vector<double> a(n), b(n, 0.0);
      for (auto& v : a) {
        // Coarse grid induces frequent tied |differences|.
        v = 0.5 * static_cast<double>(1 + rng.uniform_int(6));
        if (rng.uniform() < 0.5) v = -v;
      }
      const TestOutcome t = auth::wilcoxon_signed_rank(a, b);
      REQUIRE(t.method == "wilcoxon-exact");

      // Recompute the midranks the implementation is defined over.
      std::vector<double> abs_d(n);
      for (std::size_t i = 0; i < n; ++i) abs_d[i] = std::fabs(a[i]);
      std::vector<std::size_t> order(n);
      for (std::size_t i = 0; i < n; ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t x, std::size_t y) { return abs_d[x] < abs_d[y]; });
      std::vector<double> ranks(n);
      std::size_t i = 0;
      while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && abs_d[order[j + 1]] == abs_d[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t p = i; p <= j; ++p) ranks[order[p]] = r;
        i = j + 1;
      }
      CHECK(t.p_value ==
            doctest::Approx(testutil::oracle_wilcoxon_exact_p(ranks, t.statistic))
                .epsilon(1e-12));
    }
  }
  SUBCASE("zero differences are dropped before ranking") {
    const std::vector<double> a{0.0, 1.0, -1.0, 2.0};
    const std::vector<double> b{0.0, 0.0, 0.0, 0.0};
    const TestOutcome t = auth::wilcoxon_signed_rank(a, b);
    CHECK(t.n == 3);
  }
  SUBCASE("degenerate inputs") {
    const std::vector<double> same{1.0, 2.0};
    CHECK_THROWS_AS(auth::wilcoxon_signed_rank(same, same), Error);
    CHECK_THROWS_AS(auth::wilcoxon_signed_rank(same, std::vector<double>{1.0}), Error);
    CHECK_THROWS_AS(
        auth::wilcoxon_signed_rank(std::vector<double>{}, std::vector<double>{}), Error);
  }
}

TEST_CASE("wilcoxon normal branch with tie-corrected variance") {
  const std::vector<double> a{0.5, -0.5, 1.0, 1.0,  1.5, 2.0, 2.0, 2.0,
                              -1.5, 3.0, 3.5, 0.5, 4.0, 1.0, 2.5};
  const std::vector<double> b(a.size(), 0.0);
  const TestOutcome t = auth::wilcoxon_signed_rank(a, b);
  CHECK(t.method == "wilcoxon-normal");
  CHECK(t.statistic == doctest::Approx(9.5).epsilon(1e-12));
  CHECK(std::fabs(t.p_value - 0.004409433704239) <= 5e-7);
  CHECK(t.n == 15);
}

TEST_CASE("classifier comparison report") {
  // 6 users, 3 algorithms with a consistent quality ordering plus noise.
  Rng rng(91);
  std::vector<std::vector<double>> matrix(6, std::vector<double>(3));
  for (auto& row : matrix) {
    row[0] = 0.30 + 0.02 * rng.gauss();
    row[1] = 0.20 + 0.02 * rng.gauss();
    row[2] = 0.08 + 0.01 * rng.gauss();
  }
  const auto report = auth::compare_classifiers(matrix, {"A", "B", "C"});
  CHECK(report.omnibus_valid);
  CHECK(report.omnibus_friedman.p_value < 0.05);
  REQUIRE(report.pairs.size() == 3);
  for (const auto& pair : report.pairs) {
    CHECK(pair.note.empty());
    CHECK(pair.wilcoxon.method == "wilcoxon-exact");
    CHECK(pair.wilcoxon.p_value <= 1.0);
    CHECK(pair.friedman.k == 2);
  }
  CHECK(report.pairs[0].algo_a == "A");
  CHECK(report.pairs[0].algo_b == "B");

  SUBCASE("csv layout") {
    testutil::TempDir dir("cmp_csv");
    auth::write_comparison_csv(dir.file("comparison.csv"), report);
    const std::string content = testutil::read_file(dir.file("comparison.csv"));
    CHECK(content.starts_with("algo_a,algo_b,test,statistic,p_value,method,n,note\n"));
    CHECK(content.find("*,*,friedman-omnibus") != std::string::npos);
    CHECK(content.find("A,B,wilcoxon") != std::string::npos);
    // 1 omnibus row + 3 tests per pair.
    CHECK(std::count(content.begin(), content.end(), '\n') == 1 + 1 + 9);
  }
}

TEST_CASE("comparison survives identical columns by noting the failure") {
  std::vector<std::vector<double>> matrix(5, std::vector<double>{0.2, 0.2});
  const auto report = auth::compare_classifiers(matrix, {"A", "B"});
  REQUIRE(report.pairs.size() == 1);
  CHECK(!report.pairs[0].note.empty());
  CHECK(report.pairs[0].note.find("AllZeroDifferences") != std::string::npos);
}

TEST_CASE("comparison validates its matrix") {
  CHECK_THROWS_AS(auth::compare_classifiers({{0.1}}, {"A"}), Error);
  CHECK_THROWS_AS(auth::compare_classifiers({{0.1, 0.2}, {0.1}}, {"A", "B"}), Error);
}
