#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "council/stats.hpp"
#include "fixtures/stats_reference.hpp"

using namespace council;
using namespace council::stats;

TEST_CASE("pearson matches a direct-summation oracle to 1e-12") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 50 + uniform_index(rng, 200);
    IndicatorSeries a, b;
    for (std::size_t i = 0; i < n; ++i) {
      a.values.push_back(uniform_double(rng) < 0.3 ? 1 : 0);
      b.values.push_back(uniform_double(rng) < 0.4 ? 1 : 0);
    }
    double rho;
    try {
      rho = pearson_error_correlation(a, b);
    } catch (const DegenerateDataError&) {
      continue;
    }
    // Independent oracle: raw-moment form of the Pearson coefficient.
    double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sa += a.values[i];
      sb += b.values[i];
      sab += a.values[i] * b.values[i];
      saa += a.values[i] * a.values[i];
      sbb += b.values[i] * b.values[i];
    }
    const double dn = static_cast<double>(n);
    const double oracle = (dn * sab - sa * sb) /
                          std::sqrt((dn * saa - sa * sa) * (dn * sbb - sb * sb));
    CHECK(rho == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("pearson degenerate and edge cases") {
  IndicatorSeries constant{{1, 1, 1, 1}, "c"};
  IndicatorSeries varying{{1, 0, 1, 0}, "v"};
  CHECK_THROWS_AS(pearson_error_correlation(constant, varying), DegenerateDataError);
  CHECK_THROWS_AS(pearson_error_correlation(varying, IndicatorSeries{{1, 0}, "short"}),
                  InvalidInputError);
  CHECK(pearson_error_correlation(varying, varying) == 1.0);
  IndicatorSeries inverted{{0, 1, 0, 1}, "i"};
  CHECK(pearson_error_correlation(varying, inverted) == -1.0);
}

TEST_CASE("levene matches frozen scipy references within 1e-6") {
  {
    GroupScores scores;
    scores.groups["a"] = stats_reference::levene_unequal_a;
    scores.groups["b"] = stats_reference::levene_unequal_b;
    const auto [w, p] = levene_test(scores);
    CHECK(w == doctest::Approx(stats_reference::levene_unequal_w).epsilon(1e-9));
    CHECK(std::fabs(p - stats_reference::levene_unequal_p) < 1e-6);
  }
  {
    GroupScores scores;
    scores.groups["a"] = stats_reference::levene_equal_a;
    scores.groups["b"] = stats_reference::levene_equal_b;
    scores.groups["c"] = stats_reference::levene_equal_c;
    const auto [w, p] = levene_test(scores);
    CHECK(w == doctest::Approx(stats_reference::levene_equal_w).epsilon(1e-9));
    CHECK(std::fabs(p - stats_reference::levene_equal_p) < 1e-6);
  }
}

TEST_CASE("levene degenerate inputs") {
  GroupScores identical;
  identical.groups["a"] = {1.0, 1.0, 1.0};
  identical.groups["b"] = {2.0, 2.0, 2.0};
  CHECK_THROWS_AS(levene_test(identical), DegenerateDataError);
  GroupScores one_group;
  one_group.groups["a"] = {1.0, 2.0};
  CHECK_THROWS_AS(levene_test(one_group), InvalidInputError);
}

TEST_CASE("paired t-test matches frozen scipy references within 1e-6") {
  {
    const auto [t, p] =
        paired_t_test(stats_reference::paired_shift_a, stats_reference::paired_shift_b);
    CHECK(t == doctest::Approx(stats_reference::paired_shift_t).epsilon(1e-9));
    CHECK(std::fabs(p - stats_reference::paired_shift_p) < 1e-6);
  }
  {
    const auto [t, p] =
        paired_t_test(stats_reference::paired_null_a, stats_reference::paired_null_b);
    CHECK(t == doctest::Approx(stats_reference::paired_null_t).epsilon(1e-9));
    CHECK(std::fabs(p - stats_reference::paired_null_p) < 1e-6);
  }
  CHECK_THROWS_AS(paired_t_test({1.0, 2.0}, {2.0, 3.0}), DegenerateDataError);
}

TEST_CASE("bootstrap covers the Bernoulli mean 93-97% of the time") {
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const double true_mean = 0.2;
  int covered = 0;
  for (int rep = 0; rep < 500; ++rep) {
    std::mt19937_64 rng(mix_seed(1234, static_cast<std::uint64_t>(rep)));
    std::vector<double> samples(200);
    for (auto& s : samples) s = uniform_double(rng) < true_mean ? 1.0 : 0.0;
    const auto [lo, hi] =
        bootstrap_ci(samples, mean, 1000, 0.95, mix_seed(4321, static_cast<std::uint64_t>(rep)));
    if (lo <= true_mean && true_mean <= hi) ++covered;
  }
  CHECK(covered >= 465);  // 93%
  CHECK(covered <= 485);  // 97%
}

TEST_CASE("bootstrap is deterministic given a seed and validates inputs") {
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const std::vector<double> samples = {0.1, 0.5, 0.9, 0.3, 0.7};
  CHECK(bootstrap_ci(samples, mean, 500, 0.9, 77) == bootstrap_ci(samples, mean, 500, 0.9, 77));
  CHECK_THROWS_AS(bootstrap_ci({}, mean), InvalidInputError);
  CHECK_THROWS_AS(bootstrap_ci(samples, mean, 0), InvalidInputError);
  CHECK_THROWS_AS(bootstrap_ci(samples, mean, 100, 1.5), InvalidInputError);
}

TEST_CASE("bias variance is the population variance of domain means") {
  std::map<std::string, double> means = {{"law", 0.8}, {"medicine", 0.9}, {"sports", 1.0}};
  // mean 0.9, squared deviations 0.01 + 0 + 0.01, over |D| = 3
  CHECK(bias_variance(means) == doctest::Approx(0.02 / 3.0).epsilon(1e-12));
  CHECK_THROWS_AS(bias_variance({{"only", 1.0}}), InvalidInputError);
}

TEST_CASE("eta squared: between plus within equals total") {
  GroupScores scores;
  scores.groups["a"] = {1.0, 2.0, 3.0};
  scores.groups["b"] = {2.0, 4.0, 6.0};
  scores.groups["c"] = {10.0, 11.0};
  const double eta2 = eta_squared(scores);
  CHECK(eta2 > 0.0);
  CHECK(eta2 < 1.0);

  double grand = 0.0;
  std::size_t n = 0;
  for (const auto& [k, v] : scores.groups)
    for (double x : v) {
      grand += x;
      ++n;
    }
  grand /= static_cast<double>(n);
  double ss_total = 0.0, ss_within = 0.0;
  for (const auto& [k, v] : scores.groups) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    for (double x : v) {
      ss_total += (x - grand) * (x - grand);
      ss_within += (x - m) * (x - m);
    }
  }
  CHECK(eta2 == doctest::Approx(1.0 - ss_within / ss_total).epsilon(1e-12));
  CHECK(kLargeEffectEtaSquared == 0.14);
}

TEST_CASE("kappa is near zero for independent raters at n = 10000") {
  std::mt19937_64 rng(8);
  std::vector<std::string> a(10000), b(10000);
  const std::vector<std::string> labels = {"yes", "no", "maybe"};
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = labels[uniform_index(rng, labels.size())];
    b[i] = labels[uniform_index(rng, labels.size())];
  }
  CHECK(std::fabs(cohens_kappa(a, b)) < 0.05);
}

TEST_CASE("kappa known values and degenerate cases") {
  CHECK(cohens_kappa({"a", "b", "a", "b"}, {"a", "b", "a", "b"}) == 1.0);
  CHECK_THROWS_AS(cohens_kappa({"a", "a"}, {"a", "a"}), DegenerateDataError);
  CHECK_THROWS_AS(cohens_kappa({"a"}, {"a", "b"}), InvalidInputError);
}

TEST_CASE("t and F tails against known quantiles") {
  // t = 2.042 at 30 dof is the two-sided 5% critical value.
  CHECK(student_t_two_sided_p(2.042, 30.0) == doctest::Approx(0.05).epsilon(2e-3));
  CHECK(student_t_two_sided_p(0.0, 10.0) == doctest::Approx(1.0));
  // F(1, n) equals t(n) squared.
  const double t = 1.7;
  CHECK(f_survival(t * t, 1.0, 25.0) ==
        doctest::Approx(student_t_two_sided_p(t, 25.0)).epsilon(1e-10));
}

TEST_CASE("deterministic rng helpers") {
  std::mt19937_64 a(5), b(5);
  for (int i = 0; i < 100; ++i) {
    const double u = uniform_double(a);
    CHECK(u == uniform_double(b));
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(mix_seed(1, 2) != mix_seed(1, 3));
  CHECK(mix_seed(1, 2) == mix_seed(1, 2));
}
