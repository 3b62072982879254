#include <doctest.h>

#include <cmath>

#include "council/cost.hpp"

using namespace council;

namespace {

double round_to(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(v * scale) / scale;
}

double round_sig(double v, int figures) {
  if (v == 0.0) return 0.0;
  const double scale = std::pow(10.0, figures - 1 - std::floor(std::log10(std::fabs(v))));
  return std::round(v * scale) / scale;
}

}  // namespace

TEST_CASE("benchmark cost comparison at stated rounding") {
  CostParams single{30.0, 0.815, 8.2, 0, 0, 0.0, 0.0};
  CostParams team{125.0, 0.917, 31.5, 0, 0, 0.0, 0.0};
  const CostReport r = cost_report(single, team);

  CHECK(round_to(r.single_cost_per_qaca, 3) == 0.037);
  CHECK(round_to(r.council_cost_per_qaca, 3) == 0.136);
  CHECK(round_sig(r.single_qaca_per_dollar, 3) == 27.2);
  CHECK(round_sig(r.council_qaca_per_dollar, 3) == 7.34);
  CHECK(round_to(r.cost_ratio, 2) == 4.17);
  REQUIRE(r.marginal_cost_per_qaca.has_value());
  CHECK(round_to(*r.marginal_cost_per_qaca, 2) == 0.93);
  CHECK(r.quality_ratio == doctest::Approx(0.917 / 0.815));
  CHECK(r.latency_ratio == doctest::Approx(31.5 / 8.2));
}

TEST_CASE("marginal cost is undefined without a quality gain") {
  CostParams single{30.0, 0.9, 0.0, 0, 0, 0.0, 0.0};
  CostParams team{125.0, 0.9, 0.0, 0, 0, 0.0, 0.0};
  CHECK_FALSE(cost_report(single, team).marginal_cost_per_qaca.has_value());
  CostParams worse{125.0, 0.8, 0.0, 0, 0, 0.0, 0.0};
  CHECK_FALSE(cost_report(single, worse).marginal_cost_per_qaca.has_value());
}

TEST_CASE("cost report validates inputs") {
  CostParams good{30.0, 0.8, 0.0, 0, 0, 0.0, 0.0};
  CostParams zero_quality{30.0, 0.0, 0.0, 0, 0, 0.0, 0.0};
  CostParams zero_cost{0.0, 0.8, 0.0, 0, 0, 0.0, 0.0};
  CHECK_THROWS_AS(cost_report(good, zero_quality), InvalidInputError);
  CHECK_THROWS_AS(cost_report(zero_cost, good), InvalidInputError);
}

TEST_CASE("ratios are scale invariant") {
  CostParams single{30.0, 0.815, 0.0, 0, 0, 0.0, 0.0};
  CostParams team{125.0, 0.917, 0.0, 0, 0, 0.0, 0.0};
  const CostReport base = cost_report(single, team);
  single.cost_per_1000_queries *= 10.0;
  team.cost_per_1000_queries *= 10.0;
  const CostReport scaled = cost_report(single, team);
  CHECK(scaled.cost_ratio == doctest::Approx(base.cost_ratio).epsilon(1e-12));
  CHECK(scaled.quality_ratio == doctest::Approx(base.quality_ratio).epsilon(1e-12));
  CHECK(scaled.single_cost_per_qaca == doctest::Approx(10.0 * base.single_cost_per_qaca));
}

TEST_CASE("per-query council cost under study pricing is about $0.125") {
  const double cost = estimate_query_cost(study_council_calls(), study_pricing());
  CHECK(std::fabs(cost - 0.125) <= 0.005);
  // Exact closed form: 4 calls * (250 * $13e-6 + 800 * $35e-6).
  CHECK(cost == doctest::Approx(4.0 * (250.0 * 13.0e-6 + 800.0 * 35.0e-6)).epsilon(1e-12));
}

TEST_CASE("query cost estimation validates inputs") {
  CHECK(estimate_query_cost({}, study_pricing()) == 0.0);
  CHECK_THROWS_AS(estimate_query_cost({CallTokens{-1, 0}}, study_pricing()), InvalidInputError);
  CHECK_THROWS_AS(estimate_query_cost({CallTokens{1, 1}}, Pricing{-1.0, 0.0}), InvalidInputError);
}
