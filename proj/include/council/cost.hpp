#pragma once

#include <optional>
#include <vector>

#include "council/errors.hpp"

namespace council {

struct CostParams {
  double cost_per_1000_queries = 0.0;  // USD
  double quality_score = 0.0;          // fraction in (0, 1]
  double latency_median = 0.0;         // seconds
  long long tokens_in = 0;
  long long tokens_out = 0;
  double price_in = 0.0;   // USD per input token
  double price_out = 0.0;  // USD per output token
};

struct CostReport {
  double cost_ratio = 0.0;     // council / single
  double latency_ratio = 0.0;  // council / single
  double quality_ratio = 0.0;  // council / single
  double single_cost_per_qaca = 0.0;
  double council_cost_per_qaca = 0.0;
  double single_qaca_per_dollar = 0.0;
  double council_qaca_per_dollar = 0.0;
  /// Delta cost / delta quality-adjusted correct answers per 1,000 queries;
  /// undefined unless the council improves quality.
  std::optional<double> marginal_cost_per_qaca;
};

/// Cost-effectiveness arithmetic: cost per quality-adjusted correct answer,
/// QACA per dollar, and the marginal cost of each additional QACA.
inline CostReport cost_report(const CostParams& single, const CostParams& council) {
  if (single.quality_score <= 0.0 || council.quality_score <= 0.0)
    throw InvalidInputError("cost report requires positive quality scores");
  if (single.cost_per_1000_queries <= 0.0 || council.cost_per_1000_queries <= 0.0)
    throw InvalidInputError("cost report requires positive costs");
  CostReport report;
  report.cost_ratio = council.cost_per_1000_queries / single.cost_per_1000_queries;
  report.latency_ratio =
      single.latency_median > 0.0 ? council.latency_median / single.latency_median : 0.0;
  report.quality_ratio = council.quality_score / single.quality_score;
  report.single_cost_per_qaca = single.cost_per_1000_queries / (1000.0 * single.quality_score);
  report.council_cost_per_qaca = council.cost_per_1000_queries / (1000.0 * council.quality_score);
  report.single_qaca_per_dollar = 1000.0 * single.quality_score / single.cost_per_1000_queries;
  report.council_qaca_per_dollar = 1000.0 * council.quality_score / council.cost_per_1000_queries;
  const double delta_quality = council.quality_score - single.quality_score;
  if (delta_quality > 0.0) {
    report.marginal_cost_per_qaca =
        (council.cost_per_1000_queries - single.cost_per_1000_queries) / (1000.0 * delta_quality);
  }
  return report;
}

struct CallTokens {
  long long tokens_in = 0;
  long long tokens_out = 0;
};

struct Pricing {
  double price_in_per_token = 0.0;   // USD
  double price_out_per_token = 0.0;  // USD
};

/// Fixed study-time pricing schedule used for the per-query cost estimate.
/// $13 per million input tokens, $35 per million output tokens.
inline Pricing study_pricing() { return Pricing{13.0e-6, 35.0e-6}; }

/// The study-time council call pattern: three expert calls plus one
/// synthesis call, each averaging a 250-token query and an 800-token
/// response.
inline std::vector<CallTokens> study_council_calls() {
  return std::vector<CallTokens>(4, CallTokens{250, 800});
}

/// Sum of per-call token costs under the given pricing.
inline double estimate_query_cost(const std::vector<CallTokens>& calls, const Pricing& pricing) {
  if (pricing.price_in_per_token < 0.0 || pricing.price_out_per_token < 0.0)
    throw InvalidInputError("token prices must be nonnegative");
  double total = 0.0;
  for (const auto& call : calls) {
    if (call.tokens_in < 0 || call.tokens_out < 0)
      throw InvalidInputError("token counts must be nonnegative");
    total += static_cast<double>(call.tokens_in) * pricing.price_in_per_token +
             static_cast<double>(call.tokens_out) * pricing.price_out_per_token;
  }
  return total;
}

}  // namespace council
