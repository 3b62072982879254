#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "council/errors.hpp"

namespace council::stats {

// ---------------------------------------------------------------------------
// Deterministic RNG helpers. Engine sequences are pinned by the standard;
// distribution objects are not, so uniforms are derived from raw engine
// output directly.
// ---------------------------------------------------------------------------

/// Uniform double in [0, 1) from the top 53 bits of the engine output.
inline double uniform_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform index in [0, n).
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform_double(rng) * static_cast<double>(n));
}

/// splitmix64; used to derive independent per-shard seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Special functions: regularized incomplete beta and the t / F tail
// probabilities built on it. Continued-fraction evaluation targets 1e-10
// relative precision.
// ---------------------------------------------------------------------------

namespace detail {

inline double log_gamma(double x) { return std::lgamma(x); }

inline double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-14;
  constexpr double kFpMin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = detail::log_gamma(a + b) - detail::log_gamma(a) -
                          detail::log_gamma(b) + a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::betacf(a, b, x) / a;
  return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

/// Two-sided p-value for Student's t with `dof` degrees of freedom.
inline double student_t_two_sided_p(double t, double dof) {
  const double x = dof / (dof + t * t);
  return incomplete_beta(dof / 2.0, 0.5, x);
}

/// Upper-tail probability P(F >= f) for the F distribution.
inline double f_survival(double f, double dof1, double dof2) {
  if (f <= 0.0) return 1.0;
  const double x = dof2 / (dof2 + dof1 * f);
  return incomplete_beta(dof2 / 2.0, dof1 / 2.0, x);
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

struct IndicatorSeries {
  std::vector<std::uint8_t> values;  // 0/1 error indicators
  std::string label;
};

enum class ScoreKind { Neutrality, FactualConsistency };

struct GroupScores {
  std::map<std::string, std::vector<double>> groups;
  ScoreKind score_kind = ScoreKind::Neutrality;
};

/// The paper's large-effect threshold for eta-squared.
inline constexpr double kLargeEffectEtaSquared = 0.14;

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

/// Pearson correlation of two binary error-indicator series.
inline double pearson_error_correlation(const IndicatorSeries& a, const IndicatorSeries& b) {
  if (a.values.size() != b.values.size())
    throw InvalidInputError("indicator series lengths differ");
  const std::size_t n = a.values.size();
  if (n < 2) throw InvalidInputError("correlation needs at least two observations");
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mean_a += a.values[k];
    mean_b += b.values[k];
  }
  mean_a /= static_cast<double>(n);
  mean_b /= static_cast<double>(n);
  double num = 0.0, ssa = 0.0, ssb = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double da = a.values[k] - mean_a;
    const double db = b.values[k] - mean_b;
    num += da * db;
    ssa += da * da;
    ssb += db * db;
  }
  if (ssa == 0.0 || ssb == 0.0)
    throw DegenerateDataError("correlation undefined: constant indicator series");
  double rho = num / std::sqrt(ssa * ssb);
  return std::clamp(rho, -1.0, 1.0);
}

/// Percentile bootstrap interval for an arbitrary statistic.
inline std::pair<double, double> bootstrap_ci(
    const std::vector<double>& samples,
    const std::function<double(const std::vector<double>&)>& statistic, int resamples = 1000,
    double level = 0.95, std::uint64_t seed = 0) {
  if (samples.empty()) throw InvalidInputError("bootstrap needs a non-empty sample");
  if (resamples < 1) throw InvalidInputError("bootstrap needs at least one resample");
  if (level <= 0.0 || level >= 1.0) throw InvalidInputError("bootstrap level must be in (0,1)");
  std::mt19937_64 rng(seed);
  std::vector<double> stats_out(static_cast<std::size_t>(resamples));
  std::vector<double> resample(samples.size());
  for (int r = 0; r < resamples; ++r) {
    for (std::size_t i = 0; i < samples.size(); ++i)
      resample[i] = samples[uniform_index(rng, samples.size())];
    stats_out[static_cast<std::size_t>(r)] = statistic(resample);
  }
  std::sort(stats_out.begin(), stats_out.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(stats_out.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, stats_out.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return stats_out[lo] * (1.0 - frac) + stats_out[hi] * frac;
  };
  const double alpha = 1.0 - level;
  return {quantile(alpha / 2.0), quantile(1.0 - alpha / 2.0)};
}

/// Population variance (1/|D|) of per-domain mean scores.
inline double bias_variance(const std::map<std::string, double>& per_domain_means) {
  if (per_domain_means.size() < 2) throw InvalidInputError("bias variance needs >= 2 domains");
  double mean = 0.0;
  for (const auto& [domain, value] : per_domain_means) mean += value;
  mean /= static_cast<double>(per_domain_means.size());
  double ss = 0.0;
  for (const auto& [domain, value] : per_domain_means) ss += (value - mean) * (value - mean);
  return ss / static_cast<double>(per_domain_means.size());
}

/// Classic mean-centered Levene W with its F-distribution p-value.
inline std::pair<double, double> levene_test(const GroupScores& scores) {
  const std::size_t k = scores.groups.size();
  if (k < 2) throw InvalidInputError("levene needs >= 2 groups");
  std::vector<std::vector<double>> z;  // absolute deviations from group mean
  std::size_t total_n = 0;
  for (const auto& [label, values] : scores.groups) {
    if (values.size() < 2) throw InvalidInputError("levene group '" + label + "' needs >= 2 values");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    std::vector<double> zi;
    zi.reserve(values.size());
    for (double v : values) zi.push_back(std::fabs(v - mean));
    total_n += values.size();
    z.push_back(std::move(zi));
  }

  double grand = 0.0;
  std::vector<double> group_means;
  for (const auto& zi : z) {
    double m = 0.0;
    for (double v : zi) m += v;
    grand += m;
    group_means.push_back(m / static_cast<double>(zi.size()));
  }
  grand /= static_cast<double>(total_n);

  double between = 0.0, within = 0.0;
  for (std::size_t g = 0; g < z.size(); ++g) {
    between += static_cast<double>(z[g].size()) * (group_means[g] - grand) * (group_means[g] - grand);
    for (double v : z[g]) within += (v - group_means[g]) * (v - group_means[g]);
  }
  if (within == 0.0 && between == 0.0)
    throw DegenerateDataError("levene undefined: all deviations identical");
  if (within == 0.0) return {std::numeric_limits<double>::infinity(), 0.0};

  const double dof1 = static_cast<double>(k - 1);
  const double dof2 = static_cast<double>(total_n - k);
  const double w = (dof2 / dof1) * (between / within);
  return {w, f_survival(w, dof1, dof2)};
}

/// Effect size: between-group sum of squares over total sum of squares.
inline double eta_squared(const GroupScores& scores) {
  if (scores.groups.size() < 2) throw InvalidInputError("eta-squared needs >= 2 groups");
  double grand = 0.0;
  std::size_t total_n = 0;
  for (const auto& [label, values] : scores.groups) {
    if (values.empty()) throw InvalidInputError("eta-squared group '" + label + "' is empty");
    for (double v : values) grand += v;
    total_n += values.size();
  }
  grand /= static_cast<double>(total_n);
  double ss_between = 0.0, ss_total = 0.0;
  for (const auto& [label, values] : scores.groups) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    ss_between += static_cast<double>(values.size()) * (mean - grand) * (mean - grand);
    for (double v : values) ss_total += (v - grand) * (v - grand);
  }
  if (ss_total == 0.0) throw DegenerateDataError("eta-squared undefined: zero total variance");
  return ss_between / ss_total;
}

/// Cohen's kappa over two label sequences.
inline double cohens_kappa(const std::vector<std::string>& rater_a,
                           const std::vector<std::string>& rater_b) {
  if (rater_a.size() != rater_b.size()) throw InvalidInputError("rater label lengths differ");
  if (rater_a.empty()) throw InvalidInputError("kappa needs at least one item");
  const double n = static_cast<double>(rater_a.size());
  std::map<std::string, double> freq_a, freq_b;
  double observed = 0.0;
  for (std::size_t i = 0; i < rater_a.size(); ++i) {
    if (rater_a[i] == rater_b[i]) observed += 1.0;
    freq_a[rater_a[i]] += 1.0;
    freq_b[rater_b[i]] += 1.0;
  }
  const double p_o = observed / n;
  double p_e = 0.0;
  for (const auto& [label, count_a] : freq_a) {
    const auto it = freq_b.find(label);
    if (it != freq_b.end()) p_e += (count_a / n) * (it->second / n);
  }
  if (p_e >= 1.0)
    throw DegenerateDataError("kappa undefined: both raters constant with the same label");
  return (p_o - p_e) / (1.0 - p_e);
}

/// Paired two-sided t-test on the difference series.
inline std::pair<double, double> paired_t_test(const std::vector<double>& a,
                                               const std::vector<double>& b) {
  if (a.size() != b.size()) throw InvalidInputError("paired series lengths differ");
  if (a.size() < 2) throw InvalidInputError("paired t-test needs >= 2 pairs");
  const std::size_t n = a.size();
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = a[i] - b[i];
  double mean = 0.0;
  for (double d : diff) mean += d;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double d : diff) ss += (d - mean) * (d - mean);
  const double var = ss / static_cast<double>(n - 1);
  if (var == 0.0) throw DegenerateDataError("paired t-test degenerate: zero-variance differences");
  const double t = mean / std::sqrt(var / static_cast<double>(n));
  return {t, student_t_two_sided_p(t, static_cast<double>(n - 1))};
}

}  // namespace council::stats
