#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "council/errors.hpp"
#include "council/stats.hpp"

namespace council::errorsim {

/// Latent shared-failure-factor model: one global Bernoulli Z per trial;
/// expert errors are independent Bernoulli conditioned on Z's realization.
struct ErrorModelParams {
  int n_experts = 0;
  std::vector<double> marginal_rates;          // p_i
  double z_probability = 0.0;                  // P(Z)
  std::vector<double> conditional_given_z;     // P(E_i | Z)
  std::vector<double> conditional_given_not_z; // P(E_i | not Z)
  std::uint64_t seed = 0;

  void validate() const {
    if (n_experts < 1) throw InvalidInputError("error model needs n_experts >= 1");
    const auto sz = static_cast<std::size_t>(n_experts);
    if (marginal_rates.size() != sz || conditional_given_z.size() != sz ||
        conditional_given_not_z.size() != sz)
      throw InvalidInputError("error model parameter vectors must have n_experts entries");
    auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!in_unit(z_probability)) throw InvalidInputError("z_probability outside [0,1]");
    for (std::size_t i = 0; i < sz; ++i) {
      if (!in_unit(marginal_rates[i]) || !in_unit(conditional_given_z[i]) ||
          !in_unit(conditional_given_not_z[i]))
        throw InvalidInputError("error model probability outside [0,1]");
      const double reconstructed = z_probability * conditional_given_z[i] +
                                   (1.0 - z_probability) * conditional_given_not_z[i];
      if (std::fabs(reconstructed - marginal_rates[i]) > 1e-9)
        throw InvalidInputError("law-of-total-probability violation for expert " +
                                std::to_string(i));
    }
  }

  /// Independent-errors model: P(Z) = 0, conditionals equal to marginals.
  static ErrorModelParams independent(std::vector<double> marginals, std::uint64_t seed = 0) {
    ErrorModelParams params;
    params.n_experts = static_cast<int>(marginals.size());
    params.marginal_rates = marginals;
    params.z_probability = 0.0;
    params.conditional_given_z = marginals;
    params.conditional_given_not_z = std::move(marginals);
    params.seed = seed;
    params.validate();
    return params;
  }
};

struct SimulationResult {
  long long trials = 0;
  std::vector<double> empirical_marginals;
  double empirical_joint_all = 0.0;  // fraction of trials where every expert erred
  /// Symmetric, unit diagonal; NaN where a series is constant.
  std::vector<std::vector<double>> pairwise_rho;
  /// Per-expert indicator series over all trials (kept for replay and for
  /// feeding stats::pearson_error_correlation directly).
  std::vector<stats::IndicatorSeries> indicators;
};

/// One generative draw: z ~ Bernoulli(P(Z)), then per-expert independent
/// Bernoulli at the conditional rate selected by z.
inline std::vector<std::uint8_t> sample_trial(const ErrorModelParams& params,
                                              std::mt19937_64& rng) {
  const bool z = stats::uniform_double(rng) < params.z_probability;
  const auto& rates = z ? params.conditional_given_z : params.conditional_given_not_z;
  std::vector<std::uint8_t> indicators(rates.size());
  for (std::size_t i = 0; i < rates.size(); ++i)
    indicators[i] = stats::uniform_double(rng) < rates[i] ? 1 : 0;
  return indicators;
}

/// Seeded Monte-Carlo simulation. Trials are sharded across a fixed number
/// of worker streams with deterministically derived seeds, so the indicator
/// matrix is bitwise identical regardless of scheduling.
inline SimulationResult simulate(const ErrorModelParams& params, long long trials,
                                 bool keep_indicators = true) {
  params.validate();
  if (trials < 1) throw InvalidInputError("simulation needs trials >= 1");
  const std::size_t n = static_cast<std::size_t>(params.n_experts);

  constexpr int kShards = 8;  // fixed so results never depend on hardware
  std::vector<std::vector<std::uint8_t>> matrix(n);
  for (auto& row : matrix) row.resize(static_cast<std::size_t>(trials));

  const long long chunk = (trials + kShards - 1) / kShards;
  std::vector<std::thread> workers;
  for (int s = 0; s < kShards; ++s) {
    const long long begin = s * chunk;
    const long long end = std::min(trials, begin + chunk);
    if (begin >= end) break;
    workers.emplace_back([&, s, begin, end]() {
      std::mt19937_64 rng(stats::mix_seed(params.seed, static_cast<std::uint64_t>(s)));
      for (long long t = begin; t < end; ++t) {
        const bool z = stats::uniform_double(rng) < params.z_probability;
        const auto& rates = z ? params.conditional_given_z : params.conditional_given_not_z;
        for (std::size_t i = 0; i < n; ++i)
          matrix[i][static_cast<std::size_t>(t)] =
              stats::uniform_double(rng) < rates[i] ? 1 : 0;
      }
    });
  }
  for (auto& worker : workers) worker.join();

  SimulationResult result;
  result.trials = trials;
  result.empirical_marginals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    long long sum = 0;
    for (std::uint8_t v : matrix[i]) sum += v;
    result.empirical_marginals[i] = static_cast<double>(sum) / static_cast<double>(trials);
  }
  long long joint = 0;
  for (long long t = 0; t < trials; ++t) {
    bool all = true;
    for (std::size_t i = 0; i < n && all; ++i) all = matrix[i][static_cast<std::size_t>(t)] != 0;
    if (all) ++joint;
  }
  result.empirical_joint_all = static_cast<double>(joint) / static_cast<double>(trials);

  std::vector<stats::IndicatorSeries> series(n);
  for (std::size_t i = 0; i < n; ++i) {
    series[i].label = "expert_" + std::to_string(i);
    series[i].values = std::move(matrix[i]);
  }
  result.pairwise_rho.assign(n, std::vector<double>(n, std::nan("")));
  for (std::size_t i = 0; i < n; ++i) {
    result.pairwise_rho[i][i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      try {
        const double rho = stats::pearson_error_correlation(series[i], series[j]);
        result.pairwise_rho[i][j] = rho;
        result.pairwise_rho[j][i] = rho;
      } catch (const DegenerateDataError&) {
        // leave NaN: correlation undefined for constant series
      }
    }
  }
  if (keep_indicators) result.indicators = std::move(series);
  return result;
}

/// Analytic joint all-error probability under conditional independence
/// given Z.
inline double analytic_joint(const ErrorModelParams& params) {
  params.validate();
  double prod_z = 1.0, prod_not_z = 1.0;
  for (std::size_t i = 0; i < params.conditional_given_z.size(); ++i) {
    prod_z *= params.conditional_given_z[i];
    prod_not_z *= params.conditional_given_not_z[i];
  }
  return params.z_probability * prod_z + (1.0 - params.z_probability) * prod_not_z;
}

/// Conservative correlation-adjusted joint-failure bound
/// p^n + C(n,2) * rho * p * (1 - p), clamped to [0, 1].
inline double joint_bound(double p, double rho, int n) {
  if (p < 0.0 || p > 1.0) throw InvalidInputError("joint bound needs p in [0,1]");
  if (rho < -1.0 || rho > 1.0) throw InvalidInputError("joint bound needs rho in [-1,1]");
  if (n < 2) throw InvalidInputError("joint bound needs n >= 2");
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  const double bound = std::pow(p, n) + pairs * rho * p * (1.0 - p);
  return std::clamp(bound, 0.0, 1.0);
}

namespace detail {

/// Population pairwise correlation of the latent model factors as
/// rho_ij = d_i * d_j with d_i = sqrt(z(1-z)) * (a_i - b_i) / sqrt(p_i q_i).
/// Given per-expert loadings d_i, picks a feasible z (midpoint of the
/// feasible interval on a fine grid) and solves the conditional splits
/// analytically so marginals are preserved exactly.
inline ErrorModelParams build_from_loadings(const std::vector<double>& marginals,
                                            const std::vector<double>& loadings,
                                            std::uint64_t seed) {
  const std::size_t n = marginals.size();
  auto splits_for = [&](double z, std::vector<double>& a, std::vector<double>& b) {
    const double scale = std::sqrt(z * (1.0 - z));
    for (std::size_t i = 0; i < n; ++i) {
      const double p = marginals[i];
      const double delta = loadings[i] * std::sqrt(p * (1.0 - p)) / scale;
      a[i] = p + (1.0 - z) * delta;
      b[i] = p - z * delta;
      if (a[i] < -1e-12 || a[i] > 1.0 + 1e-12 || b[i] < -1e-12 || b[i] > 1.0 + 1e-12)
        return false;
      a[i] = std::clamp(a[i], 0.0, 1.0);
      b[i] = std::clamp(b[i], 0.0, 1.0);
    }
    return true;
  };

  constexpr int kGrid = 9999;
  std::vector<double> a(n), b(n);
  double z_lo = -1.0, z_hi = -1.0;
  for (int g = 1; g <= kGrid; ++g) {
    const double z = static_cast<double>(g) / (kGrid + 1);
    if (splits_for(z, a, b)) {
      if (z_lo < 0.0) z_lo = z;
      z_hi = z;
    } else if (z_lo >= 0.0) {
      break;  // feasible set is an interval
    }
  }
  if (z_lo < 0.0)
    throw CalibrationError("no feasible z_probability for requested correlation loadings", 0.0,
                           0.0);
  const double z = 0.5 * (z_lo + z_hi);
  if (!splits_for(z, a, b))
    throw CalibrationError("feasible z interval collapsed", 0.0, 0.0);

  ErrorModelParams params;
  params.n_experts = static_cast<int>(n);
  params.marginal_rates = marginals;
  params.z_probability = z;
  params.conditional_given_z = a;
  params.conditional_given_not_z = b;
  params.seed = seed;
  // Re-derive marginals from the (possibly clamped) splits so the
  // law-of-total-probability invariant holds to 1e-9 exactly.
  for (std::size_t i = 0; i < n; ++i)
    params.marginal_rates[i] = z * a[i] + (1.0 - z) * b[i];
  params.validate();
  return params;
}

inline bool loadings_feasible(const std::vector<double>& marginals,
                              const std::vector<double>& loadings) {
  try {
    build_from_loadings(marginals, loadings, 0);
    return true;
  } catch (const CalibrationError&) {
    return false;
  }
}

}  // namespace detail

/// Calibrate the shared-factor model so every pairwise correlation equals
/// `target_rho` while preserving the requested marginals.
inline ErrorModelParams calibrate_shared_factor(int n, const std::vector<double>& marginal_rates,
                                                double target_rho, std::uint64_t seed = 0) {
  if (n < 2) throw InvalidInputError("calibration needs n >= 2");
  if (marginal_rates.size() != static_cast<std::size_t>(n))
    throw InvalidInputError("calibration needs one marginal per expert");
  for (double p : marginal_rates)
    if (p <= 0.0 || p >= 1.0)
      throw InvalidInputError("calibration marginals must lie strictly inside (0,1)");

  if (target_rho == 0.0) return ErrorModelParams::independent(marginal_rates, seed);
  if (target_rho < 0.0 && n > 2)
    throw CalibrationError(
        "a single shared factor cannot make all pairs negatively correlated for n > 2", 0.0, 1.0);
  if (std::fabs(target_rho) > 1.0) throw InvalidInputError("target rho outside [-1,1]");

  std::vector<double> loadings(static_cast<std::size_t>(n),
                               std::sqrt(std::fabs(target_rho)));
  if (target_rho < 0.0) loadings[1] = -loadings[1];  // n == 2 only

  if (!detail::loadings_feasible(marginal_rates, loadings)) {
    // Report the achievable uniform-rho range via bisection on |rho|.
    double lo = 0.0, hi = std::fabs(target_rho);
    for (int iter = 0; iter < 60; ++iter) {
      const double mid = 0.5 * (lo + hi);
      std::vector<double> trial(static_cast<std::size_t>(n), std::sqrt(mid));
      if (target_rho < 0.0) trial[1] = -trial[1];
      if (detail::loadings_feasible(marginal_rates, trial))
        lo = mid;
      else
        hi = mid;
    }
    throw CalibrationError("target rho " + std::to_string(target_rho) +
                               " infeasible for the given marginals; achievable |rho| <= " +
                               std::to_string(lo),
                           target_rho < 0.0 ? -lo : 0.0, lo);
  }
  return detail::build_from_loadings(marginal_rates, loadings, seed);
}

/// Calibrate a three-expert model to three distinct pairwise targets
/// (rho_01, rho_02, rho_12). A rank-one loading vector reproduces the
/// targets exactly: d_0 = sqrt(r01*r02/r12), d_1 = r01/d_0, d_2 = r02/d_0.
inline ErrorModelParams calibrate_pairwise_targets(const std::vector<double>& marginal_rates,
                                                   double rho_01, double rho_02, double rho_12,
                                                   std::uint64_t seed = 0) {
  if (marginal_rates.size() != 3)
    throw InvalidInputError("pairwise-target calibration is defined for n = 3");
  if (rho_01 <= 0.0 || rho_02 <= 0.0 || rho_12 <= 0.0)
    throw CalibrationError("pairwise targets must be positive for a single shared factor", 0.0,
                           1.0);
  const double d0 = std::sqrt(rho_01 * rho_02 / rho_12);
  const std::vector<double> loadings{d0, rho_01 / d0, rho_02 / d0};
  for (double d : loadings)
    if (d >= 1.0)
      throw CalibrationError("pairwise targets imply a loading >= 1; not realizable", 0.0, 1.0);
  if (!detail::loadings_feasible(marginal_rates, loadings))
    throw CalibrationError("pairwise targets infeasible for the given marginals", 0.0, 1.0);
  return detail::build_from_loadings(marginal_rates, loadings, seed);
}

}  // namespace council::errorsim
