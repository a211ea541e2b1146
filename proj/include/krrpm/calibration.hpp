#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "krrpm/cps.hpp"
#include "krrpm/datagen.hpp"
#include "krrpm/errors.hpp"
#include "krrpm/rng.hpp"

namespace krrpm {

// Result of the Monte Carlo calibration harness: the predictive distribution
// evaluated at each trial's held-out label (its PIT value), the exact
// Kolmogorov-Smirnov sup-distance of those values against U[0,1], and a
// fixed-width histogram.
struct CalibrationReport {
  std::vector<double> pit_values;
  double ks_statistic = 0.0;
  std::vector<int> histogram;
  int trials = 0;
  std::uint64_t seed = 0;
};

// Exact empirical-CDF sup-distance against the uniform CDF on [0,1],
// taking both one-sided gaps at every sample point.
inline double ks_uniform_statistic(std::vector<double> values) {
  if (values.empty()) throw InputError("ks_uniform_statistic: no values");
  std::sort(values.begin(), values.end());
  const double m = static_cast<double>(values.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double di = static_cast<double>(i);
    worst = std::max(worst, std::max((di + 1.0) / m - values[i], values[i] - di / m));
  }
  return worst;
}

// One calibration trial: draw n+1 observations and tau, fit on the first n,
// evaluate the predictive distribution at the held-out label.  Uniformity of
// the returned values over many trials is the validity property under test.
//
// Trial t derives its dataset stream from (seed, 2t) and its tau from
// (seed, 2t+1), so trials are independent and order-insensitive.
inline CalibrationReport calibration_suite(const std::string& generator_id, int n,
                                           const KernelSpec& kernel, double a, Variant variant,
                                           int trials, std::uint64_t seed,
                                           int histogram_bins = 20) {
  if (trials < 100) throw InputError("calibration_suite: need at least 100 trials");
  if (n < 1) throw InputError("calibration_suite: need n >= 1");
  if (histogram_bins < 1) throw InputError("calibration_suite: need at least one histogram bin");

  CalibrationReport report;
  report.trials = trials;
  report.seed = seed;
  report.pit_values.reserve(static_cast<std::size_t>(trials));
  report.histogram.assign(static_cast<std::size_t>(histogram_bins), 0);

  for (int t = 0; t < trials; ++t) {
    std::uint64_t data_seed = SplitMix64::derive(seed, 2 * static_cast<std::uint64_t>(t));
    std::uint64_t tau_seed = SplitMix64::derive(seed, 2 * static_cast<std::uint64_t>(t) + 1);
    SyntheticDataset ds = generate_dataset(generator_id, n + 1, data_seed);
    double tau = SplitMix64(tau_seed).next_double();
    double pit;
    try {
      FitState fs = fit(ds.objects.topRows(n), ds.labels.head(n), kernel, a);
      ConformalDistribution dist =
          krrpm_predict(fs, ds.objects.row(n).transpose(), variant);
      pit = eval_distribution(dist, ds.labels(n), tau);
    } catch (const NumericError& e) {
      throw NumericError("calibration trial " + std::to_string(t) + ": " + e.what());
    }
    report.pit_values.push_back(pit);
    auto bin = static_cast<std::size_t>(pit * histogram_bins);
    if (bin >= static_cast<std::size_t>(histogram_bins))
      bin = static_cast<std::size_t>(histogram_bins) - 1;
    ++report.histogram[bin];
  }
  report.ks_statistic = ks_uniform_statistic(report.pit_values);
  return report;
}

// ---- Exact calibration check at n = 2 ---------------------------------------

// One atom of a discrete observation distribution.
struct DiscreteObservation {
  double x = 0.0;
  double y = 0.0;
  double prob = 0.0;
};

// Brute-force verification of calibration for a 3-point (or any small
// discrete) data distribution and training size n = 2: enumerate every
// (z1, z2, z3) outcome, integrate over tau analytically, and return the
// largest deviation of P(PIT <= u) from u over the given u values.
//
// Score ties are decided with a relative tolerance: genuinely tied critical
// values (duplicate observations) land within ~1e-15 of the candidate label,
// while distinct atoms stay far away, so any tie_tol in between recovers the
// exact-arithmetic counts.
inline double exact_r2_max_deviation(const std::vector<DiscreteObservation>& support,
                                     const KernelSpec& kernel, double a, Variant variant,
                                     const std::vector<double>& u_values,
                                     double tie_tol = 1e-9) {
  if (support.empty()) throw InputError("exact_r2_max_deviation: empty support");
  if (u_values.empty()) throw InputError("exact_r2_max_deviation: no u values");
  double total = 0.0;
  for (const auto& atom : support) {
    if (!(atom.prob > 0.0)) throw InputError("exact_r2_max_deviation: probabilities must be positive");
    total += atom.prob;
  }
  if (std::fabs(total - 1.0) > 1e-12)
    throw InputError("exact_r2_max_deviation: probabilities must sum to 1");

  std::vector<double> coverage(u_values.size(), 0.0);
  const std::size_t s = support.size();
  for (std::size_t i1 = 0; i1 < s; ++i1) {
    for (std::size_t i2 = 0; i2 < s; ++i2) {
      Matrix X(2, 1);
      X(0, 0) = support[i1].x;
      X(1, 0) = support[i2].x;
      Vector y(2);
      y(0) = support[i1].y;
      y(1) = support[i2].y;
      FitState fs = fit(X, y, kernel, a);
      for (std::size_t i3 = 0; i3 < s; ++i3) {
        const double weight = support[i1].prob * support[i2].prob * support[i3].prob;
        Vector test(1);
        test(0) = support[i3].x;
        ConformalDistribution dist = krrpm_predict(fs, test, variant);
        const double label = support[i3].y;
        const double scale = std::max(1.0, std::fabs(label));
        int below = 0, tied = 1;  // the candidate's own score always ties
        for (int j = 0; j < dist.n(); ++j) {
          double c = dist.critical_values()(j);
          if (std::fabs(c - label) <= tie_tol * scale)
            ++tied;
          else if (c < label)
            ++below;
        }
        // PIT = (below + tau * tied) / 3; P(PIT <= u) integrates to a clamp.
        for (std::size_t k = 0; k < u_values.size(); ++k) {
          double t = (u_values[k] * 3.0 - below) / tied;
          coverage[k] += weight * std::clamp(t, 0.0, 1.0);
        }
      }
    }
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < u_values.size(); ++k)
    worst = std::max(worst, std::fabs(coverage[k] - u_values[k]));
  return worst;
}

}  // namespace krrpm
