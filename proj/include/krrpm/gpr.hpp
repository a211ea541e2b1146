#pragma once

#include <cmath>

#include "krrpm/errors.hpp"
#include "krrpm/ridge.hpp"

namespace krrpm {

// Gaussian predictive distribution under the Bayesian soft model with noise
// standard deviation sigma:
//
//   N( k'(K+aI)^-1 Y,  (sigma^2/a) kappa + sigma^2 - (sigma^2/a) k'(K+aI)^-1 k )
//
// The variance never drops below sigma^2.
struct GaussianPrediction {
  double mean = 0.0;
  double variance = 0.0;
  double sigma = 0.0;
};

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline GaussianPrediction bayes_predict(const FitState& fs, const Vector& test, double sigma) {
  if (!(sigma > 0.0)) throw InputError("bayes_predict: sigma must be positive");
  LeverageTerms lt = leverage_terms(fs, test);
  const double s2 = sigma * sigma;
  double variance = (s2 / fs.ridge) * lt.kappa + s2 - (s2 / fs.ridge) * lt.k.dot(lt.m);
  return GaussianPrediction{lt.bayes_mean, variance, sigma};
}

inline double gaussian_cdf(const GaussianPrediction& pred, double y) {
  if (!(pred.variance > 0.0)) throw InputError("gaussian_cdf: variance must be positive");
  return normal_cdf((y - pred.mean) / std::sqrt(pred.variance));
}

}  // namespace krrpm
