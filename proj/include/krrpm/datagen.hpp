#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "krrpm/errors.hpp"
#include "krrpm/kernels.hpp"
#include "krrpm/rng.hpp"

namespace krrpm {

// A seeded synthetic regression dataset; reproducible from
// (generator, seed, n).  `latent` holds per-dataset draws (the weight vector
// of the trig model), empty for generators without any.
struct SyntheticDataset {
  Matrix objects;
  Vector labels;
  std::string generator;
  std::uint64_t seed = 0;
  Vector latent;
};

// y = w1 cos x1 + w2 cos x2 + w3 sin x1 + w4 sin x2 + noise, with
// w ~ N(0, I4) drawn once per dataset, x ~ U[-1,1]^2 and noise ~ N(0,1).
inline SyntheticDataset gen_trig(int n, std::uint64_t seed) {
  if (n < 1) throw InputError("gen_trig: need n >= 1");
  SplitMix64 rng(seed);
  Vector w(4);
  for (int j = 0; j < 4; ++j) w(j) = rng.next_gaussian();
  Matrix X(n, 2);
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    double x1 = rng.next_uniform(-1.0, 1.0);
    double x2 = rng.next_uniform(-1.0, 1.0);
    X(i, 0) = x1;
    X(i, 1) = x2;
    y(i) = w(0) * std::cos(x1) + w(1) * std::cos(x2) + w(2) * std::sin(x1) +
           w(3) * std::sin(x2) + rng.next_gaussian();
  }
  return SyntheticDataset{std::move(X), std::move(y), "trig", seed, std::move(w)};
}

// x ~ U[0,1], then y | x ~ U[-x, x].
inline SyntheticDataset gen_triangle(int n, std::uint64_t seed) {
  if (n < 1) throw InputError("gen_triangle: need n >= 1");
  SplitMix64 rng(seed);
  Matrix X(n, 1);
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    double x = rng.next_double();
    X(i, 0) = x;
    y(i) = rng.next_uniform(-x, x);
  }
  return SyntheticDataset{std::move(X), std::move(y), "triangle", seed, Vector()};
}

inline SyntheticDataset generate_dataset(const std::string& generator_id, int n,
                                         std::uint64_t seed) {
  if (generator_id == "trig") return gen_trig(n, seed);
  if (generator_id == "triangle") return gen_triangle(n, seed);
  throw InputError("unknown generator: " + generator_id);
}

}  // namespace krrpm
