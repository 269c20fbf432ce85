#pragma once

// Shared fixtures for the unit and acceptance suites.

#include <cstdint>
#include <random>
#include <vector>

#include "iqtd/generator.hpp"
#include "iqtd/seqspace.hpp"

namespace iqtd::testing {

inline GeneratorSpec constant_iqtd(double lambda, Index n, double lo = 0.3, double hi = 0.4) {
  return GeneratorSpec::iqtd(std::vector<double>(std::size_t(n), lambda), lo, hi);
}

inline GeneratorSpec random_iqtd(std::uint64_t seed, Index n, double lo = 0.3, double hi = 0.4) {
  return GeneratorSpec::iqtd(resolve(UniformCoefficients{lo, hi, seed}, n), lo, hi);
}

/// Random complex vector with entries in the unit square, n coordinates.
inline WeightedVector random_vector(std::mt19937_64& rng, Index n, Weight w) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Coeffs<Complex> c(n);
  for (Index i = 0; i < n; ++i) c[i] = Complex(u(rng), u(rng));
  return {std::move(c), w};
}

inline RealWeightedVector random_real_vector(std::mt19937_64& rng, Index n, Weight w) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Coeffs<double> c(n);
  for (Index i = 0; i < n; ++i) c[i] = u(rng);
  return {std::move(c), w};
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

}  // namespace iqtd::testing
