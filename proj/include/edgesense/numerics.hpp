#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace edgesense {

/// Random stream used by every sampling routine. Callers own their streams.
using Rng = std::mt19937_64;

/// Derives an independent stream from a master seed and a counter (trial
/// index, worker id, ...). Same (seed, index) always yields the same stream.
Rng make_stream(std::uint64_t seed, std::uint64_t index);

/// PMF over {0, 1, ..., K}. Entries lie in [0,1] and sum to one.
class ProbabilityVector {
public:
  explicit ProbabilityVector(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t m) const { return values_[m]; }
  std::span<const double> values() const { return values_; }

private:
  std::vector<double> values_;
};

/// Standard normal tail probability, Q(x) = P(Z > x).
double q_function(double x);

/// Gamma(L, x) / Gamma(L) for integer shape L >= 1 and x >= 0.
double regularized_upper_gamma(int shape, double x);

/// gamma(L, x) / Gamma(L). Accurate for small results where
/// 1 - regularized_upper_gamma would cancel.
double regularized_lower_gamma(int shape, double x);

/// ln(Gamma(L, x) / Gamma(L)), finite even when the value underflows.
double log_regularized_upper_gamma(int shape, double x);

/// Law of the number of successes among independent Bernoulli trials with
/// the given success probabilities. O(K^2) convolution.
ProbabilityVector poisson_binomial_pmf(std::span<const double> success_probs);

}  // namespace edgesense
