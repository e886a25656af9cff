#include "edgesense/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace edgesense {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void check_gamma_args(int shape, double x) {
  if (shape < 1) throw std::invalid_argument("incomplete gamma: shape must be >= 1");
  if (!(x >= 0.0)) throw std::invalid_argument("incomplete gamma: x must be >= 0");
}

}  // namespace

Rng make_stream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t state = seed;
  const std::uint64_t a = splitmix64(state);
  state ^= index * 0xD1B54A32D192ED03ULL;
  const std::uint64_t b = splitmix64(state);
  const std::uint64_t c = splitmix64(state);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
  return Rng(seq);
}

ProbabilityVector::ProbabilityVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw std::invalid_argument("ProbabilityVector: empty");
  double total = 0.0;
  for (double p : values_) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("ProbabilityVector: entry outside [0,1]");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("ProbabilityVector: entries sum to " + std::to_string(total));
}

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double regularized_upper_gamma(int shape, double x) {
  check_gamma_args(shape, x);
  return std::exp(log_regularized_upper_gamma(shape, x));
}

double regularized_lower_gamma(int shape, double x) {
  check_gamma_args(shape, x);
  if (x == 0.0) return 0.0;
  if (x > static_cast<double>(shape) + 1.0) return -std::expm1(log_regularized_upper_gamma(shape, x));
  // e^{-x} sum_{k>=L} x^k/k!; terms shrink geometrically once k > x.
  const double log_first = shape * std::log(x) - x - std::lgamma(shape + 1.0);
  double term = 1.0;
  double sum = 1.0;
  for (int k = shape + 1; k < shape + 2000; ++k) {
    term *= x / k;
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return std::min(1.0, std::exp(log_first) * sum);
}

double log_regularized_upper_gamma(int shape, double x) {
  check_gamma_args(shape, x);
  if (x == 0.0) return 0.0;
  // log-sum-exp over k*ln(x) - ln(k!), k = 0..L-1.
  const double log_x = std::log(x);
  double peak = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < shape; ++k) peak = std::max(peak, k * log_x - std::lgamma(k + 1.0));
  double acc = 0.0;
  for (int k = 0; k < shape; ++k) acc += std::exp(k * log_x - std::lgamma(k + 1.0) - peak);
  return -x + peak + std::log(acc);
}

ProbabilityVector poisson_binomial_pmf(std::span<const double> success_probs) {
  if (success_probs.empty()) throw std::invalid_argument("poisson_binomial_pmf: no trials");
  std::vector<double> pmf(success_probs.size() + 1, 0.0);
  pmf[0] = 1.0;
  std::size_t filled = 0;
  for (double p : success_probs) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("poisson_binomial_pmf: probability outside [0,1]");
    ++filled;
    for (std::size_t m = filled; m > 0; --m) pmf[m] = pmf[m] * (1.0 - p) + pmf[m - 1] * p;
    pmf[0] *= (1.0 - p);
  }
  // Renormalize against rounding drift.
  double total = 0.0;
  for (double v : pmf) total += v;
  for (double& v : pmf) v = std::clamp(v / total, 0.0, 1.0);
  return ProbabilityVector(std::move(pmf));
}

}  // namespace edgesense
