#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "edgesense/numerics.hpp"
#include "edgesense/optimizer.hpp"
#include "edgesense/quant.hpp"

namespace edgesense {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string measured;
  std::string expected;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool passed() const;
  /// One line per check: PASS/FAIL, name, measured, expected.
  std::string to_text() const;
};

/// Random SPD matrix Q diag(lambda) Q^T with Haar-distributed Q and
/// eigenvalues uniform in [min_eig, max_eig].
Eigen::MatrixXd random_covariance(int dim, double min_eig, double max_eig, Rng& rng);

using VariancePredictor = std::function<double(int bits, double clip)>;

/// Round-trips `samples` features of a correlated 50-dimensional model
/// through a 4-bit KLT quantizer with clip 5 and compares per-dimension
/// distortion moments with the prediction (variance within 10%, |skewness|
/// <= 0.1, |excess kurtosis| <= 0.2, cross-covariances within 5 standard
/// errors of the diagonal).
CheckResult check_quantization_noise(std::uint64_t seed, const VariancePredictor& predicted = noise_variance,
                                     int samples = 100000);

/// Largest (f(x-h) - 2 f(x) + f(x+h)) over the interior points of the grid
/// lo, lo+h, ..., hi.
double max_second_difference(const std::function<double(double)>& f, double lo, double hi, double step);

/// Parameter sets used by the concavity checks.
std::vector<TradeoffParams> concavity_parameter_sets(std::uint64_t seed);

/// Maximizer of surrogate_exact: a grid of spacing `step` over the feasible
/// domain refined by golden section around the best grid point.
double exact_surrogate_argmax(const TradeoffParams& params, double step = 1e-3);

/// Runs every check. `workers` is forwarded to the Monte Carlo estimate.
ValidationReport validate(std::uint64_t seed, unsigned workers = 0);

}  // namespace edgesense
