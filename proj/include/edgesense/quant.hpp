#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "edgesense/gmm.hpp"

namespace edgesense {

/// Block quantizer: orthogonal transform followed by a uniform scalar
/// quantizer with 2^bits points spanning [-clip, +clip] on every dimension.
class QuantizerConfig {
public:
  /// `basis` rows are the transform directions; must be orthogonal to 1e-8.
  QuantizerConfig(double clip, int bits, Eigen::MatrixXd basis);

  static QuantizerConfig identity(int dim, double clip, int bits);

  double clip() const { return clip_; }
  int bits() const { return bits_; }
  int dim() const { return static_cast<int>(basis_.rows()); }
  /// Grid spacing 2U / (2^R - 1).
  double resolution() const;
  const Eigen::MatrixXd& basis() const { return basis_; }
  bool identity_basis() const { return identity_; }

private:
  double clip_;
  int bits_;
  Eigen::MatrixXd basis_;
  bool identity_ = false;
};

/// Karhunen-Loeve basis of an SPD covariance. Rows are eigenvectors ordered
/// by descending eigenvalue; each row's first non-negligible entry is
/// positive. Diagonal inputs map to a permutation (identity for equal
/// variances).
Eigen::MatrixXd klt_basis(const Eigen::MatrixXd& sigma);

/// Nearest grid point under the half-open cell rule; out-of-range values
/// saturate to -clip / +clip.
double scalar_quantize(double value, double clip, int bits);
double scalar_quantize(double value, const QuantizerConfig& config);

struct QuantizedVector {
  Eigen::VectorXd values;  // grid points in the transform domain
  std::size_t bit_count = 0;
};

QuantizedVector encode(const FeatureVector& x, const QuantizerConfig& config);
FeatureVector decode(const Eigen::VectorXd& quantized, const QuantizerConfig& config);
inline FeatureVector decode(const QuantizedVector& q, const QuantizerConfig& config) {
  return decode(q.values, config);
}

/// Per-dimension distortion variance U^2 / (3 (2^R - 1)^2) = Delta^2 / 12.
double noise_variance(int bits, double clip);

}  // namespace edgesense
