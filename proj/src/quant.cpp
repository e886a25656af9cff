#include "edgesense/quant.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace edgesense {

namespace {

constexpr int kMaxBits = 52;

double level_count(int bits) { return std::ldexp(1.0, bits); }

void check_quantizer(double clip, int bits) {
  if (!(clip > 0.0) || !std::isfinite(clip)) throw std::invalid_argument("quantizer: clip must be positive");
  if (bits < 1 || bits > kMaxBits) throw std::invalid_argument("quantizer: bits must be in [1, 52]");
}

// Cell i covers [u_i - delta/2, u_i + delta/2) with u_i = -U + i*delta.
double grid_point(double value, double clip, double top, double delta) {
  const double index = std::clamp(std::floor((value + clip) / delta + 0.5), 0.0, top);
  return index == top ? clip : -clip + index * delta;
}

}  // namespace

QuantizerConfig::QuantizerConfig(double clip, int bits, Eigen::MatrixXd basis)
    : clip_(clip), bits_(bits), basis_(std::move(basis)) {
  check_quantizer(clip_, bits_);
  const Eigen::Index d = basis_.rows();
  if (d < 1 || basis_.cols() != d) throw std::invalid_argument("QuantizerConfig: basis must be square");
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
  if ((basis_.transpose() * basis_ - eye).cwiseAbs().maxCoeff() > 1e-8)
    throw std::invalid_argument("QuantizerConfig: basis is not orthogonal");
  identity_ = basis_ == eye;
}

QuantizerConfig QuantizerConfig::identity(int dim, double clip, int bits) {
  if (dim < 1) throw std::invalid_argument("QuantizerConfig: dim must be >= 1");
  return QuantizerConfig(clip, bits, Eigen::MatrixXd::Identity(dim, dim));
}

double QuantizerConfig::resolution() const { return 2.0 * clip_ / (level_count(bits_) - 1.0); }

Eigen::MatrixXd klt_basis(const Eigen::MatrixXd& sigma) {
  const Eigen::Index d = sigma.rows();
  if (d < 1 || sigma.cols() != d) throw std::invalid_argument("klt_basis: covariance must be square");
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("klt_basis: covariance is not symmetric");

  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // columns
  const bool diagonal = (sigma - Eigen::MatrixXd(sigma.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
  if (diagonal) {
    values = sigma.diagonal();
    vectors = Eigen::MatrixXd::Identity(d, d);
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
    if (eig.info() != Eigen::Success) throw std::runtime_error("klt_basis: eigendecomposition failed");
    values = eig.eigenvalues();
    vectors = eig.eigenvectors();
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return values[a] > values[b]; });

  Eigen::MatrixXd basis(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    Eigen::VectorXd v = vectors.col(order[static_cast<std::size_t>(r)]);
    for (Eigen::Index i = 0; i < d; ++i) {
      if (std::abs(v[i]) > 1e-12) {
        if (v[i] < 0.0) v = -v;
        break;
      }
    }
    basis.row(r) = v.transpose();
  }
  return basis;
}

double scalar_quantize(double value, double clip, int bits) {
  check_quantizer(clip, bits);
  const double top = level_count(bits) - 1.0;
  return grid_point(value, clip, top, 2.0 * clip / top);
}

double scalar_quantize(double value, const QuantizerConfig& config) {
  return scalar_quantize(value, config.clip(), config.bits());
}

QuantizedVector encode(const FeatureVector& x, const QuantizerConfig& config) {
  if (x.size() != config.dim()) throw std::invalid_argument("encode: dimension mismatch");
  QuantizedVector out;
  out.values = config.identity_basis() ? Eigen::VectorXd(x) : Eigen::VectorXd(config.basis() * x);
  const double clip = config.clip();
  const double top = level_count(config.bits()) - 1.0;
  const double delta = config.resolution();
  for (Eigen::Index i = 0; i < out.values.size(); ++i) out.values[i] = grid_point(out.values[i], clip, top, delta);
  out.bit_count = static_cast<std::size_t>(config.bits()) * static_cast<std::size_t>(config.dim());
  return out;
}

FeatureVector decode(const Eigen::VectorXd& quantized, const QuantizerConfig& config) {
  if (quantized.size() != config.dim()) throw std::invalid_argument("decode: dimension mismatch");
  if (config.identity_basis()) return quantized;
  return config.basis().transpose() * quantized;
}

double noise_variance(int bits, double clip) {
  check_quantizer(clip, bits);
  const double steps = level_count(bits) - 1.0;
  return clip * clip / (3.0 * steps * steps);
}

}  // namespace edgesense
