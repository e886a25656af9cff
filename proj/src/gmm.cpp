#include "edgesense/gmm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace edgesense {

namespace {

constexpr double kMinEigenvalue = 1e-12;

bool is_diagonal(const Eigen::MatrixXd& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (i != j && m(i, j) != 0.0) return false;
  return true;
}

}  // namespace

InferenceModel::InferenceModel(Eigen::VectorXd mu1, Eigen::VectorXd mu2, Eigen::MatrixXd sigma)
    : mu1_(std::move(mu1)), mu2_(std::move(mu2)), sigma_(std::move(sigma)) {
  const Eigen::Index d = mu1_.size();
  if (d < 1) throw std::invalid_argument("InferenceModel: empty mean vector");
  if (mu2_.size() != d || sigma_.rows() != d || sigma_.cols() != d)
    throw std::invalid_argument("InferenceModel: inconsistent dimensions");
  if (!mu1_.allFinite() || !mu2_.allFinite() || !sigma_.allFinite())
    throw std::invalid_argument("InferenceModel: non-finite parameters");

  const double scale = std::max(1.0, sigma_.cwiseAbs().maxCoeff());
  if ((sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("InferenceModel: covariance is not symmetric");

  diagonal_ = is_diagonal(sigma_);
  Eigen::VectorXd gap = mu1_ - mu2_;
  if (diagonal_) {
    eigenvalues_ = sigma_.diagonal();
    gap_eigen_ = gap;
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma_);
    if (eig.info() != Eigen::Success) throw std::invalid_argument("InferenceModel: eigendecomposition failed");
    eigenvalues_ = eig.eigenvalues();
    gap_eigen_ = eig.eigenvectors().transpose() * gap;
  }
  if (eigenvalues_.minCoeff() <= kMinEigenvalue)
    throw std::invalid_argument("InferenceModel: covariance is not positive definite (min eigenvalue " +
                                std::to_string(eigenvalues_.minCoeff()) + ")");

  Eigen::LLT<Eigen::MatrixXd> llt(sigma_);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("InferenceModel: Cholesky factorization failed");
  chol_ = llt.matrixL();
  sigma_inv_ = llt.solve(Eigen::MatrixXd::Identity(d, d));
  sigma_inv_ = 0.5 * (sigma_inv_ + sigma_inv_.transpose()).eval();
  const double residual = (sigma_ * sigma_inv_ - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff();
  if (residual > 1e-8)
    throw std::invalid_argument("InferenceModel: covariance too ill-conditioned (inverse residual " +
                                std::to_string(residual) + ")");

  weights_ = sigma_inv_ * (mu2_ - mu1_);
  offset_ = 0.5 * (mu1_.dot(sigma_inv_ * mu1_) - mu2_.dot(sigma_inv_ * mu2_));
}

InferenceModel InferenceModel::symmetric_isotropic(int dim, double magnitude) {
  if (dim < 1) throw std::invalid_argument("symmetric_isotropic: dim must be >= 1");
  return InferenceModel(Eigen::VectorXd::Constant(dim, magnitude), Eigen::VectorXd::Constant(dim, -magnitude),
                        Eigen::MatrixXd::Identity(dim, dim));
}

InferenceModel InferenceModel::with_isotropic_noise(double sigma_q2) const {
  if (!(sigma_q2 >= 0.0)) throw std::invalid_argument("with_isotropic_noise: negative variance");
  Eigen::MatrixXd inflated = sigma_;
  inflated.diagonal().array() += sigma_q2;
  return InferenceModel(mu1_, mu2_, std::move(inflated));
}

double discriminant_gain(const InferenceModel& model) { return effective_discriminant_gain(model, 0.0); }

double effective_discriminant_gain(const InferenceModel& model, double sigma_q2) {
  if (!(sigma_q2 >= 0.0)) throw std::invalid_argument("effective_discriminant_gain: negative variance");
  const auto& nu = model.gap_in_eigenbasis();
  return 0.5 * (nu.array().square() / (model.eigenvalues().array() + sigma_q2)).sum();
}

double inverse_gap_norm_sq(const InferenceModel& model, double sigma_q2) {
  if (!(sigma_q2 >= 0.0)) throw std::invalid_argument("inverse_gap_norm_sq: negative variance");
  const auto& nu = model.gap_in_eigenbasis();
  return (nu.array().square() / (model.eigenvalues().array() + sigma_q2).square()).sum();
}

GainReductionBounds dg_reduction_bounds(const InferenceModel& model, double sigma_q2) {
  if (!(sigma_q2 >= 0.0)) throw std::invalid_argument("dg_reduction_bounds: negative variance");
  const auto shifted = model.eigenvalues().array() + sigma_q2;
  return {sigma_q2 / shifted.sum(), sigma_q2 * shifted.inverse().sum()};
}

double discriminant_score(const FeatureVector& x, const InferenceModel& model) {
  if (x.size() != model.dim()) throw std::invalid_argument("discriminant_score: dimension mismatch");
  return model.score_weights().dot(x) + model.score_offset();
}

FeatureVector sample_feature(const InferenceModel& model, ClassLabel label, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index d = model.dim();
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < d; ++i) z[i] = normal(rng);
  const auto& mean = label == ClassLabel::one ? model.mu1() : model.mu2();
  if (model.diagonal_covariance()) return mean + model.cholesky_factor().diagonal().cwiseProduct(z);
  return mean + model.cholesky_factor().triangularView<Eigen::Lower>() * z;
}

std::vector<FeatureVector> sample_features(const InferenceModel& model, ClassLabel label, int count, Rng& rng) {
  if (count < 1) throw std::invalid_argument("sample_features: count must be >= 1");
  std::vector<FeatureVector> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) out.push_back(sample_feature(model, label, rng));
  return out;
}

std::optional<ClassLabel> classify(std::span<const double> scores) {
  if (scores.empty()) return std::nullopt;
  double total = 0.0;
  for (double s : scores) total += s;
  return total < 0.0 ? ClassLabel::one : ClassLabel::two;
}

double bayes_error_single(double gain) {
  if (!(gain >= 0.0)) throw std::invalid_argument("bayes_error_single: negative gain");
  return q_function(std::sqrt(gain / 2.0));
}

double sensing_error_bound(double gain, double eps_bar, int observations) {
  if (!(gain >= 0.0)) throw std::invalid_argument("sensing_error_bound: negative gain");
  if (!(eps_bar >= 0.0 && eps_bar <= 1.0)) throw std::invalid_argument("sensing_error_bound: eps_bar outside [0,1]");
  if (observations < 1) throw std::invalid_argument("sensing_error_bound: observations must be >= 1");
  const double chernoff = std::exp(-gain / 4.0);
  return std::pow(chernoff + (1.0 - chernoff) * eps_bar, observations);
}

double semi_analytic_error(double gain, std::span<const double> loss_probs) {
  if (!(gain >= 0.0)) throw std::invalid_argument("semi_analytic_error: negative gain");
  std::vector<double> success(loss_probs.size());
  for (std::size_t k = 0; k < loss_probs.size(); ++k) success[k] = 1.0 - loss_probs[k];
  const ProbabilityVector pmf = poisson_binomial_pmf(success);
  double err = 0.5 * pmf[0];
  for (std::size_t m = 1; m < pmf.size(); ++m) err += pmf[m] * q_function(std::sqrt(m * gain / 2.0));
  return err;
}

}  // namespace edgesense
