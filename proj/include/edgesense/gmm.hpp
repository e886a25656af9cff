#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "edgesense/numerics.hpp"

namespace edgesense {

using FeatureVector = Eigen::VectorXd;

enum class ClassLabel { one = 1, two = 2 };

/// Binary Gaussian class-conditional model N(mu_l, Sigma) with a shared
/// covariance. Immutable after construction; every derived quantity the
/// scorer, sampler and gain formulas need is cached here.
class InferenceModel {
public:
  /// Throws std::invalid_argument on inconsistent dimensions or a covariance
  /// that is not symmetric positive definite (min eigenvalue <= 1e-12).
  InferenceModel(Eigen::VectorXd mu1, Eigen::VectorXd mu2, Eigen::MatrixXd sigma);

  /// Centroids at +magnitude*1 and -magnitude*1 with identity covariance.
  static InferenceModel symmetric_isotropic(int dim, double magnitude);

  int dim() const { return static_cast<int>(mu1_.size()); }
  const Eigen::VectorXd& mu1() const { return mu1_; }
  const Eigen::VectorXd& mu2() const { return mu2_; }
  const Eigen::MatrixXd& sigma() const { return sigma_; }
  const Eigen::MatrixXd& sigma_inv() const { return sigma_inv_; }
  const Eigen::MatrixXd& cholesky_factor() const { return chol_; }
  bool diagonal_covariance() const { return diagonal_; }

  /// Eigenvalues of Sigma and the centroid gap expressed in its eigenbasis.
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Eigen::VectorXd& gap_in_eigenbasis() const { return gap_eigen_; }

  /// Linear discriminant: score(x) = weights.x + offset.
  const Eigen::VectorXd& score_weights() const { return weights_; }
  double score_offset() const { return offset_; }

  /// Same centroids, covariance Sigma + sigma_q2*I.
  InferenceModel with_isotropic_noise(double sigma_q2) const;

private:
  Eigen::VectorXd mu1_, mu2_;
  Eigen::MatrixXd sigma_, sigma_inv_, chol_;
  Eigen::VectorXd eigenvalues_, gap_eigen_;
  Eigen::VectorXd weights_;
  double offset_ = 0.0;
  bool diagonal_ = false;
};

/// Half the squared Mahalanobis distance between the two centroids.
double discriminant_gain(const InferenceModel& model);

/// Discriminant gain of features corrupted by isotropic noise of variance
/// sigma_q2, i.e. evaluated under Sigma + sigma_q2*I.
double effective_discriminant_gain(const InferenceModel& model, double sigma_q2);

/// ||(Sigma + sigma_q2*I)^{-1} (mu1 - mu2)||^2; drives dD/dsigma_q2.
double inverse_gap_norm_sq(const InferenceModel& model, double sigma_q2);

struct GainReductionBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Bracket on the relative gain loss (D0 - D(sigma_q2)) / D0.
GainReductionBounds dg_reduction_bounds(const InferenceModel& model, double sigma_q2);

/// Minus-log likelihood ratio -ln p1(x)/p2(x). Negative favours class one.
double discriminant_score(const FeatureVector& x, const InferenceModel& model);

FeatureVector sample_feature(const InferenceModel& model, ClassLabel label, Rng& rng);
std::vector<FeatureVector> sample_features(const InferenceModel& model, ClassLabel label,
                                           int count, Rng& rng);

/// Sign rule on the summed scores: class one iff the sum is strictly
/// negative. An empty sequence carries no information and yields nullopt.
std::optional<ClassLabel> classify(std::span<const double> scores);

/// Single-observation Bayes error Q(sqrt(D/2)).
double bayes_error_single(double gain);

/// Chernoff-type bound (e^{-D/4} + (1 - e^{-D/4}) eps_bar)^K on the error
/// after K independent transmissions with average loss eps_bar.
double sensing_error_bound(double gain, double eps_bar, int observations);

/// Exact error of the sequential detector when each slot is lost
/// independently: sum_m Pr(M=m) Q(sqrt(mD/2)), with 1/2 for m = 0.
double semi_analytic_error(double gain, std::span<const double> loss_probs);

}  // namespace edgesense
