#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "edgesense/channel.hpp"
#include "edgesense/gmm.hpp"

namespace edgesense {

/// Everything the rate optimizer needs. The feasible rate domain is
/// [d/N, upper_rate_limit()], the lower end being one bit per feature.
struct TradeoffParams {
  InferenceModel model;
  double clip = 5.0;
  ChannelConfig channel;
  int observations = 10;
  int max_blocklength = 100;

  TradeoffParams(InferenceModel model, double clip, ChannelConfig channel, int observations, int max_blocklength);

  int dim() const { return model.dim(); }
  double min_rate() const { return static_cast<double>(dim()) / channel.blocklength; }
  /// Rate where the closed-form average loss reaches 1 - 1e-9.
  double upper_rate_limit() const;
};

struct OptimizerSettings {
  double step = 0.01;
  double grad_tol = 1e-6;
  int max_iters = 100000;
  /// Defaults to the 4-bit level 4d/N_max.
  std::optional<double> init_rate;
  bool record_trace = false;
};

struct RateDecision {
  double continuous_rate = 0.0;
  int bits_per_feature = 1;
  double rounded_rate = 0.0;
  double predicted_bound = 1.0;  // (e^{-D/4} + (1-e^{-D/4}) eps)^K
  double predicted_exact = 0.5;  // semi-analytic error
  /// Only meaningful for the reliability-target policy: false when even one
  /// bit per feature misses the loss target.
  bool meets_loss_target = true;
};

struct AscentResult {
  double rate = 0.0;
  double gradient = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;  // iterates, filled when record_trace is set
};

/// Distortion variance U^2 / (3 (2^{N R_c / d} - 1)^2) at a real coding rate.
double sigma_q2_of_rate(double rate, const TradeoffParams& params);

/// Effective discriminant gain D(R_c).
double gain_of_rate(double rate, const TradeoffParams& params);

/// ln(1 - e^{-D(R_c)/4}).
double surrogate_source_term(double rate, const TradeoffParams& params);
/// ln(1 - eps_bar(R_c)) with the closed-form average loss.
double surrogate_channel_term(double rate, const TradeoffParams& params);

/// phi(R_c) = surrogate_source_term + surrogate_channel_term. Returns -inf
/// when a factor underflows; throws std::domain_error below the one-bit rate.
double surrogate(double rate, const TradeoffParams& params);

/// Same objective with the quadrature-evaluated average loss in place of
/// the closed form.
double surrogate_exact(double rate, const TradeoffParams& params);

/// Closed-form d/dR_c of the source term.
double surrogate_source_gradient(double rate, const TradeoffParams& params);
/// Closed-form d/dR_c of the channel term (log-space evaluation).
double surrogate_channel_gradient(double rate, const TradeoffParams& params);
double surrogate_gradient(double rate, const TradeoffParams& params);

/// Projected gradient ascent R_c <- clamp(R_c + step * phi'(R_c)).
AscentResult gradient_ascent(const TradeoffParams& params, const OptimizerSettings& settings = {});

/// Brent maximizer of the surrogate over [d/N, R_hi]; the surrogate is
/// unimodal there, so this is the point gradient ascent converges to.
double surrogate_argmax(const TradeoffParams& params);

/// Fills the predicted-error fields of a decision at `bits` per feature.
RateDecision decision_for_bits(int bits, double continuous_rate, const TradeoffParams& params);

/// R* = max(round_half_up(R_c N_max / d), 1), rate R* d / N_max.
RateDecision round_rate(double continuous_rate, const TradeoffParams& params);

/// Largest bit level considered by exhaustive search: the first level whose
/// closed-form average loss exceeds 0.999.
int max_bit_level(const TradeoffParams& params);

using BitEvaluator = std::function<double(int bits)>;

/// Minimizer of `evaluator` over bits = 1..max_bit_level; ties go to fewer bits.
RateDecision brute_force_rate(const TradeoffParams& params, const BitEvaluator& evaluator);
/// Default evaluator: the semi-analytic error at each bit level.
RateDecision brute_force_rate(const TradeoffParams& params);

/// Highest rate whose average loss stays <= threshold, rounded down to a
/// whole bit level (floor of one bit, flagged when infeasible).
RateDecision urllc_rate(const TradeoffParams& params, double threshold = 1e-5);

RateDecision fixed_bits_rate(int bits, const TradeoffParams& params);

using LogAccuracyModel = std::function<double(double bits)>;

/// Fitted log-accuracy of the multi-view CNN: ln a(R) = -10 R^{-3} - 0.2.
double cnn_log_accuracy(double bits);

/// log_accuracy(N R_c / d) + ln(1 - eps_bar(R_c)).
double empirical_accuracy_surrogate(double rate, const LogAccuracyModel& log_accuracy, const TradeoffParams& params);

/// Brent maximizer of empirical_accuracy_surrogate on (0, R_hi].
double maximize_accuracy_surrogate(const LogAccuracyModel& log_accuracy, const TradeoffParams& params);

}  // namespace edgesense
