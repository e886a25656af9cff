#include "edgesense/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/tools/minima.hpp>

#include "edgesense/quant.hpp"

namespace edgesense {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Closed-form loss at the upper end of the ascent domain.
constexpr double kUpperLossGap = 1e-9;

double decoding_threshold(double rate, const ChannelConfig& channel) {
  return std::expm1(rate * std::numbers::ln2) / channel.snr_linear;
}

void check_domain(double rate, const TradeoffParams& params) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw std::domain_error("coding rate must be positive and finite");
  if (rate < params.min_rate() * (1.0 - 1e-12))
    throw std::domain_error("coding rate " + std::to_string(rate) + " is below the one-bit level " +
                            std::to_string(params.min_rate()));
}

}  // namespace

TradeoffParams::TradeoffParams(InferenceModel model_, double clip_, ChannelConfig channel_, int observations_,
                               int max_blocklength_)
    : model(std::move(model_)),
      clip(clip_),
      channel(channel_),
      observations(observations_),
      max_blocklength(max_blocklength_) {
  if (!(clip > 0.0)) throw std::invalid_argument("TradeoffParams: clip must be positive");
  if (observations < 1) throw std::invalid_argument("TradeoffParams: observations must be >= 1");
  if (channel.blocklength > max_blocklength)
    throw std::invalid_argument("TradeoffParams: blocklength exceeds max_blocklength");
  // Re-run the channel checks in case the struct was filled field by field.
  channel = ChannelConfig(channel.antennas, channel.snr_linear, channel.blocklength);
}

double TradeoffParams::upper_rate_limit() const {
  const int shape = channel.antennas;
  const double target = std::log(kUpperLossGap);
  double lo = 0.0;
  double hi = shape + 1.0;
  while (log_regularized_upper_gamma(shape, hi) > target) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (log_regularized_upper_gamma(shape, mid) > target ? lo : hi) = mid;
  }
  return std::max(min_rate(), std::log2(1.0 + channel.snr_linear * hi));
}

double sigma_q2_of_rate(double rate, const TradeoffParams& params) {
  if (!(rate > 0.0)) throw std::domain_error("sigma_q2_of_rate: rate must be positive");
  const double bits = params.channel.blocklength * rate / params.dim();
  const double steps = std::expm1(bits * std::numbers::ln2);
  return params.clip * params.clip / (3.0 * steps * steps);
}

double gain_of_rate(double rate, const TradeoffParams& params) {
  return effective_discriminant_gain(params.model, sigma_q2_of_rate(rate, params));
}

double surrogate_source_term(double rate, const TradeoffParams& params) {
  const double gain = gain_of_rate(rate, params);
  if (!(gain > 0.0)) return kNegInf;
  return std::log(-std::expm1(-gain / 4.0));
}

double surrogate_channel_term(double rate, const TradeoffParams& params) {
  const double beta = decoding_threshold(rate, params.channel);
  if (!std::isfinite(beta)) return kNegInf;
  return log_regularized_upper_gamma(params.channel.antennas, beta);
}

double surrogate(double rate, const TradeoffParams& params) {
  check_domain(rate, params);
  return surrogate_source_term(rate, params) + surrogate_channel_term(rate, params);
}

double surrogate_exact(double rate, const TradeoffParams& params) {
  check_domain(rate, params);
  const double loss = avg_packet_loss_exact(params.channel, rate);
  if (loss >= 1.0) return kNegInf;
  return surrogate_source_term(rate, params) + std::log1p(-loss);
}

double surrogate_source_gradient(double rate, const TradeoffParams& params) {
  const double n = params.channel.blocklength;
  const double d = params.dim();
  const double bits = n * rate / d;
  const double steps = std::expm1(bits * std::numbers::ln2);  // 2^R - 1
  const double sigma_q2 = params.clip * params.clip / (3.0 * steps * steps);
  // D' = N U^2 2^R ln2 / (3 (2^R - 1)^3 d) * ||(Sigma + sigma_q2 I)^{-1}(mu1 - mu2)||^2
  const double gain_slope = n * params.clip * params.clip * (steps + 1.0) * std::numbers::ln2 /
                            (3.0 * steps * steps * steps * d) * inverse_gap_norm_sq(params.model, sigma_q2);
  const double gain = effective_discriminant_gain(params.model, sigma_q2);
  return gain_slope / (4.0 * std::expm1(gain / 4.0));
}

double surrogate_channel_gradient(double rate, const TradeoffParams& params) {
  const int shape = params.channel.antennas;
  const double snr = params.channel.snr_linear;
  const double steps = std::expm1(rate * std::numbers::ln2);
  const double beta = steps / snr;
  // -2^R (2^R - 1)^{L-1} ln2 e^{-beta} / (snr^L Gamma(L, beta)), in log space.
  const double log_upper_gamma = std::lgamma(static_cast<double>(shape)) + log_regularized_upper_gamma(shape, beta);
  const double log_magnitude = rate * std::numbers::ln2 + (shape - 1) * std::log(steps) +
                               std::log(std::numbers::ln2) - beta - shape * std::log(snr) - log_upper_gamma;
  return -std::exp(log_magnitude);
}

double surrogate_gradient(double rate, const TradeoffParams& params) {
  check_domain(rate, params);
  return surrogate_source_gradient(rate, params) + surrogate_channel_gradient(rate, params);
}

AscentResult gradient_ascent(const TradeoffParams& params, const OptimizerSettings& settings) {
  if (!(settings.step > 0.0)) throw std::invalid_argument("gradient_ascent: step must be positive");
  if (!(settings.grad_tol > 0.0)) throw std::invalid_argument("gradient_ascent: grad_tol must be positive");
  if (settings.max_iters < 1) throw std::invalid_argument("gradient_ascent: max_iters must be >= 1");

  const double lo = params.min_rate();
  const double hi = std::max(lo, params.upper_rate_limit());
  double rate = settings.init_rate.value_or(4.0 * params.dim() / params.max_blocklength);
  if (!(rate > 0.0)) throw std::invalid_argument("gradient_ascent: initial rate must be positive");
  rate = std::clamp(rate, lo, hi);

  AscentResult result;
  if (settings.record_trace) result.trace.push_back(rate);
  for (int it = 0; it < settings.max_iters; ++it) {
    const double grad = surrogate_gradient(rate, params);
    result.gradient = grad;
    result.iterations = it;
    const bool pinned = (rate <= lo && grad < 0.0) || (rate >= hi && grad > 0.0);
    if (std::abs(grad) <= settings.grad_tol || pinned) {
      result.converged = true;
      break;
    }
    rate = std::clamp(rate + settings.step * grad, lo, hi);
    if (settings.record_trace) result.trace.push_back(rate);
    result.iterations = it + 1;
  }
  result.rate = rate;
  if (!result.converged) {
    result.gradient = surrogate_gradient(rate, params);
    result.converged = std::abs(result.gradient) <= settings.grad_tol;
  }
  return result;
}

double surrogate_argmax(const TradeoffParams& params) {
  const double lo = params.min_rate();
  const double hi = std::max(lo, params.upper_rate_limit());
  if (hi <= lo) return lo;
  return boost::math::tools::brent_find_minima([&](double r) { return -surrogate(r, params); }, lo, hi,
                                               std::numeric_limits<double>::digits / 2)
      .first;
}

RateDecision decision_for_bits(int bits, double continuous_rate, const TradeoffParams& params) {
  if (bits < 1) throw std::invalid_argument("decision_for_bits: bits must be >= 1");
  RateDecision out;
  out.continuous_rate = continuous_rate;
  out.bits_per_feature = bits;
  out.rounded_rate = static_cast<double>(bits) * params.dim() / params.max_blocklength;
  const double gain = effective_discriminant_gain(params.model, noise_variance(bits, params.clip));
  const double loss = avg_packet_loss_exact(params.channel, out.rounded_rate);
  const std::vector<double> losses(static_cast<std::size_t>(params.observations), loss);
  out.predicted_bound = sensing_error_bound(gain, loss, params.observations);
  out.predicted_exact = semi_analytic_error(gain, losses);
  return out;
}

RateDecision round_rate(double continuous_rate, const TradeoffParams& params) {
  if (!(continuous_rate > 0.0)) throw std::invalid_argument("round_rate: rate must be positive");
  const double scaled = continuous_rate * params.max_blocklength / params.dim();
  const int bits = std::max(static_cast<int>(std::floor(scaled + 0.5)), 1);
  return decision_for_bits(bits, continuous_rate, params);
}

int max_bit_level(const TradeoffParams& params) {
  for (int bits = 1; bits < 52; ++bits) {
    const double rate = static_cast<double>(bits) * params.dim() / params.max_blocklength;
    if (avg_packet_loss_approx(params.channel, rate) > 0.999) return bits;
  }
  return 52;
}

RateDecision brute_force_rate(const TradeoffParams& params, const BitEvaluator& evaluator) {
  const int top = max_bit_level(params);
  int best_bits = 1;
  double best = evaluator(1);
  for (int bits = 2; bits <= top; ++bits) {
    const double err = evaluator(bits);
    if (err < best) {
      best = err;
      best_bits = bits;
    }
  }
  const double rate = static_cast<double>(best_bits) * params.dim() / params.max_blocklength;
  return decision_for_bits(best_bits, rate, params);
}

RateDecision brute_force_rate(const TradeoffParams& params) {
  return brute_force_rate(params, [&](int bits) {
    const double rate = static_cast<double>(bits) * params.dim() / params.max_blocklength;
    return decision_for_bits(bits, rate, params).predicted_exact;
  });
}

RateDecision urllc_rate(const TradeoffParams& params, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("urllc_rate: threshold outside (0,1)");
  const auto loss_at = [&](double rate) { return avg_packet_loss_approx(params.channel, rate); };

  double lo = 0.0;
  double hi = 1.0;
  while (loss_at(hi) <= threshold) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (loss_at(mid) <= threshold ? lo : hi) = mid;
  }

  const double per_bit = static_cast<double>(params.dim()) / params.max_blocklength;
  int bits = static_cast<int>(std::floor(lo / per_bit));
  while (loss_at((bits + 1) * per_bit) <= threshold) ++bits;
  while (bits >= 1 && loss_at(bits * per_bit) > threshold) --bits;

  const bool feasible = bits >= 1;
  RateDecision out = decision_for_bits(std::max(bits, 1), lo, params);
  out.meets_loss_target = feasible;
  return out;
}

RateDecision fixed_bits_rate(int bits, const TradeoffParams& params) {
  if (bits < 1) throw std::invalid_argument("fixed_bits_rate: bits must be >= 1");
  return decision_for_bits(bits, static_cast<double>(bits) * params.dim() / params.max_blocklength, params);
}

double cnn_log_accuracy(double bits) { return -10.0 / (bits * bits * bits) - 0.2; }

double empirical_accuracy_surrogate(double rate, const LogAccuracyModel& log_accuracy, const TradeoffParams& params) {
  if (!(rate > 0.0)) throw std::domain_error("empirical_accuracy_surrogate: rate must be positive");
  const double bits = params.channel.blocklength * rate / params.dim();
  return log_accuracy(bits) + surrogate_channel_term(rate, params);
}

double maximize_accuracy_surrogate(const LogAccuracyModel& log_accuracy, const TradeoffParams& params) {
  auto loss = [&](double r) { return -empirical_accuracy_surrogate(r, log_accuracy, params); };
  return boost::math::tools::brent_find_minima(loss, 1e-6 * params.min_rate(), params.upper_rate_limit(),
                                               std::numeric_limits<double>::digits / 2)
      .first;
}

}  // namespace edgesense
