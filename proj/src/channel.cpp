#include "edgesense/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace edgesense {

namespace {

constexpr double kTailMass = 1e-10;
constexpr double kMaxQuadratureError = 1e-8;

void check_rate(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw std::invalid_argument("coding rate must be positive and finite");
}

double erlang_pdf(double snr, int shape, double mean_snr) {
  if (snr <= 0.0) return shape == 1 ? 1.0 / mean_snr : 0.0;
  const double t = snr / mean_snr;
  return std::exp((shape - 1) * std::log(t) - t - std::lgamma(static_cast<double>(shape))) / mean_snr;
}

}  // namespace

ChannelConfig::ChannelConfig(int antennas_, double snr_linear_, int blocklength_)
    : antennas(antennas_), snr_linear(snr_linear_), blocklength(blocklength_) {
  if (antennas < 1) throw std::invalid_argument("ChannelConfig: antennas must be >= 1");
  if (!(snr_linear > 0.0) || !std::isfinite(snr_linear)) throw std::invalid_argument("ChannelConfig: snr must be > 0");
  if (blocklength < 1) throw std::invalid_argument("ChannelConfig: blocklength must be >= 1");
}

double snr_from_db(double db) { return std::pow(10.0, db / 10.0); }

double sample_post_mrc_snr(const ChannelConfig& cfg, Rng& rng) {
  std::exponential_distribution<double> unit(1.0);
  double gain = 0.0;
  for (int l = 0; l < cfg.antennas; ++l) gain += unit(rng);
  return cfg.snr_linear * gain;
}

double capacity(double snr) {
  if (!(snr >= 0.0)) throw std::invalid_argument("capacity: negative snr");
  return std::log2(1.0 + snr);
}

double dispersion(double snr) {
  if (!(snr >= 0.0)) throw std::invalid_argument("dispersion: negative snr");
  const double log2e = std::numbers::log2e;
  return snr * (2.0 + snr) / ((1.0 + snr) * (1.0 + snr)) * log2e * log2e;
}

double packet_loss(double snr, int blocklength, double rate) {
  if (!(snr >= 0.0)) throw std::invalid_argument("packet_loss: negative snr");
  if (blocklength < 1) throw std::invalid_argument("packet_loss: blocklength must be >= 1");
  check_rate(rate);
  if (snr == 0.0) return 1.0;
  return q_function(std::sqrt(blocklength / dispersion(snr)) * (capacity(snr) - rate));
}

QuadratureResult avg_packet_loss_exact_detailed(const ChannelConfig& cfg, double rate) {
  check_rate(rate);
  const int shape = cfg.antennas;
  const double mean = cfg.snr_linear;

  // Truncate where the Erlang tail mass drops below kTailMass.
  double x_hi = shape + 1.0;
  while (log_regularized_upper_gamma(shape, x_hi) > std::log(kTailMass)) x_hi *= 1.5;
  const double snr_hi = mean * x_hi;

  // Breakpoints around the decoding threshold 2^rate - 1, scaled by the
  // width of the Q transition there.
  const double threshold = std::exp2(rate) - 1.0;
  const double width = std::sqrt(dispersion(threshold) / cfg.blocklength) * (1.0 + threshold) / std::numbers::log2e;
  std::vector<double> points{0.0, snr_hi};
  for (double k : {-10.0, -4.0, -1.0, 0.0, 1.0, 4.0, 10.0}) {
    const double p = threshold + k * width;
    if (p > 0.0 && p < snr_hi) points.push_back(p);
  }
  std::sort(points.begin(), points.end());

  auto integrand = [&](double snr) {
    return packet_loss(std::max(snr, 0.0), cfg.blocklength, rate) * erlang_pdf(snr, shape, mean);
  };

  QuadratureResult out;
  out.error_estimate = kTailMass;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (points[i + 1] <= points[i]) continue;
    double err = 0.0;
    out.value += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, points[i], points[i + 1],
                                                                               15, 1e-10, &err);
    out.error_estimate += err;
  }
  out.value = std::clamp(out.value, 0.0, 1.0);
  if (out.error_estimate > kMaxQuadratureError)
  {
    char msg[96];
    std::snprintf(msg, sizeof msg, "avg_packet_loss_exact: quadrature did not converge (error estimate %.3g)",
                  out.error_estimate);
    throw std::runtime_error(msg);
  }
  return out;
}

double avg_packet_loss_exact(const ChannelConfig& cfg, double rate) {
  return avg_packet_loss_exact_detailed(cfg, rate).value;
}

double avg_packet_loss_approx(const ChannelConfig& cfg, double rate) {
  check_rate(rate);
  return regularized_lower_gamma(cfg.antennas, std::expm1(rate * std::numbers::ln2) / cfg.snr_linear);
}

bool simulate_slot(double loss_prob, Rng& rng) {
  if (!(loss_prob >= 0.0 && loss_prob <= 1.0)) throw std::invalid_argument("simulate_slot: probability outside [0,1]");
  std::bernoulli_distribution decoded(1.0 - loss_prob);
  return decoded(rng);
}

}  // namespace edgesense
