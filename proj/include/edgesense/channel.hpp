#pragma once

#include "edgesense/numerics.hpp"

namespace edgesense {

/// SIMO Rayleigh link seen at packet granularity.
struct ChannelConfig {
  int antennas = 1;          // L receive antennas, MRC combined
  double snr_linear = 1.0;   // transmit SNR P0/N0
  int blocklength = 1;       // N channel uses per slot

  ChannelConfig() = default;
  /// Throws std::invalid_argument unless L >= 1, snr > 0, N >= 1.
  ChannelConfig(int antennas, double snr_linear, int blocklength);
};

double snr_from_db(double db);

/// One post-combining SNR draw: snr * sum of L unit-mean exponentials,
/// i.e. Erlang(L, 1/snr).
double sample_post_mrc_snr(const ChannelConfig& cfg, Rng& rng);

/// log2(1 + snr), bits per channel use.
double capacity(double snr);

/// snr (2 + snr) / (1 + snr)^2 * (log2 e)^2.
double dispersion(double snr);

/// Normal-approximation block error Q(sqrt(N/V) (C - rate)). Loss is 1 at
/// zero SNR.
double packet_loss(double snr, int blocklength, double rate);

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// Fading-averaged packet loss, integrating packet_loss against the Erlang
/// density. Throws std::runtime_error if the error estimate exceeds 1e-8.
QuadratureResult avg_packet_loss_exact_detailed(const ChannelConfig& cfg, double rate);
double avg_packet_loss_exact(const ChannelConfig& cfg, double rate);

/// Closed-form average loss 1 - Gamma(L, beta)/Gamma(L) with
/// beta = (2^rate - 1)/snr. Independent of the blocklength.
double avg_packet_loss_approx(const ChannelConfig& cfg, double rate);

/// Bernoulli packet realization: true (decoded) with probability 1 - loss.
bool simulate_slot(double loss_prob, Rng& rng);

}  // namespace edgesense
