#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "edgesense/channel.hpp"
#include "edgesense/gmm.hpp"
#include "edgesense/optimizer.hpp"
#include "edgesense/quant.hpp"

namespace edgesense {

/// Covariance of the synthetic model: identity, a diagonal, or a dense matrix.
struct CovarianceSpec {
  enum class Kind { identity, diagonal, dense };
  Kind kind = Kind::identity;
  std::vector<double> diagonal;
  Eigen::MatrixXd dense;
};

struct ModelSpec {
  int dim = 50;
  double centroid = 0.1;  // class means at +centroid*1 and -centroid*1
  CovarianceSpec covariance;
  /// When set, mu1/mu2/sigma come from this JSON file instead.
  std::optional<std::string> model_file;
};

struct Policy {
  enum class Kind { adaptive, brute, brute_mc, urllc, fixed_bits };
  Kind kind = Kind::adaptive;
  int bits = 0;  // fixed_bits only

  /// Accepts adaptive | brute | brute-mc | urllc | bits:<R>.
  static Policy parse(const std::string& text);
  std::string name() const;
};

enum class NoiseModel {
  quantizer,  // run features through the real encoder/decoder
  lemma1,     // add isotropic Gaussian noise of the predicted variance
};

/// Defaults reproduce the synthetic-data setup: d = 50, centroids +-0.1,
/// identity covariance, K = 10, L = 4, N = 100, 2 dB, U = 5, 10^4 trials.
struct ExperimentConfig {
  ModelSpec model;
  double clip = 5.0;
  int antennas = 4;
  double snr_db = 2.0;
  int blocklength = 100;
  int observations = 10;
  Policy policy;
  int trials = 10000;
  std::uint64_t seed = 1;
  NoiseModel noise_model = NoiseModel::quantizer;
  double urllc_threshold = 1e-5;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

InferenceModel build_model(const ModelSpec& spec);
/// max_blocklength is pinned to the configured blocklength.
TradeoffParams make_params(const ExperimentConfig& config);

/// Rate decision of `policy` (defaults to config.policy). The adaptive policy
/// uses gradient ascent and falls back to surrogate_argmax when the ascent
/// hits its iteration cap. The brute-mc evaluator runs config.trials Monte
/// Carlo trials per bit level.
RateDecision decide(const ExperimentConfig& config, std::optional<Policy> policy = std::nullopt);

struct TrialRecord {
  ClassLabel truth = ClassLabel::one;
  int bits = 0;
  std::vector<double> slot_snr;
  std::vector<bool> slot_success;
  int received = 0;  // M
  ClassLabel decision = ClassLabel::one;
  bool guessed = false;  // M = 0, decision drawn uniformly
  bool correct = false;
};

/// Everything one trial needs, prepared once per (config, decision).
class Experiment {
public:
  Experiment(const ExperimentConfig& config, const RateDecision& decision);

  const ExperimentConfig& config() const { return config_; }
  const RateDecision& decision() const { return decision_; }
  const InferenceModel& source_model() const { return source_; }
  const InferenceModel& receiver_model() const { return receiver_; }
  const QuantizerConfig& quantizer() const { return quantizer_; }
  const ChannelConfig& channel() const { return channel_; }
  double distortion_variance() const { return sigma_q2_; }

private:
  ExperimentConfig config_;
  RateDecision decision_;
  InferenceModel source_;
  InferenceModel receiver_;  // Sigma + sigma_q2 I, matched to decoded features
  QuantizerConfig quantizer_;
  ChannelConfig channel_;
  double sigma_q2_ = 0.0;
};

/// One end-to-end sensing episode: draw a class, K features, quantize,
/// transmit over K fading slots, score what arrived, decide.
TrialRecord run_trial(const Experiment& experiment, Rng& rng);

struct ResultRow {
  std::string param;
  double value = 0.0;
  std::string policy;
  int bits = 0;
  double rate = 0.0;
  double error = 0.0;
  double ci95 = 0.0;
  double pred_exact = 0.0;
  double pred_bound = 0.0;
  int trials = 0;
  std::uint64_t seed = 0;
};

/// Monte Carlo error estimate. Trial i uses make_stream(seed, i), so the row
/// does not depend on `workers` (0 = hardware concurrency).
ResultRow estimate_error(const ExperimentConfig& config, const RateDecision& decision, int trials,
                         std::uint64_t seed, unsigned workers = 0);

enum class SweepParam { observations, snr_db, antennas, blocklength };
SweepParam parse_sweep_param(const std::string& text);
std::string sweep_param_name(SweepParam param);
ExperimentConfig with_swept_value(ExperimentConfig config, SweepParam param, double value);

/// Rows ordered by value, then policy, in the order given.
std::vector<ResultRow> sweep(const ExperimentConfig& base, SweepParam param, const std::vector<double>& values,
                             const std::vector<Policy>& policies, int trials, std::uint64_t seed,
                             unsigned workers = 0);

extern const char* const kCsvHeader;
std::string format_csv_row(const ResultRow& row);
std::string to_csv(const std::vector<ResultRow>& rows);

}  // namespace edgesense
