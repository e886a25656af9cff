#include "edgesense/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

#include "edgesense/io.hpp"

namespace edgesense {

Policy Policy::parse(const std::string& text) {
  if (text == "adaptive") return {Kind::adaptive, 0};
  if (text == "brute") return {Kind::brute, 0};
  if (text == "brute-mc") return {Kind::brute_mc, 0};
  if (text == "urllc") return {Kind::urllc, 0};
  if (text.rfind("bits:", 0) == 0) {
    const std::string digits = text.substr(5);
    std::size_t used = 0;
    int bits = 0;
    try {
      bits = std::stoi(digits, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != digits.size() || bits < 1 || bits > 52)
      throw std::invalid_argument("policy: bad bit count in '" + text + "'");
    return {Kind::fixed_bits, bits};
  }
  throw std::invalid_argument("unknown policy '" + text + "'");
}

std::string Policy::name() const {
  switch (kind) {
    case Kind::adaptive: return "adaptive";
    case Kind::brute: return "brute";
    case Kind::brute_mc: return "brute-mc";
    case Kind::urllc: return "urllc";
    case Kind::fixed_bits: return "bits:" + std::to_string(bits);
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (!model.model_file && model.dim < 1) throw std::invalid_argument("config: dim must be >= 1");
  if (!(clip > 0.0)) throw std::invalid_argument("config: clip must be positive");
  if (antennas < 1) throw std::invalid_argument("config: antennas must be >= 1");
  if (!std::isfinite(snr_db)) throw std::invalid_argument("config: snr_db must be finite");
  if (blocklength < 1) throw std::invalid_argument("config: blocklength must be >= 1");
  if (observations < 1) throw std::invalid_argument("config: observations must be >= 1");
  if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (!(urllc_threshold > 0.0 && urllc_threshold < 1.0))
    throw std::invalid_argument("config: urllc_threshold outside (0,1)");
}

InferenceModel build_model(const ModelSpec& spec) {
  if (spec.model_file) return load_model_file(*spec.model_file);
  const int d = spec.dim;
  if (d < 1) throw std::invalid_argument("model: dim must be >= 1");
  Eigen::MatrixXd sigma;
  switch (spec.covariance.kind) {
    case CovarianceSpec::Kind::identity:
      sigma = Eigen::MatrixXd::Identity(d, d);
      break;
    case CovarianceSpec::Kind::diagonal:
      if (static_cast<int>(spec.covariance.diagonal.size()) != d)
        throw std::invalid_argument("model: diagonal covariance length differs from dim");
      sigma = Eigen::Map<const Eigen::VectorXd>(spec.covariance.diagonal.data(), d).asDiagonal();
      break;
    case CovarianceSpec::Kind::dense:
      sigma = spec.covariance.dense;
      break;
  }
  return InferenceModel(Eigen::VectorXd::Constant(d, spec.centroid), Eigen::VectorXd::Constant(d, -spec.centroid),
                        std::move(sigma));
}

TradeoffParams make_params(const ExperimentConfig& config) {
  config.validate();
  return TradeoffParams(build_model(config.model), config.clip,
                        ChannelConfig(config.antennas, snr_from_db(config.snr_db), config.blocklength),
                        config.observations, config.blocklength);
}

RateDecision decide(const ExperimentConfig& config, std::optional<Policy> policy) {
  const Policy p = policy.value_or(config.policy);
  const TradeoffParams params = make_params(config);
  switch (p.kind) {
    case Policy::Kind::adaptive: {
      // Flat surrogates can need millions of fixed-step iterations; the
      // concave maximum is then located directly.
      const AscentResult ascent = gradient_ascent(params);
      return round_rate(ascent.converged ? ascent.rate : surrogate_argmax(params), params);
    }
    case Policy::Kind::brute:
      return brute_force_rate(params);
    case Policy::Kind::brute_mc:
      return brute_force_rate(params, [&](int bits) {
        return estimate_error(config, fixed_bits_rate(bits, params), config.trials, config.seed).error;
      });
    case Policy::Kind::urllc:
      return urllc_rate(params, config.urllc_threshold);
    case Policy::Kind::fixed_bits:
      return fixed_bits_rate(p.bits, params);
  }
  throw std::logic_error("decide: unhandled policy");
}

namespace {

InferenceModel receiver_for(const InferenceModel& source, const RateDecision& decision, double clip) {
  return source.with_isotropic_noise(noise_variance(decision.bits_per_feature, clip));
}

}  // namespace

Experiment::Experiment(const ExperimentConfig& config, const RateDecision& decision)
    : config_(config),
      decision_(decision),
      source_(build_model(config.model)),
      receiver_(receiver_for(source_, decision, config.clip)),
      quantizer_(config.clip, decision.bits_per_feature, klt_basis(source_.sigma())),
      channel_(config.antennas, snr_from_db(config.snr_db), config.blocklength),
      sigma_q2_(noise_variance(decision.bits_per_feature, config.clip)) {
  config_.validate();
  if (!(decision.rounded_rate > 0.0)) throw std::invalid_argument("Experiment: decision has no rate");
}

TrialRecord run_trial(const Experiment& experiment, Rng& rng) {
  const ExperimentConfig& cfg = experiment.config();
  const int slots = cfg.observations;
  std::uniform_int_distribution<int> coin(0, 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double noise_sd = std::sqrt(experiment.distortion_variance());

  TrialRecord rec;
  rec.truth = coin(rng) == 0 ? ClassLabel::one : ClassLabel::two;
  rec.bits = experiment.decision().bits_per_feature;
  rec.slot_snr.reserve(static_cast<std::size_t>(slots));
  rec.slot_success.reserve(static_cast<std::size_t>(slots));

  std::vector<double> scores;
  scores.reserve(static_cast<std::size_t>(slots));
  for (int k = 0; k < slots; ++k) {
    const FeatureVector x = sample_feature(experiment.source_model(), rec.truth, rng);
    FeatureVector received;
    if (cfg.noise_model == NoiseModel::quantizer) {
      received = decode(encode(x, experiment.quantizer()), experiment.quantizer());
    } else {
      received = x;
      for (Eigen::Index i = 0; i < received.size(); ++i) received[i] += noise_sd * normal(rng);
    }
    const double snr = sample_post_mrc_snr(experiment.channel(), rng);
    const double loss = packet_loss(snr, experiment.channel().blocklength, experiment.decision().rounded_rate);
    const bool ok = simulate_slot(loss, rng);
    rec.slot_snr.push_back(snr);
    rec.slot_success.push_back(ok);
    if (ok) scores.push_back(discriminant_score(received, experiment.receiver_model()));
  }
  rec.received = static_cast<int>(scores.size());
  if (const auto label = classify(scores)) {
    rec.decision = *label;
  } else {
    rec.guessed = true;
    rec.decision = coin(rng) == 0 ? ClassLabel::one : ClassLabel::two;
  }
  rec.correct = rec.decision == rec.truth;
  return rec;
}

ResultRow estimate_error(const ExperimentConfig& config, const RateDecision& decision, int trials,
                         std::uint64_t seed, unsigned workers) {
  if (trials < 100) throw std::invalid_argument("estimate_error: trials must be >= 100");
  const Experiment experiment(config, decision);
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(trials));

  std::vector<long> errors(workers, 0);
  auto work = [&](unsigned w) {
    const long begin = static_cast<long>(trials) * w / workers;
    const long end = static_cast<long>(trials) * (w + 1) / workers;
    long local = 0;
    for (long i = begin; i < end; ++i) {
      Rng rng = make_stream(seed, static_cast<std::uint64_t>(i));
      if (!run_trial(experiment, rng).correct) ++local;
    }
    errors[w] = local;
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }

  long total = 0;
  for (long e : errors) total += e;

  ResultRow row;
  row.param = "none";
  row.policy = config.policy.name();
  row.bits = decision.bits_per_feature;
  row.rate = decision.rounded_rate;
  row.error = static_cast<double>(total) / trials;
  row.ci95 = 1.96 * std::sqrt(row.error * (1.0 - row.error) / trials);
  row.pred_exact = decision.predicted_exact;
  row.pred_bound = decision.predicted_bound;
  row.trials = trials;
  row.seed = seed;
  return row;
}

SweepParam parse_sweep_param(const std::string& text) {
  if (text == "observations") return SweepParam::observations;
  if (text == "snr-db") return SweepParam::snr_db;
  if (text == "antennas") return SweepParam::antennas;
  if (text == "blocklength") return SweepParam::blocklength;
  throw std::invalid_argument("unknown sweep parameter '" + text + "'");
}

std::string sweep_param_name(SweepParam param) {
  switch (param) {
    case SweepParam::observations: return "observations";
    case SweepParam::snr_db: return "snr-db";
    case SweepParam::antennas: return "antennas";
    case SweepParam::blocklength: return "blocklength";
  }
  return "?";
}

ExperimentConfig with_swept_value(ExperimentConfig config, SweepParam param, double value) {
  auto as_count = [&](double v) {
    if (v != std::floor(v) || v < 1.0 || v > 1e9)
      throw std::invalid_argument(sweep_param_name(param) + " must be a positive integer");
    return static_cast<int>(v);
  };
  switch (param) {
    case SweepParam::observations: config.observations = as_count(value); break;
    case SweepParam::snr_db: config.snr_db = value; break;
    case SweepParam::antennas: config.antennas = as_count(value); break;
    case SweepParam::blocklength: config.blocklength = as_count(value); break;
  }
  return config;
}

std::vector<ResultRow> sweep(const ExperimentConfig& base, SweepParam param, const std::vector<double>& values,
                             const std::vector<Policy>& policies, int trials, std::uint64_t seed, unsigned workers) {
  if (values.empty()) throw std::invalid_argument("sweep: no values");
  if (policies.empty()) throw std::invalid_argument("sweep: no policies");
  std::vector<ResultRow> rows;
  rows.reserve(values.size() * policies.size());
  for (double value : values) {
    for (const Policy& policy : policies) {
      try {
        ExperimentConfig cell = with_swept_value(base, param, value);
        cell.policy = policy;
        cell.trials = trials;
        cell.seed = seed;
        ResultRow row = estimate_error(cell, decide(cell), trials, seed, workers);
        row.param = sweep_param_name(param);
        row.value = value;
        rows.push_back(std::move(row));
      } catch (const std::exception& e) {
        char value_text[64];
        std::snprintf(value_text, sizeof value_text, "%g", value);
        throw std::runtime_error("sweep cell " + sweep_param_name(param) + "=" + value_text + " policy=" +
                                 policy.name() + ": " + e.what());
      }
    }
  }
  return rows;
}

const char* const kCsvHeader = "param,value,policy,bits,rate,error,ci95,pred_exact,pred_bound,trials,seed";

std::string format_csv_row(const ResultRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s,%.10g,%s,%d,%.10g,%.10g,%.10g,%.10g,%.10g,%d,%llu", r.param.c_str(), r.value,
                r.policy.c_str(), r.bits, r.rate, r.error, r.ci95, r.pred_exact, r.pred_bound, r.trials,
                static_cast<unsigned long long>(r.seed));
  return buf;
}

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const ResultRow& r : rows) {
    out += format_csv_row(r);
    out += '\n';
  }
  return out;
}

}  // namespace edgesense
