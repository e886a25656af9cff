#include "edgesense/validate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "edgesense/harness.hpp"
#include "edgesense/quant.hpp"

namespace edgesense {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

CheckResult make_check(std::string name, bool passed, std::string measured, std::string expected) {
  return {std::move(name), passed, std::move(measured), std::move(expected)};
}

TradeoffParams symmetric_params(int antennas, double snr_db, int blocklength, int observations, double clip = 5.0,
                                int dim = 50, double centroid = 0.1) {
  return TradeoffParams(InferenceModel::symmetric_isotropic(dim, centroid), clip,
                        ChannelConfig(antennas, snr_from_db(snr_db), blocklength), observations, blocklength);
}

CheckResult check_discriminant_gain() {
  const double gain = discriminant_gain(InferenceModel::symmetric_isotropic(50, 0.1));
  return make_check("discriminant-gain", std::abs(gain - 1.0) <= 1e-12, "D0 = " + fmt(gain), "|D0 - 1| <= 1e-12");
}

CheckResult check_gain_reduction_bounds(std::uint64_t seed) {
  Rng rng = make_stream(seed, 0x7431);
  std::uniform_int_distribution<int> dim_dist(2, 20);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double noise_levels[] = {1e-6, 1e-4, 1e-2, 0.1, 1.0, 10.0, 100.0};
  int cases = 0;
  int violations = 0;
  double worst = -std::numeric_limits<double>::infinity();  // max of (lower - rel, rel - upper)
  for (int trial = 0; trial < 100; ++trial) {
    const int d = dim_dist(rng);
    Eigen::MatrixXd sigma = random_covariance(d, 0.1, 10.0, rng);
    Eigen::VectorXd mu1(d), mu2(d);
    for (int i = 0; i < d; ++i) {
      mu1[i] = normal(rng);
      mu2[i] = normal(rng);
    }
    const InferenceModel model(mu1, mu2, sigma);
    const double gain0 = discriminant_gain(model);
    for (double s : noise_levels) {
      const double rel = (gain0 - effective_discriminant_gain(model, s)) / gain0;
      const GainReductionBounds b = dg_reduction_bounds(model, s);
      worst = std::max({worst, b.lower - rel, rel - b.upper});
      if (rel < b.lower - 1e-12 || rel > b.upper + 1e-12) ++violations;
      ++cases;
    }
  }
  return make_check("gain-reduction-bounds", violations == 0,
                    std::to_string(violations) + "/" + std::to_string(cases) + " violations, worst margin " + fmt(worst),
                    "lower <= (D0-D)/D0 <= upper in every case");
}

CheckResult check_gain_reduction_decay() {
  const InferenceModel model = InferenceModel::symmetric_isotropic(50, 0.1);
  const double gain0 = discriminant_gain(model);
  auto scaled_loss = [&](int bits) {
    return (gain0 - effective_discriminant_gain(model, noise_variance(bits, 5.0))) * std::pow(4.0, bits);
  };
  const double anchor = scaled_loss(8);
  double lo = 1.0;
  double hi = 1.0;
  for (int bits = 4; bits <= 12; ++bits) {
    const double r = scaled_loss(bits) / anchor;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return make_check("gain-reduction-decay", lo >= 1.0 / 1.5 && hi <= 1.5,
                    "4^R (D0-D) / value at R=8 in [" + fmt(lo) + ", " + fmt(hi) + "] for R=4..12",
                    "within [0.667, 1.5]");
}

CheckResult check_bound_vs_exact() {
  int violations = 0;
  int cases = 0;
  for (double gain : {0.05, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0}) {
    for (double loss : {0.0, 1e-3, 0.01, 0.1, 0.3, 0.5, 0.9, 0.99}) {
      for (int k : {1, 2, 3, 5, 10, 20, 50}) {
        const std::vector<double> losses(static_cast<std::size_t>(k), loss);
        const double exact = semi_analytic_error(gain, losses);
        if (sensing_error_bound(gain, loss, k) < exact * (1.0 - 1e-12)) ++violations;
        ++cases;
      }
    }
  }
  return make_check("bound-vs-exact", violations == 0,
                    std::to_string(violations) + "/" + std::to_string(cases) + " grid points with bound < exact",
                    "bound >= exact everywhere");
}

CheckResult check_monte_carlo(std::uint64_t seed, unsigned workers) {
  ExperimentConfig config;
  const RateDecision decision = decide(config);
  const ResultRow row = estimate_error(config, decision, 10000, seed, workers);
  const double p = decision.predicted_exact;
  const double band = 3.0 * std::sqrt(p * (1.0 - p) / row.trials);
  const bool inside = std::abs(row.error - p) <= band && decision.predicted_bound >= p;
  return make_check("monte-carlo-vs-exact", inside,
                    "MC " + fmt(row.error) + ", exact " + fmt(p) + ", bound " + fmt(decision.predicted_bound) +
                        " at " + std::to_string(decision.bits_per_feature) + " bits",
                    "|MC - exact| <= " + fmt(band) + " and bound >= exact");
}

struct ApproximationErrors {
  double max_relative = 0.0;
  double max_absolute = 0.0;
  int points = 0;
};

/// Closed form vs quadrature over coding rates whose exact loss at the
/// reference blocklength lies in [1e-3, 0.99].
ApproximationErrors approximation_errors(int blocklength, int reference_blocklength) {
  const ChannelConfig ref(4, snr_from_db(1.0), reference_blocklength);
  const ChannelConfig cfg(4, snr_from_db(1.0), blocklength);
  ApproximationErrors out;
  for (double rate = 0.02; rate <= 6.0; rate += 0.01) {
    const double ref_loss = avg_packet_loss_exact(ref, rate);
    if (ref_loss < 1e-3 || ref_loss > 0.99) continue;
    const double exact = avg_packet_loss_exact(cfg, rate);
    const double approx = avg_packet_loss_approx(cfg, rate);
    out.max_relative = std::max(out.max_relative, std::abs(approx - exact) / exact);
    out.max_absolute = std::max(out.max_absolute, std::abs(approx - exact));
    ++out.points;
  }
  return out;
}

std::vector<CheckResult> check_approximation() {
  const ApproximationErrors n100 = approximation_errors(100, 100);
  const ApproximationErrors n200 = approximation_errors(200, 100);
  const double ratio = n100.max_absolute / n200.max_absolute;
  return {
      make_check("loss-approximation-error", n100.max_relative <= 0.05,
                 "max relative error " + fmt(n100.max_relative) + " over " + std::to_string(n100.points) + " rates",
                 "<= 0.05 where exact loss in [1e-3, 0.99] (L=4, 1 dB, N=100)"),
      make_check("loss-approximation-scaling", ratio >= 1.5 && ratio <= 3.0,
                 "max abs error N=100 / N=200 = " + fmt(ratio), "in [1.5, 3.0]"),
  };
}

std::vector<CheckResult> check_concavity(std::uint64_t seed) {
  const double step = 1e-3;
  double gain_worst = -std::numeric_limits<double>::infinity();
  double channel_worst = gain_worst;
  double surrogate_worst = gain_worst;
  for (const TradeoffParams& p : concavity_parameter_sets(seed)) {
    const double lo = p.min_rate();
    const double hi = p.upper_rate_limit();
    gain_worst = std::max(gain_worst, max_second_difference([&](double r) { return gain_of_rate(r, p); }, lo, hi, step));
    channel_worst = std::max(
        channel_worst, max_second_difference([&](double r) { return surrogate_channel_term(r, p); }, lo, hi, step));
    surrogate_worst =
        std::max(surrogate_worst, max_second_difference([&](double r) { return surrogate(r, p); }, lo, hi, step));
  }
  const std::string expected = "max second difference <= 1e-9";
  return {
      make_check("gain-concavity", gain_worst <= 1e-9, "max second difference " + fmt(gain_worst), expected),
      make_check("channel-log-concavity", channel_worst <= 1e-9, "max second difference " + fmt(channel_worst),
                 expected),
      make_check("surrogate-concavity", surrogate_worst <= 1e-9, "max second difference " + fmt(surrogate_worst),
                 expected),
  };
}

CheckResult check_ascent() {
  const TradeoffParams params = symmetric_params(4, 2.0, 100, 20);
  const AscentResult ascent = gradient_ascent(params);
  const double reference = exact_surrogate_argmax(params);
  const double deviation = std::abs(ascent.rate - reference) / reference;
  return make_check("ascent-vs-exact-optimum", ascent.converged && deviation <= 0.01,
                    "ascent " + fmt(ascent.rate) + (ascent.converged ? "" : " (not converged)") + ", exact optimum " +
                        fmt(reference) + ", deviation " + fmt(deviation),
                    "converged, deviation <= 0.01");
}

}  // namespace

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string ValidationReport::to_text() const {
  std::ostringstream out;
  for (const CheckResult& c : checks)
    out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.measured << " (expected " << c.expected << ")\n";
  const auto failed = std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.passed; });
  out << checks.size() - static_cast<std::size_t>(failed) << "/" << checks.size() << " checks passed\n";
  return out.str();
}

Eigen::MatrixXd random_covariance(int dim, double min_eig, double max_eig, Rng& rng) {
  if (dim < 1 || !(min_eig > 0.0) || !(max_eig >= min_eig))
    throw std::invalid_argument("random_covariance: bad arguments");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> eig(min_eig, max_eig);
  Eigen::MatrixXd g(dim, dim);
  for (int c = 0; c < dim; ++c)
    for (int r = 0; r < dim; ++r) g(r, c) = normal(rng);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  // Sign fix on R's diagonal makes Q Haar distributed.
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < dim; ++i)
    if (r(i, i) < 0.0) q.col(i) *= -1.0;
  Eigen::VectorXd lambda(dim);
  for (int i = 0; i < dim; ++i) lambda[i] = eig(rng);
  Eigen::MatrixXd sigma = q * lambda.asDiagonal() * q.transpose();
  return 0.5 * (sigma + sigma.transpose());
}

CheckResult check_quantization_noise(std::uint64_t seed, const VariancePredictor& predicted, int samples) {
  const int d = 50;
  const int bits = 4;
  const double clip = 5.0;
  Rng rng = make_stream(seed, 0x1e44a1);
  const InferenceModel model(Eigen::VectorXd::Constant(d, 0.1), Eigen::VectorXd::Constant(d, -0.1),
                             random_covariance(d, 1.0, 2.0, rng));
  const QuantizerConfig quantizer(clip, bits, klt_basis(model.sigma()));

  const int batch = 1000;
  Eigen::MatrixXd errors(batch, d);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
  Eigen::ArrayXd s1 = Eigen::ArrayXd::Zero(d), s2 = s1, s3 = s1, s4 = s1;
  std::bernoulli_distribution coin(0.5);
  for (int done = 0; done < samples;) {
    const int rows = std::min(batch, samples - done);
    for (int i = 0; i < rows; ++i) {
      const FeatureVector x = sample_feature(model, coin(rng) ? ClassLabel::one : ClassLabel::two, rng);
      errors.row(i) = (decode(encode(x, quantizer), quantizer) - x).transpose();
    }
    const auto e = errors.topRows(rows).array();
    s1 += e.colwise().sum().transpose();
    s2 += e.square().colwise().sum().transpose();
    s3 += e.cube().colwise().sum().transpose();
    s4 += e.square().square().colwise().sum().transpose();
    gram.noalias() += errors.topRows(rows).transpose() * errors.topRows(rows);
    done += rows;
  }

  const double n = samples;
  const Eigen::ArrayXd mean = s1 / n;
  const Eigen::ArrayXd m2 = s2 / n - mean.square();
  const Eigen::ArrayXd m3 = s3 / n - 3.0 * mean * s2 / n + 2.0 * mean.cube();
  const Eigen::ArrayXd m4 = s4 / n - 4.0 * mean * s3 / n + 6.0 * mean.square() * s2 / n - 3.0 * mean.square().square();
  const double target = predicted(bits, clip);
  const Eigen::ArrayXd var_ratio = m2 / target;
  const Eigen::ArrayXd skew = m3 / m2.pow(1.5);
  const Eigen::ArrayXd kurt = m4 / m2.square() - 3.0;

  const Eigen::MatrixXd cov = gram / n - mean.matrix() * mean.matrix().transpose();
  const double diag_se = ((m4 - m2.square()) / n).sqrt().mean();
  double off_diag = 0.0;
  for (int r = 0; r < d; ++r)
    for (int c = r + 1; c < d; ++c) off_diag = std::max(off_diag, std::abs(cov(r, c)));

  const bool ok = (var_ratio - 1.0).abs().maxCoeff() <= 0.1 && skew.abs().maxCoeff() <= 0.1 &&
                  kurt.abs().maxCoeff() <= 0.2 && off_diag <= 5.0 * diag_se;
  return make_check("quantization-noise", ok,
                    "variance / prediction in [" + fmt(var_ratio.minCoeff()) + ", " + fmt(var_ratio.maxCoeff()) +
                        "], max |skew| " + fmt(skew.abs().maxCoeff()) + ", max |excess kurtosis| " +
                        fmt(kurt.abs().maxCoeff()) + ", max |cross-cov| " + fmt(off_diag) + " vs 5 SE " +
                        fmt(5.0 * diag_se),
                    "variance within 10% of " + fmt(target) + ", |skew| <= 0.1, |kurtosis| <= 0.2");
}

double max_second_difference(const std::function<double(double)>& f, double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi > lo)) throw std::invalid_argument("max_second_difference: bad grid");
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  if (count < 2) throw std::invalid_argument("max_second_difference: grid needs three points");
  double worst = -std::numeric_limits<double>::infinity();
  double prev = f(lo);
  double cur = f(lo + step);
  for (long i = 2; i <= count; ++i) {
    const double next = f(lo + static_cast<double>(i) * step);
    worst = std::max(worst, prev - 2.0 * cur + next);
    prev = cur;
    cur = next;
  }
  return worst;
}

std::vector<TradeoffParams> concavity_parameter_sets(std::uint64_t seed) {
  std::vector<TradeoffParams> sets;
  sets.push_back(symmetric_params(2, 1.0, 100, 20));
  sets.push_back(symmetric_params(4, 1.0, 100, 20));
  sets.push_back(symmetric_params(4, 2.0, 100, 20));
  sets.push_back(symmetric_params(1, 0.0, 200, 10, 3.0));
  Rng rng = make_stream(seed, 0xc0c4);
  const int d = 20;
  const InferenceModel correlated(Eigen::VectorXd::Constant(d, 0.15), Eigen::VectorXd::Constant(d, -0.15),
                                  random_covariance(d, 0.5, 2.0, rng));
  sets.emplace_back(correlated, 2.0, ChannelConfig(8, snr_from_db(6.0), 50), 10, 50);
  return sets;
}

double exact_surrogate_argmax(const TradeoffParams& params, double step) {
  const double lo = params.min_rate();
  const double hi = params.upper_rate_limit();
  double best_rate = lo;
  double best = surrogate_exact(lo, params);
  for (double r = lo + step; r <= hi; r += step) {
    const double v = surrogate_exact(r, params);
    if (v > best) {
      best = v;
      best_rate = r;
    }
  }
  const double a = std::max(lo, best_rate - step);
  const double b = std::min(hi, best_rate + step);
  return boost::math::tools::brent_find_minima([&](double r) { return -surrogate_exact(r, params); }, a, b,
                                               std::numeric_limits<double>::digits / 2)
      .first;
}

ValidationReport validate(std::uint64_t seed, unsigned workers) {
  ValidationReport report;
  auto& c = report.checks;
  c.push_back(check_discriminant_gain());
  c.push_back(check_quantization_noise(seed));
  c.push_back(check_gain_reduction_bounds(seed));
  c.push_back(check_gain_reduction_decay());
  c.push_back(check_bound_vs_exact());
  c.push_back(check_monte_carlo(seed, workers));
  for (CheckResult& r : check_approximation()) c.push_back(std::move(r));
  for (CheckResult& r : check_concavity(seed)) c.push_back(std::move(r));
  c.push_back(check_ascent());
  return report;
}

}  // namespace edgesense
