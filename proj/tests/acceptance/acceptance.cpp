// Acceptance suite: one line per criterion, exit status 0 only if every
// selected criterion passes. Usage: acceptance [--criterion N]... [--cli PATH]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <boost/accumulators/accumulators.hpp>
#include <boost/accumulators/statistics/kurtosis.hpp>
#include <boost/accumulators/statistics/mean.hpp>
#include <boost/accumulators/statistics/skewness.hpp>
#include <boost/accumulators/statistics/stats.hpp>
#include <boost/accumulators/statistics/variance.hpp>
#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>

#include "edgesense/channel.hpp"
#include "edgesense/gmm.hpp"
#include "edgesense/harness.hpp"
#include "edgesense/optimizer.hpp"
#include "edgesense/quant.hpp"
#include "edgesense/validate.hpp"

namespace acc = boost::accumulators;
using namespace edgesense;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string cli_path;
double criterion9_seconds = -1.0;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double oracle_q(double x) { return boost::math::cdf(boost::math::complement(boost::math::normal(), x)); }

TradeoffParams baseline_params(int antennas, double snr_db, int observations, int blocklength = 100) {
  return TradeoffParams(InferenceModel::symmetric_isotropic(50, 0.1), 5.0,
                        ChannelConfig(antennas, snr_from_db(snr_db), blocklength), observations, blocklength);
}

// 1
Outcome discriminant_gain_reproduction() {
  const InferenceModel model = InferenceModel::symmetric_isotropic(50, 0.1);
  const double gain = discriminant_gain(model);
  return {std::abs(gain - 1.0) <= 1e-12, "D0 = " + fmt(gain) + ", |D0 - 1| = " + fmt(std::abs(gain - 1.0))};
}

// 2
Outcome quantization_noise() {
  const int d = 50, bits = 4, samples = 100000;
  const double clip = 5.0;
  const double target = std::pow(2.0 * clip / ((1 << bits) - 1), 2) / 12.0;  // Delta^2 / 12

  using Moments = acc::accumulator_set<double, acc::stats<acc::tag::variance, acc::tag::skewness, acc::tag::kurtosis>>;
  auto measure = [&](const InferenceModel& model, Rng& rng) {
    const QuantizerConfig quantizer(clip, bits, klt_basis(model.sigma()));
    std::vector<Moments> per_dim(d);
    std::bernoulli_distribution coin(0.5);
    for (int s = 0; s < samples; ++s) {
      const FeatureVector x = sample_feature(model, coin(rng) ? ClassLabel::one : ClassLabel::two, rng);
      const FeatureVector e = decode(encode(x, quantizer), quantizer) - x;
      for (int i = 0; i < d; ++i) per_dim[i](e[i]);
    }
    double var_dev = 0.0, skew = 0.0, kurt = 0.0;
    for (const auto& m : per_dim) {
      var_dev = std::max(var_dev, std::abs(acc::variance(m) / target - 1.0));
      skew = std::max(skew, std::abs(acc::skewness(m)));
      kurt = std::max(kurt, std::abs(acc::kurtosis(m)));
    }
    return std::array<double, 3>{var_dev, skew, kurt};
  };

  Rng rng = make_stream(2024, 2);
  const InferenceModel correlated(Eigen::VectorXd::Constant(d, 0.1), Eigen::VectorXd::Constant(d, -0.1),
                                  random_covariance(d, 1.0, 2.0, rng));
  const auto c = measure(correlated, rng);
  Rng rng_iso = make_stream(2024, 3);
  const auto iso = measure(InferenceModel::symmetric_isotropic(d, 0.1), rng_iso);
  const bool ok = c[0] <= 0.1 && c[1] <= 0.1 && c[2] <= 0.2;
  return {ok, "correlated KLT model: max |var/" + fmt(target) + " - 1| " + fmt(c[0]) + ", max |skew| " + fmt(c[1]) +
                  ", max |excess kurt| " + fmt(c[2]) + "; identity covariance (uniform cells): var dev " +
                  fmt(iso[0]) + ", |skew| " + fmt(iso[1]) + ", |kurt| " + fmt(iso[2])};
}

// 3
Outcome gain_reduction_bounds() {
  Rng rng = make_stream(2024, 3);
  std::uniform_int_distribution<int> dim_dist(2, 20);
  std::normal_distribution<double> normal(0.0, 1.0);
  int violations = 0, cases = 0;
  double lib_mismatch = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int d = dim_dist(rng);
    const Eigen::MatrixXd sigma = random_covariance(d, 0.05, 20.0, rng);
    Eigen::VectorXd mu1(d), mu2(d);
    for (int i = 0; i < d; ++i) {
      mu1[i] = normal(rng);
      mu2[i] = normal(rng);
    }
    const InferenceModel model(mu1, mu2, sigma);
    const Eigen::VectorXd gap = mu1 - mu2;
    const double d0 = 0.5 * gap.dot(sigma.ldlt().solve(gap));
    for (double s2 : {1e-6, 1e-4, 1e-3, 1e-2, 0.1, 0.5, 1.0, 5.0, 50.0}) {
      const Eigen::MatrixXd inflated = sigma + s2 * Eigen::MatrixXd::Identity(d, d);
      // D0 - D = s2/2 gap^T Sigma^{-1} (Sigma + s2 I)^{-1} gap, free of cancellation.
      const Eigen::VectorXd a = sigma.ldlt().solve(gap);
      const double drop = 0.5 * s2 * a.dot(inflated.ldlt().solve(gap));
      const double rel = drop / d0;
      const double lower = s2 / inflated.trace();
      const double upper = s2 * inflated.inverse().trace();
      if (rel < lower || rel > upper) ++violations;
      const double lib_rel = (discriminant_gain(model) - effective_discriminant_gain(model, s2)) / discriminant_gain(model);
      lib_mismatch = std::max(lib_mismatch, std::abs(lib_rel - rel) / std::max(rel, 1e-300));
      const GainReductionBounds b = dg_reduction_bounds(model, s2);
      lib_mismatch = std::max({lib_mismatch, std::abs(b.lower - lower) / lower, std::abs(b.upper - upper) / upper});
      ++cases;
    }
  }

  const InferenceModel baseline = InferenceModel::symmetric_isotropic(50, 0.1);
  auto scaled = [&](int bits) {
    return (1.0 - effective_discriminant_gain(baseline, noise_variance(bits, 5.0))) * std::pow(4.0, bits);
  };
  const double anchor = scaled(8);
  double lo = 1.0, hi = 1.0;
  for (int r = 4; r <= 12; ++r) {
    lo = std::min(lo, scaled(r) / anchor);
    hi = std::max(hi, scaled(r) / anchor);
  }
  const bool decay_ok = lo >= 1.0 / 1.5 && hi <= 1.5;
  return {violations == 0 && decay_ok && lib_mismatch <= 1e-6,
          std::to_string(violations) + "/" + std::to_string(cases) + " bracket violations, library vs oracle rel diff " +
              fmt(lib_mismatch) + ", 4^R(D0-D) relative to R=8 in [" + fmt(lo) + ", " + fmt(hi) + "]"};
}

// 4
Outcome bound_and_monte_carlo() {
  int violations = 0, cases = 0;
  double oracle_gap = 0.0;
  for (double gain : {0.02, 0.1, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
    for (double loss : {0.0, 1e-4, 1e-2, 0.05, 0.2, 0.5, 0.8, 0.95, 0.999}) {
      for (int k : {1, 2, 3, 5, 8, 10, 20, 40}) {
        const std::vector<double> losses(static_cast<std::size_t>(k), loss);
        const double exact = semi_analytic_error(gain, losses);
        double oracle = 0.0;
        const boost::math::binomial_distribution<double> received(k, 1.0 - loss);
        for (int m = 0; m <= k; ++m)
          oracle += boost::math::pdf(received, m) * (m == 0 ? 0.5 : oracle_q(std::sqrt(m * gain / 2.0)));
        oracle_gap = std::max(oracle_gap, std::abs(exact - oracle));
        if (sensing_error_bound(gain, loss, k) < exact) ++violations;
        ++cases;
      }
    }
  }

  ExperimentConfig config;
  const RateDecision decision = decide(config);
  const ResultRow row = estimate_error(config, decision, 10000, 7, 0);
  const double p = decision.predicted_exact;
  const double sigma = std::sqrt(p * (1.0 - p) / row.trials);
  const bool mc_ok = std::abs(row.error - p) <= 3.0 * sigma && decision.predicted_bound >= p;
  return {violations == 0 && oracle_gap <= 1e-12 && mc_ok,
          std::to_string(violations) + "/" + std::to_string(cases) + " bound < exact, exact vs binomial oracle " +
              fmt(oracle_gap) + "; MC " + fmt(row.error) + " vs exact " + fmt(p) + " (3 sigma " + fmt(3 * sigma) +
              "), bound " + fmt(decision.predicted_bound)};
}

// 5
Outcome loss_approximation() {
  const ChannelConfig n100(4, snr_from_db(1.0), 100);
  const ChannelConfig n200(4, snr_from_db(1.0), 200);
  double worst_rel = 0.0, worst_rate = 0.0, abs100 = 0.0, abs200 = 0.0;
  int points = 0;
  for (double rate = 0.01; rate <= 6.0; rate += 0.005) {
    const double exact = avg_packet_loss_exact(n100, rate);
    if (exact < 1e-3 || exact > 0.99) continue;
    const double approx = avg_packet_loss_approx(n100, rate);
    const double rel = std::abs(approx - exact) / exact;
    if (rel > worst_rel) {
      worst_rel = rel;
      worst_rate = rate;
    }
    abs100 = std::max(abs100, std::abs(approx - exact));
    abs200 = std::max(abs200, std::abs(approx - avg_packet_loss_exact(n200, rate)));
    ++points;
  }
  const double ratio = abs100 / abs200;
  return {worst_rel <= 0.05 && ratio >= 1.5 && ratio <= 3.0,
          "max relative error " + fmt(worst_rel) + " at R_c=" + fmt(worst_rate) + " over " + std::to_string(points) +
              " rates (limit 0.05); max abs error N=100/N=200 = " + fmt(ratio) + " (limit [1.5, 3])"};
}

// 6
Outcome concavity() {
  const double step = 1e-3;
  double worst[3] = {-1e300, -1e300, -1e300};
  const auto sets = concavity_parameter_sets(2024);
  for (const TradeoffParams& p : sets) {
    const std::function<double(double)> fns[3] = {
        [&](double r) { return gain_of_rate(r, p); },
        [&](double r) { return std::log1p(-avg_packet_loss_approx(p.channel, r)); },
        [&](double r) { return surrogate(r, p); },
    };
    const double lo = p.min_rate(), hi = p.upper_rate_limit();
    const long n = static_cast<long>(std::floor((hi - lo) / step));
    for (int f = 0; f < 3; ++f) {
      for (long i = 1; i < n; ++i) {
        const double r = lo + static_cast<double>(i) * step;
        worst[f] = std::max(worst[f], fns[f](r - step) - 2.0 * fns[f](r) + fns[f](r + step));
      }
    }
  }
  return {worst[0] <= 1e-9 && worst[1] <= 1e-9 && worst[2] <= 1e-9,
          std::to_string(sets.size()) + " parameter sets, step " + fmt(step) + ": max second difference D " +
              fmt(worst[0]) + ", ln(1-eps) " + fmt(worst[1]) + ", surrogate " + fmt(worst[2]) + " (limit 1e-9)"};
}

// 7
Outcome ascent_convergence() {
  const TradeoffParams params = baseline_params(4, 2.0, 20);
  OptimizerSettings settings;
  settings.step = 0.01;
  const AscentResult ascent = gradient_ascent(params, settings);

  const double lo = params.min_rate(), hi = params.upper_rate_limit();
  auto objective = [&](double r) { return surrogate_exact(r, params); };
  double best = lo;
  for (double r = lo; r <= hi; r += 1e-2)
    if (objective(r) > objective(best)) best = r;
  const double a = std::max(lo, best - 0.02), b = std::min(hi, best + 0.02);
  double fine = a;
  double fine_val = objective(a);
  for (double r = a; r <= b; r += 1e-5) {
    const double v = objective(r);
    if (v > fine_val) {
      fine_val = v;
      fine = r;
    }
  }
  const double deviation = std::abs(ascent.rate - fine) / fine;
  return {ascent.converged && deviation <= 0.01,
          "ascent " + fmt(ascent.rate) + " after " + std::to_string(ascent.iterations) + " iterations" +
              (ascent.converged ? "" : " (NOT converged)") + ", exact-surrogate grid optimum " + fmt(fine) +
              ", deviation " + fmt(100 * deviation) + "%"};
}

// 8
Outcome argmin_agreement() {
  std::string detail;
  bool ok = true;
  for (int antennas : {2, 4}) {
    const TradeoffParams params = baseline_params(antennas, 1.0, 20);
    const int top = max_bit_level(params);
    int best_phi = 1, best_bound = 1, best_exact = 1;
    double phi_max = -1e300, bound_min = 1e300, exact_min = 1e300;
    for (int bits = 1; bits <= top; ++bits) {
      const double rate = bits * 50.0 / 100.0;
      const double phi = surrogate(rate, params);
      const RateDecision dec = decision_for_bits(bits, rate, params);
      if (phi > phi_max) { phi_max = phi; best_phi = bits; }
      if (dec.predicted_bound < bound_min) { bound_min = dec.predicted_bound; best_bound = bits; }
      if (dec.predicted_exact < exact_min) { exact_min = dec.predicted_exact; best_exact = bits; }
    }
    const int spread = std::max({best_phi, best_bound, best_exact}) - std::min({best_phi, best_bound, best_exact});
    ok = ok && spread <= 1;
    detail += "L=" + std::to_string(antennas) + ": phi " + std::to_string(best_phi) + ", bound " +
              std::to_string(best_bound) + ", exact " + std::to_string(best_exact) + " bits; ";
  }
  return {ok, detail};
}

// 9
Outcome sweep_trends() {
  const auto start = std::chrono::steady_clock::now();
  const int trials = 10000;
  const std::uint64_t seed = 11;
  ExperimentConfig base;
  std::string detail;
  bool ok = true;

  auto monotone = [&](SweepParam param, std::vector<double> values) {
    const auto rows = sweep(base, param, values, {Policy{}}, trials, seed);
    double worst = -1.0;  // largest increase beyond the CI slack
    std::string errs;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      errs += (i ? "/" : "") + fmt(rows[i].error);
      if (i + 1 < rows.size())
        worst = std::max(worst, rows[i + 1].error - rows[i].error - rows[i].ci95 - rows[i + 1].ci95);
    }
    ok = ok && worst <= 0.0;
    detail += sweep_param_name(param) + " " + errs + (worst <= 0.0 ? "" : " (NOT monotone)") + "; ";
  };
  monotone(SweepParam::observations, {1, 2, 5, 10, 20});
  monotone(SweepParam::snr_db, {-2, 0, 2, 4, 6, 8, 10});
  monotone(SweepParam::antennas, {1, 2, 4, 8});
  monotone(SweepParam::blocklength, {50, 100, 200, 400});

  const std::vector<Policy> policies{Policy{}, Policy::parse("urllc"), Policy::parse("bits:32"),
                                     Policy::parse("bits:16")};
  const auto rows = sweep(base, SweepParam::snr_db, {2.0}, policies, trials, seed);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const bool beats = rows[0].error <= rows[i].error + rows[i].ci95;
    ok = ok && beats;
    detail += "adaptive " + fmt(rows[0].error) + (beats ? " <= " : " > ") + rows[i].policy + " " +
              fmt(rows[i].error) + "+" + fmt(rows[i].ci95) + "; ";
  }
  criterion9_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream("acceptance_c9_seconds.txt") << criterion9_seconds << "\n";
  return {ok, detail};
}

// 10
Outcome numerics() {
  Rng rng = make_stream(2024, 10);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double pmf_gap = 0.0;
  for (int k = 1; k <= 12; ++k) {
    for (int rep = 0; rep < 5; ++rep) {
      std::vector<double> p(static_cast<std::size_t>(k));
      for (double& v : p) v = unit(rng);
      std::vector<double> brute(static_cast<std::size_t>(k) + 1, 0.0);
      for (unsigned mask = 0; mask < (1u << k); ++mask) {
        double prob = 1.0;
        int ones = 0;
        for (int i = 0; i < k; ++i) {
          const bool hit = (mask >> i) & 1u;
          prob *= hit ? p[i] : 1.0 - p[i];
          ones += hit;
        }
        brute[ones] += prob;
      }
      const ProbabilityVector dp = poisson_binomial_pmf(p);
      for (int m = 0; m <= k; ++m) pmf_gap = std::max(pmf_gap, std::abs(dp[m] - brute[m]));
    }
  }

  double worst_p = 1.0;
  for (auto [antennas, db] : {std::pair{1, 0.0}, {4, 2.0}, {8, -3.0}}) {
    const ChannelConfig cfg(antennas, snr_from_db(db), 100);
    Rng draw = make_stream(2024, 100 + antennas);
    std::vector<double> xs(100000);
    for (double& x : xs) x = sample_post_mrc_snr(cfg, draw);
    std::sort(xs.begin(), xs.end());
    const boost::math::gamma_distribution<double> law(antennas, cfg.snr_linear);
    double dmax = 0.0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double f = boost::math::cdf(law, xs[i]);
      dmax = std::max({dmax, f - i / n, (i + 1) / n - f});
    }
    const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * dmax;
    double p = 0.0;
    for (int j = 1; j <= 100; ++j) p += 2.0 * ((j % 2) ? 1.0 : -1.0) * std::exp(-2.0 * j * j * lambda * lambda);
    worst_p = std::min(worst_p, std::clamp(p, 0.0, 1.0));
  }

  double symmetry = 0.0;
  for (double x = -12.0; x <= 12.0; x += 0.01) symmetry = std::max(symmetry, std::abs(q_function(x) + q_function(-x) - 1.0));

  return {pmf_gap <= 1e-12 && worst_p >= 0.01 && symmetry <= 1e-12,
          "PoiBin vs enumeration " + fmt(pmf_gap) + ", min KS p-value " + fmt(worst_p) + ", |Q(x)+Q(-x)-1| " +
              fmt(symmetry)};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// 11
Outcome determinism() {
  if (cli_path.empty()) return {false, "no --cli path given"};
  double budget = criterion9_seconds;
  if (budget < 0) {
    std::ifstream in("acceptance_c9_seconds.txt");
    if (!(in >> budget)) {
      sweep_trends();
      budget = criterion9_seconds;
    }
  }
  const auto start = std::chrono::steady_clock::now();
  const std::string common = " sweep --param observations --values 1,2,5,10,20 --policies adaptive,urllc,bits:16 "
                             "--trials 10000 --seed 99";
  const int rc1 = std::system((cli_path + common + " --workers 1 --out determinism_a.csv").c_str());
  const int rc2 = std::system((cli_path + common + " --workers 4 --out determinism_b.csv").c_str());
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::string a = read_file("determinism_a.csv"), b = read_file("determinism_b.csv");
  const bool same = rc1 == 0 && rc2 == 0 && !a.empty() && a == b;
  return {same && elapsed < 2.0 * budget,
          std::string(same ? "byte-identical" : "DIFFERENT") + " CSV (" + std::to_string(a.size()) +
              " bytes) for 1 and 4 workers; " + fmt(elapsed) + " s vs budget 2 x " + fmt(budget) + " s"};
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) selected.push_back(std::atoi(argv[++i]));
    else if (arg == "--cli" && i + 1 < argc) cli_path = argv[++i];
    else {
      std::cerr << "usage: acceptance [--criterion N]... [--cli PATH]\n";
      return 2;
    }
  }

  const std::vector<Criterion> criteria{
      {1, "discriminant gain of the synthetic model", 1e-3, discriminant_gain_reproduction},
      {2, "quantization noise statistics", 5.0, quantization_noise},
      {3, "gain-reduction bracket and 4^-R decay", 5.0, gain_reduction_bounds},
      {4, "error bound dominates exact error; Monte Carlo agrees", 60.0, bound_and_monte_carlo},
      {5, "closed-form average loss accuracy", 10.0, loss_approximation},
      {6, "concavity grids", 5.0, concavity},
      {7, "gradient ascent reaches the exact optimum", 5.0, ascent_convergence},
      {8, "surrogate, bound and exact error pick the same bit level", 30.0, argmin_agreement},
      {9, "error trends and policy comparison", 600.0, sweep_trends},
      {10, "numerical kernels", 10.0, numerics},
      {11, "sweep determinism across worker counts", std::numeric_limits<double>::infinity(), determinism},
  };

  bool all = true;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_seconds;
    const bool pass = out.passed && in_time;
    all = all && pass;
    std::cout << "criterion " << c.id << " " << (pass ? "PASS" : "FAIL") << " " << c.name << ": " << out.detail
              << " [" << fmt(secs) << " s" << (in_time ? "" : ", OVER BUDGET " + fmt(c.budget_seconds) + " s") << "]"
              << std::endl;
  }
  return all ? 0 : 1;
}
