// Command-line front end: optimize, simulate, sweep, validate.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "edgesense/harness.hpp"
#include "edgesense/io.hpp"
#include "edgesense/validate.hpp"

namespace {

using namespace edgesense;

/// Flags shared by the experiment subcommands; unset flags leave the config
/// (from --config or defaults) untouched.
struct ExperimentFlags {
  std::string config_file;
  std::optional<double> snr_db, clip, centroid, urllc_threshold;
  std::optional<int> antennas, blocklength, dim, observations;
  std::optional<std::string> model_file, noise_model;
  unsigned workers = 0;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "JSON experiment config")->check(CLI::ExistingFile);
    app->add_option("--snr-db", snr_db, "Transmit SNR in dB");
    app->add_option("--antennas", antennas, "Receive antennas L")->check(CLI::PositiveNumber);
    app->add_option("--blocklength", blocklength, "Channel uses per slot N")->check(CLI::PositiveNumber);
    app->add_option("--dim", dim, "Feature dimension d")->check(CLI::PositiveNumber);
    app->add_option("--clip", clip, "Quantizer clipping range U")->check(CLI::PositiveNumber);
    app->add_option("--observations", observations, "Observations K")->check(CLI::PositiveNumber);
    app->add_option("--centroid", centroid, "Class means at +-centroid");
    app->add_option("--model-file", model_file, "JSON file with mu1, mu2, sigma")->check(CLI::ExistingFile);
    app->add_option("--noise-model", noise_model, "quantizer or lemma1")
        ->check(CLI::IsMember({"quantizer", "lemma1"}));
    app->add_option("--urllc-threshold", urllc_threshold, "Loss target of the urllc policy");
    app->add_option("--workers", workers, "Worker threads (0 = all cores)");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig c = config_file.empty() ? ExperimentConfig{} : load_config_file(config_file);
    if (snr_db) c.snr_db = *snr_db;
    if (clip) c.clip = *clip;
    if (centroid) c.model.centroid = *centroid;
    if (urllc_threshold) c.urllc_threshold = *urllc_threshold;
    if (antennas) c.antennas = *antennas;
    if (blocklength) c.blocklength = *blocklength;
    if (dim) {
      c.model.dim = *dim;
      if (c.model.covariance.kind != CovarianceSpec::Kind::identity && !config_file.empty())
        throw std::invalid_argument("--dim conflicts with the covariance in " + config_file);
    }
    if (observations) c.observations = *observations;
    if (model_file) c.model.model_file = *model_file;
    if (noise_model) c.noise_model = *noise_model == "lemma1" ? NoiseModel::lemma1 : NoiseModel::quantizer;
    c.validate();
    return c;
  }
};

std::vector<Policy> parse_policies(const std::vector<std::string>& names) {
  std::vector<Policy> out;
  for (const auto& n : names) out.push_back(Policy::parse(n));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Source-channel rate adaptation for edge sensing"};
  app.require_subcommand(1);

  ExperimentFlags opt_flags;
  auto* optimize = app.add_subcommand("optimize", "Adaptive coding rate and predicted error as JSON");
  opt_flags.attach(optimize);

  ExperimentFlags sim_flags;
  std::optional<std::string> sim_policy;
  std::optional<int> sim_trials;
  std::optional<std::uint64_t> sim_seed;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo error of one policy as a JSON row");
  sim_flags.attach(simulate);
  simulate->add_option("--policy", sim_policy, "adaptive | brute | brute-mc | urllc | bits:<R>");
  simulate->add_option("--trials", sim_trials, "Monte Carlo trials (>= 100)");
  simulate->add_option("--seed", sim_seed, "Master seed");

  ExperimentFlags sweep_flags;
  std::string sweep_param;
  std::vector<double> sweep_values;
  std::vector<std::string> sweep_policies{"adaptive"};
  std::optional<int> sweep_trials;
  std::optional<std::uint64_t> sweep_seed;
  std::string sweep_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "Error versus one parameter for several policies as CSV");
  sweep_flags.attach(sweep_cmd);
  sweep_cmd->add_option("--param", sweep_param, "observations | snr-db | antennas | blocklength")
      ->required()
      ->check(CLI::IsMember({"observations", "snr-db", "antennas", "blocklength"}));
  sweep_cmd->add_option("--values", sweep_values, "Comma-separated values")->required()->delimiter(',');
  sweep_cmd->add_option("--policies", sweep_policies, "Comma-separated policies")->delimiter(',');
  sweep_cmd->add_option("--trials", sweep_trials, "Monte Carlo trials per cell (>= 100)");
  sweep_cmd->add_option("--seed", sweep_seed, "Master seed");
  sweep_cmd->add_option("--out", sweep_out, "CSV path (stdout when omitted)");

  std::uint64_t validate_seed = 1;
  unsigned validate_workers = 0;
  auto* validate_cmd = app.add_subcommand("validate", "Run the analytical self-checks");
  validate_cmd->add_option("--seed", validate_seed, "Master seed");
  validate_cmd->add_option("--workers", validate_workers, "Worker threads (0 = all cores)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*optimize) {
      const ExperimentConfig config = opt_flags.resolve();
      std::cout << to_json(decide(config, Policy{})).dump(2) << "\n";
    } else if (*simulate) {
      ExperimentConfig config = sim_flags.resolve();
      if (sim_policy) config.policy = Policy::parse(*sim_policy);
      if (sim_trials) config.trials = *sim_trials;
      if (sim_seed) config.seed = *sim_seed;
      const RateDecision decision = decide(config);
      std::cout << to_json(estimate_error(config, decision, config.trials, config.seed, sim_flags.workers)).dump(2)
                << "\n";
    } else if (*sweep_cmd) {
      ExperimentConfig config = sweep_flags.resolve();
      if (sweep_trials) config.trials = *sweep_trials;
      if (sweep_seed) config.seed = *sweep_seed;
      const auto rows = sweep(config, parse_sweep_param(sweep_param), sweep_values, parse_policies(sweep_policies),
                              config.trials, config.seed, sweep_flags.workers);
      const std::string csv = to_csv(rows);
      if (sweep_out.empty()) {
        std::cout << csv;
      } else {
        std::ofstream out(sweep_out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + sweep_out);
        out << csv;
      }
    } else if (*validate_cmd) {
      const ValidationReport report = validate(validate_seed, validate_workers);
      std::cout << report.to_text();
      return report.passed() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
