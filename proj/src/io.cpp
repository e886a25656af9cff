#include "edgesense/io.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace edgesense {

namespace {

using nlohmann::json;

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

Eigen::VectorXd vector_from(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument(std::string(what) + " must be a non-empty array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw std::invalid_argument(std::string(what) + " must hold numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

/// "identity", [diag...] or [[row]...] into a covariance spec of dimension `dim` (0 = infer).
CovarianceSpec covariance_from(const json& j, int dim) {
  CovarianceSpec spec;
  if (j.is_string()) {
    if (j.get<std::string>() != "identity") throw std::invalid_argument("covariance: unknown keyword");
    return spec;
  }
  if (!j.is_array() || j.empty()) throw std::invalid_argument("covariance must be \"identity\" or an array");
  if (j[0].is_array()) {
    const auto n = static_cast<Eigen::Index>(j.size());
    spec.kind = CovarianceSpec::Kind::dense;
    spec.dense.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const json& row = j[static_cast<std::size_t>(r)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
        throw std::invalid_argument("covariance must be square");
      for (Eigen::Index c = 0; c < n; ++c) spec.dense(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  } else {
    spec.kind = CovarianceSpec::Kind::diagonal;
    const Eigen::VectorXd diag = vector_from(j, "covariance");
    spec.diagonal.assign(diag.data(), diag.data() + diag.size());
  }
  const int n = spec.kind == CovarianceSpec::Kind::dense ? static_cast<int>(spec.dense.rows())
                                                          : static_cast<int>(spec.diagonal.size());
  if (dim > 0 && n != dim) throw std::invalid_argument("covariance dimension differs from dim");
  return spec;
}

}  // namespace

InferenceModel model_from_json(const json& j) {
  if (!j.is_object() || !j.contains("mu1") || !j.contains("mu2") || !j.contains("sigma"))
    throw std::invalid_argument("model file needs mu1, mu2 and sigma");
  Eigen::VectorXd mu1 = vector_from(j["mu1"], "mu1");
  Eigen::VectorXd mu2 = vector_from(j["mu2"], "mu2");
  const int d = static_cast<int>(mu1.size());
  const CovarianceSpec cov = covariance_from(j["sigma"], d);
  Eigen::MatrixXd sigma;
  switch (cov.kind) {
    case CovarianceSpec::Kind::identity: sigma = Eigen::MatrixXd::Identity(d, d); break;
    case CovarianceSpec::Kind::diagonal:
      sigma = Eigen::Map<const Eigen::VectorXd>(cov.diagonal.data(), d).asDiagonal();
      break;
    case CovarianceSpec::Kind::dense: sigma = cov.dense; break;
  }
  return InferenceModel(std::move(mu1), std::move(mu2), std::move(sigma));
}

InferenceModel load_model_file(const std::string& path) {
  try {
    return model_from_json(read_json(path));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig c) {
  static const std::set<std::string> known{"dim",        "centroid",    "covariance", "model_file",
                                           "clip",       "antennas",    "snr_db",     "blocklength",
                                           "observations", "policy",    "trials",     "seed",
                                           "noise_model", "urllc_threshold"};
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw std::invalid_argument("config: unknown key '" + key + "'");

  try {
    if (j.contains("dim")) c.model.dim = j["dim"].get<int>();
    if (j.contains("centroid")) c.model.centroid = j["centroid"].get<double>();
    if (j.contains("covariance")) c.model.covariance = covariance_from(j["covariance"], c.model.dim);
    if (j.contains("model_file")) c.model.model_file = j["model_file"].get<std::string>();
    if (j.contains("clip")) c.clip = j["clip"].get<double>();
    if (j.contains("antennas")) c.antennas = j["antennas"].get<int>();
    if (j.contains("snr_db")) c.snr_db = j["snr_db"].get<double>();
    if (j.contains("blocklength")) c.blocklength = j["blocklength"].get<int>();
    if (j.contains("observations")) c.observations = j["observations"].get<int>();
    if (j.contains("policy")) c.policy = Policy::parse(j["policy"].get<std::string>());
    if (j.contains("trials")) c.trials = j["trials"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("urllc_threshold")) c.urllc_threshold = j["urllc_threshold"].get<double>();
    if (j.contains("noise_model")) {
      const auto name = j["noise_model"].get<std::string>();
      if (name == "quantizer") c.noise_model = NoiseModel::quantizer;
      else if (name == "lemma1") c.noise_model = NoiseModel::lemma1;
      else throw std::invalid_argument("config: noise_model must be quantizer or lemma1");
    }
  } catch (const json::type_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  try {
    return config_from_json(read_json(path));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

json to_json(const RateDecision& d) {
  return {{"continuous_rate", d.continuous_rate}, {"bits_per_feature", d.bits_per_feature},
          {"rounded_rate", d.rounded_rate},       {"predicted_bound", d.predicted_bound},
          {"predicted_exact", d.predicted_exact}, {"meets_loss_target", d.meets_loss_target}};
}

json to_json(const ResultRow& r) {
  return {{"param", r.param},           {"value", r.value},           {"policy", r.policy},
          {"bits", r.bits},             {"rate", r.rate},             {"error", r.error},
          {"ci95", r.ci95},             {"pred_exact", r.pred_exact}, {"pred_bound", r.pred_bound},
          {"trials", r.trials},         {"seed", r.seed}};
}

}  // namespace edgesense
