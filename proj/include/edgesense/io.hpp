#pragma once

#include <string>

#include "json.hpp"

#include "edgesense/harness.hpp"

namespace edgesense {

/// Reads {"mu1": [...], "mu2": [...], "sigma": ...} where sigma is
/// "identity", a diagonal array, or a nested row-major array.
InferenceModel load_model_file(const std::string& path);
InferenceModel model_from_json(const nlohmann::json& j);

/// Overlays the keys present in `j` on `base`. Unknown keys are an error.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
ExperimentConfig load_config_file(const std::string& path);

nlohmann::json to_json(const RateDecision& decision);
nlohmann::json to_json(const ResultRow& row);

}  // namespace edgesense
