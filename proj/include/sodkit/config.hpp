#pragma once

#include <string>

#include <json.hpp>

#include "sodkit/metrics.hpp"
#include "sodkit/model.hpp"

namespace sodkit {

// Flat JSON document with one key per model/metric field. Absent keys take
// their defaults; unknown keys are rejected.
struct RunConfig {
  ModelConfig model;
  MetricConfig metrics;
};

RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
nlohmann::json run_config_to_json(const RunConfig& cfg);

}  // namespace sodkit
