#include "sodkit/config.hpp"

#include <fstream>
#include <set>

namespace sodkit {

namespace {

using nlohmann::json;

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParamError(std::string("config key '") + key + "': " + e.what());
  }
}

template <typename T, std::size_t N>
void take_array(const json& j, const char* key, std::array<T, N>& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != N) {
    throw ParamError(std::string("config key '") + key + "' must be an array of " +
                     std::to_string(N) + " values");
  }
  for (std::size_t i = 0; i < N; ++i) {
    try {
      out[i] = v.at(i).get<T>();
    } catch (const json::exception& e) {
      throw ParamError(std::string("config key '") + key + "': " + e.what());
    }
  }
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "input_h",       "input_w",     "backbone_channels",
      "embed_dim",     "alpha_graph", "k_neighbors",
      "graph_pool",    "lambda_c",    "seed",
      "graph_symmetrize", "consistency_detach_finer",
      "beta2",         "alpha_s",     "iou_threshold",
  };
  return keys;
}

}  // namespace

RunConfig parse_run_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ParamError("config document must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (known_keys().count(it.key()) == 0) {
      throw ParamError("unknown config key '" + it.key() + "'");
    }
  }

  RunConfig cfg;
  take(j, "input_h", cfg.model.input_h);
  take(j, "input_w", cfg.model.input_w);
  take_array(j, "backbone_channels", cfg.model.backbone_channels);
  take(j, "embed_dim", cfg.model.embed_dim);
  take(j, "alpha_graph", cfg.model.alpha_graph);
  take(j, "k_neighbors", cfg.model.k_neighbors);
  take_array(j, "graph_pool", cfg.model.graph_pool);
  take(j, "lambda_c", cfg.model.lambda_c);
  take(j, "seed", cfg.model.seed);
  take(j, "graph_symmetrize", cfg.model.graph_symmetrize);
  take(j, "consistency_detach_finer", cfg.model.consistency_detach_finer);
  take(j, "beta2", cfg.metrics.beta2);
  take(j, "alpha_s", cfg.metrics.alpha_s);
  take(j, "iou_threshold", cfg.metrics.iou_threshold);

  cfg.model.validate();
  cfg.metrics.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path + ": cannot open config file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  return parse_run_config(j);
}

nlohmann::json run_config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["input_h"] = cfg.model.input_h;
  j["input_w"] = cfg.model.input_w;
  j["backbone_channels"] = cfg.model.backbone_channels;
  j["embed_dim"] = cfg.model.embed_dim;
  j["alpha_graph"] = cfg.model.alpha_graph;
  j["k_neighbors"] = cfg.model.k_neighbors;
  j["graph_pool"] = cfg.model.graph_pool;
  j["lambda_c"] = cfg.model.lambda_c;
  j["seed"] = cfg.model.seed;
  j["graph_symmetrize"] = cfg.model.graph_symmetrize;
  j["consistency_detach_finer"] = cfg.model.consistency_detach_finer;
  j["beta2"] = cfg.metrics.beta2;
  j["alpha_s"] = cfg.metrics.alpha_s;
  j["iou_threshold"] = cfg.metrics.iou_threshold;
  return j;
}

}  // namespace sodkit
