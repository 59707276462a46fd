#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "got/error.hpp"
#include "got/io.hpp"
#include "got/pipeline.hpp"

namespace got {

namespace detail_config {

inline int to_int(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const int out = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key \"" + key + "\": expected integer, got \"" + v + "\"");
  }
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key \"" + key + "\": expected number, got \"" + v + "\"");
  }
}

inline uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const uint64_t out = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key \"" + key + "\": expected unsigned integer, got \"" + v + "\"");
  }
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config key \"" + key + "\": expected true|false, got \"" + v + "\"");
}

}  // namespace detail_config

inline void apply_config_entry(PipelineConfig& c, const std::string& key, const std::string& v) {
  using detail_config::to_bool;
  using detail_config::to_double;
  using detail_config::to_int;
  using detail_config::to_u64;
  if (key == "epochs") c.epochs = to_int(key, v);
  else if (key == "lr") c.lr = to_double(key, v);
  else if (key == "weight_decay") c.weight_decay = to_double(key, v);
  else if (key == "max_input_length") c.max_input_length = to_int(key, v);
  else if (key == "max_nodes") c.ecc.max_nodes = to_int(key, v);
  else if (key == "overlap_threshold") c.ecc.overlap_threshold = to_double(key, v);
  else if (key == "d_model") c.model.tf.d_model = to_int(key, v);
  else if (key == "n_heads") c.model.tf.n_heads = to_int(key, v);
  else if (key == "n_layers") c.model.tf.n_layers = to_int(key, v);
  else if (key == "ffn_mult") c.model.tf.ffn_mult = to_int(key, v);
  else if (key == "gat_heads") c.model.gat.heads = to_int(key, v);
  else if (key == "gat_head_dim") c.model.gat.head_dim = to_int(key, v);
  else if (key == "gat_out_dim") c.model.gat.out_dim = to_int(key, v);
  else if (key == "vision_dim") c.model.vision_dim = to_int(key, v);
  else if (key == "multimodal") c.model.multimodal = to_bool(key, v);
  else if (key == "node_window") c.node_window = to_int(key, v);
  else if (key == "max_gen_len") c.max_gen_len = to_int(key, v);
  else if (key == "seed") c.seed = to_u64(key, v);
  else if (key == "gate_mode") c.gate_mode = gate_mode_from_string(v);
  else if (key == "shuffle_graph") c.shuffle_graph = to_bool(key, v);
  else if (key == "shuffle_seed") c.shuffle_seed = to_u64(key, v);
  else throw ConfigError("unknown config key \"" + key + "\"");
}

inline void validate_config(PipelineConfig& c) {
  if (c.epochs < 0) throw ConfigError("epochs must be non-negative");
  if (c.lr < 0) throw ConfigError("lr must be non-negative");
  if (c.max_input_length < 4) throw ConfigError("max_input_length must be at least 4");
  if (c.ecc.max_nodes < 0) throw ConfigError("max_nodes must be non-negative");
  if (c.model.tf.d_model < 1 || c.model.tf.n_heads < 1 || c.model.tf.n_layers < 1)
    throw ConfigError("model dimensions must be positive");
  if (c.model.tf.d_model % c.model.tf.n_heads != 0)
    throw ConfigError("d_model must be divisible by n_heads");
  if (c.model.gat.heads < 1 || c.model.gat.head_dim < 1 || c.model.gat.out_dim < 1)
    throw ConfigError("graph encoder dimensions must be positive");
  c.model.tf.max_len = c.max_input_length;
  c.model.gat.fusion_dim = c.model.tf.d_model;
}

inline PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig base = {}) {
  if (!j.is_object()) throw ConfigError("config json: expected an object of key/value pairs");
  for (const auto& [key, value] : j.items()) {
    if (value.is_string()) apply_config_entry(base, key, value.get<std::string>());
    else if (value.is_boolean()) apply_config_entry(base, key, value.get<bool>() ? "true" : "false");
    else apply_config_entry(base, key, value.dump());
  }
  validate_config(base);
  return base;
}

/// Accepts either a JSON object or key=value lines ('#' starts a comment).
inline PipelineConfig load_config(const std::string& path, PipelineConfig base = {}) {
  const std::string content = io::read_file(path);
  const size_t first = content.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && content[first] == '{')
    return config_from_json(nlohmann::json::parse(content), base);
  std::istringstream in(content);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const size_t a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    auto trim = [](std::string s) {
      const size_t b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const size_t e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    apply_config_entry(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  validate_config(base);
  return base;
}

}  // namespace got
