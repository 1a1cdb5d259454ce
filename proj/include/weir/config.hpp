#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "weir/model.hpp"
#include "weir/orchestrator.hpp"

namespace weir {

// One structured config file covers models, pricing, cascade and run
// defaults. Unset values fall back to the shipped defaults (max_actions 30,
// short_term_k 3, r 3, l 5, temperatures 0.2 / 0.01).
struct EngineConfig {
  std::vector<ModelDescriptor> models;  // declared order
  RunConfig run;                        // cascade resolved against models
  nlohmann::json echo;                  // effective config, echoed into trace headers
  std::string config_hash;              // stable hash of the effective config
};

// Parses and validates; throws ConfigError with the offending field's path.
// base_dir resolves a relative "pricing_file" reference.
EngineConfig parse_engine_config(const nlohmann::json& doc,
                                 const std::filesystem::path& base_dir);

EngineConfig load_engine_config(const std::filesystem::path& config_path);

// FNV-1a 64-bit, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view data);

}  // namespace weir
