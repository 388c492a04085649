#pragma once

// Declarative run files (JSON) for the experiment runner.
//
// Every run file is an object with an "experiment" key, one of
//   single_run, excite_sweep, scaling_fit, strong_coupling_map, rabi_rect,
//   scatter_sweep, oracle_check
// plus experiment-specific keys (see README). Errors carry the offending
// field as a dotted path, e.g. "field.amplitudes[2]".

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fockme/experiments.hpp"

namespace fockme {

inline constexpr const char* kEngineVersion = "fockme 1.0.0";

/// Parses a run file; throws SchemaError on I/O or syntax errors.
nlohmann::json load_runfile(const std::filesystem::path& path);

/// Applies "a.b.c=value". The value is parsed as JSON when possible and kept
/// as a string otherwise; intermediate objects are created as needed.
void set_override(nlohmann::json& config, const std::string& assignment);

/// 64-bit FNV-1a of the compact serialization (keys sorted), as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

/// "# engine ...\n# config ...\n" lines that prefix every emitted table.
std::string table_preamble(const nlohmann::json& config);

MultiModeSLH parse_system(const nlohmann::json& config);
IntegratorConfig parse_integrator(const nlohmann::json& config, const IntegratorConfig& defaults);
SingleRunConfig parse_single_run(const nlohmann::json& config,
                                 const std::filesystem::path& base_dir = {});

struct RunOutput {
  std::string experiment;
  std::string csv;        // preamble + header + rows
  nlohmann::json meta;    // fits, extracted frequencies, config hash, ...
};

/// Validates `config` and runs the experiment it names.
RunOutput run_experiment(const nlohmann::json& config, const std::filesystem::path& base_dir = {});

}  // namespace fockme
