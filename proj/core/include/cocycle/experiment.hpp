#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace cocycle {

inline constexpr const char* kLibraryVersion = "0.1.0";

const std::vector<std::string>& experiment_commands();

struct ConfigKey {
  std::string name;
  std::string type;  // string, integer, number, boolean, numbers, integers, json
  bool required = false;
};

/// Keys accepted by `command`, common keys included, `command` itself excluded.
std::vector<ConfigKey> experiment_keys(const std::string& command);

struct ExperimentOutcome {
  std::string command;
  std::string name;         // `name` key, or "<index>-<command>" inside a batch
  std::string config_hash;  // FNV-1a 64 of the canonical config
  std::string csv;          // with `# key=value` header lines
  std::string summary;      // JSON
  std::string output_path;  // from the config, empty when absent
  std::string summary_path;
  /// False when a checked property failed; the CLI maps this to exit 4 under --strict.
  bool property_ok = true;
  std::vector<std::string> violations;
};

/// Runs one experiment described by a JSON object. Relative input paths are
/// resolved against `base_dir`. Nothing is written to disk. Throws
/// Error(validation) on schema violations, including unknown keys.
ExperimentOutcome run_experiment(const std::string& config_json,
                                 const std::filesystem::path& base_dir = std::filesystem::current_path());

/// Accepts either a single experiment or {"description": ..., "runs": [...]}.
std::vector<ExperimentOutcome> run_batch(const std::string& config_json,
                                         const std::filesystem::path& base_dir = std::filesystem::current_path());

/// The canonical form used for hashing: defaults filled in, keys sorted,
/// output paths, name and strict removed.
std::string canonical_config(const std::string& config_json);

}  // namespace cocycle
