#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "nlohmann/json.hpp"

namespace qbsde {

inline constexpr const char* kArtifactVersion = "0.1.0";

/// Invalid configuration (schema violation, unknown key, missing seed, or a
/// parameter combination the theory excludes). Maps to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// FNV-1a over the canonical (sorted-key) dump of the config.
std::string config_hash(const nlohmann::json& config);

/// Executes one experiment described by a JSON config and writes
/// manifest.json, result.json, and any CSV series into out_dir. Returns the
/// manifest. Flagged divergence is a result, not an error.
nlohmann::json run_experiment(const nlohmann::json& config,
                              const std::filesystem::path& out_dir, bool quiet);

/// CLI entry: reads the config file, applies the seed override, resolves the
/// output directory (flag, else QBSDE_OUT_DIR, else ./qbsde-out), and maps
/// errors to exit codes {0, 2, 3}.
int run_cli(const std::string& config_path, const std::optional<std::string>& out_dir,
            std::optional<std::uint64_t> seed_override, bool quiet);

/// Alphabetized gallery table with short descriptions.
nlohmann::json gallery_table();

/// Full-precision CSV field (17 significant digits, RFC 4180 quoting).
std::string csv_field(double v);
std::string csv_field(const std::string& s);

}  // namespace qbsde
