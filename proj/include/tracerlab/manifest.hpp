#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace trl {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kManifestSchemaVersion = 1;

// Filesystem problem; the CLI maps this to exit code 3.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

std::uint64_t fnv1a64(const void* data, std::size_t n);
std::string fnv1a64_hex(const std::string& bytes);

// Write-to-temp + rename in the destination directory, so a reader never
// sees a partial file. Creates parent directories.
void write_text_atomic(const std::string& path, const std::string& content);

struct OutputRecord {
    std::string path; // relative to the run directory
    std::uint64_t bytes = 0;
    std::string fnv1a64;
    nlohmann::json to_json() const;
};

// Atomic write + digest record in one step.
OutputRecord write_output(const std::string& run_dir, const std::string& name,
                          const std::string& content);

struct CheckRecord {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double target = 0.0;    // gate center or bound, meaning given in detail
    double tolerance = 0.0; // half-width / slack actually applied
    std::string detail;
    nlohmann::json to_json() const;
};

// Persisted experiment record. Metric and table values are deterministic
// functions of the config echo (single-threaded compensated sums), so
// metrics_digest() is reproducible bit-exactly across reruns; wall clock and
// file records stay outside the digest.
struct RunManifest {
    std::string tool_version = kToolVersion;
    int schema_version = kManifestSchemaVersion;
    std::string suite;
    std::string preset;
    std::string config_echo; // canonical serialized ConfigFile
    std::uint64_t master_seed = 0;
    double wall_clock_sec = 0.0;
    nlohmann::json metrics = nlohmann::json::object();
    nlohmann::json tables = nlohmann::json::object(); // name -> {columns, rows[, labels]}
    std::vector<CheckRecord> checks;
    std::vector<OutputRecord> outputs;

    bool pass() const;
    std::string metrics_digest() const;
    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
};

// Writes <run_dir>/manifest.json atomically and appends one line to the
// append-only ledger <out_root>/manifests.log. Returns the manifest path.
std::string save_manifest(const RunManifest& manifest, const std::string& run_dir,
                          const std::string& out_root);

RunManifest load_manifest(const std::string& path);

// Tabular payload helpers shared by suites and plotting.
nlohmann::json make_table(const std::vector<std::string>& columns,
                          const std::vector<std::vector<double>>& rows,
                          const std::vector<std::string>& labels = {});
std::string csv_from_table(const nlohmann::json& table);

} // namespace trl
