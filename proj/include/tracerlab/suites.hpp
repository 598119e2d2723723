#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tracerlab/config.hpp"
#include "tracerlab/manifest.hpp"

namespace trl {

// Named experiment suites. Each maps onto one or two modules and carries its
// tolerance profile in the config defaults, so gates are versioned together
// with the parameters that earned them.
std::vector<std::string> suite_names();

// Full schema for a suite: every recognized key with its preset default.
// Unknown suite or preset -> ConfigError. Presets: "quick" (seconds to a
// couple of minutes) and "paper" (the acceptance-scale run).
ConfigFile default_suite_config(const std::string& suite, const std::string& preset);

struct SuiteResult {
    RunManifest manifest;
    std::string run_dir;
    std::string manifest_path;
    bool pass = false;
};

// Executes a suite end to end: resolve config (defaults, then overrides,
// then the explicit seed), run the experiment, write CSV/SVG outputs
// atomically, save the manifest, append the run ledger.
//
// overrides may be null. Unknown keys, value mismatches with [meta], or
// empty grids raise ConfigError; filesystem problems raise IoError.
SuiteResult run_suite(const std::string& suite, const std::string& preset,
                      const ConfigFile* overrides, const std::string& out_root,
                      std::optional<std::uint64_t> seed = std::nullopt);

} // namespace trl
