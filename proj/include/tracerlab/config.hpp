#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace trl {

// Config or schema problem; the CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Key-value configuration with [section] headers.
//
//   # comment (also ;)
//   [meta]
//   schema_version = 1
//   [params]
//   L_grid = 4 16 64
//
// Rules: keys live inside a section, first '=' splits key from value, both
// trimmed; duplicate sections or duplicate keys within a section are
// an error (silent last-wins would break the round-trip contract).
// serialize() emits a canonical text whose parse compares equal, which is
// what lets a manifest's config echo stand in for the original file.
class ConfigFile {
  public:
    static ConfigFile parse(const std::string& text);
    static ConfigFile load(const std::string& path); // file errors -> IoError semantics, see manifest.hpp
    std::string serialize() const;

    bool has(const std::string& section, const std::string& key) const;
    std::optional<std::string> find(const std::string& section, const std::string& key) const;

    // Typed getters throw ConfigError when the key is missing or malformed.
    std::string get_string(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key) const;
    std::int64_t get_int(const std::string& section, const std::string& key) const;
    std::uint64_t get_u64(const std::string& section, const std::string& key) const;
    bool get_bool(const std::string& section, const std::string& key) const;
    // Whitespace-separated list of numbers. Empty lists are a schema error
    // (an empty parameter grid can never run).
    std::vector<double> get_grid(const std::string& section, const std::string& key) const;

    // Insert or overwrite, preserving first-insertion order.
    void set(const std::string& section, const std::string& key, const std::string& value);
    void set(const std::string& section, const std::string& key, double value);
    void set(const std::string& section, const std::string& key, std::int64_t value);
    void set(const std::string& section, const std::string& key, std::uint64_t value);

    std::vector<std::string> section_names() const;
    std::vector<std::string> keys(const std::string& section) const;

    bool operator==(const ConfigFile& other) const;
    bool operator!=(const ConfigFile& other) const { return !(*this == other); }

  private:
    struct Section {
        std::string name;
        std::vector<std::pair<std::string, std::string>> entries;
    };
    std::vector<Section> sections_;

    const Section* find_section(const std::string& name) const;
    Section& section(const std::string& name);
};

// Exact round-trip formatting for doubles (shortest text that reparses to
// the same bits), shared by config, CSV, and manifest writers.
std::string format_double(double v);

} // namespace trl
