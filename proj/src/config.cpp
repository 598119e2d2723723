#include "tracerlab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace trl {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
        if (!ok) return false;
    }
    return true;
}

double parse_double(const std::string& section, const std::string& key, const std::string& text) {
    std::string t = trim(text);
    const char* b = t.c_str();
    char* end = nullptr;
    double v = std::strtod(b, &end);
    if (end != b + t.size() || t.empty() || !std::isfinite(v))
        throw ConfigError("[" + section + "] " + key + ": not a finite number: '" + text + "'");
    return v;
}

} // namespace

std::string format_double(double v) {
    // Shortest decimal form that round-trips; %.17g always does, shorter
    // forms are picked when they reparse exactly.
    for (int prec = 1; prec <= 17; ++prec) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == v || (std::isnan(back) && std::isnan(v))) return buf;
    }
    return "0";
}

ConfigFile ConfigFile::parse(const std::string& text) {
    ConfigFile cfg;
    Section* current = nullptr;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
            std::string name = trim(line.substr(1, line.size() - 2));
            if (!valid_name(name))
                throw ConfigError("line " + std::to_string(lineno) + ": bad section name '" + name + "'");
            if (cfg.find_section(name))
                throw ConfigError("line " + std::to_string(lineno) + ": duplicate section [" + name + "]");
            cfg.sections_.push_back({name, {}});
            current = &cfg.sections_.back();
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        if (!current)
            throw ConfigError("line " + std::to_string(lineno) + ": key outside any [section]");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (!valid_name(key))
            throw ConfigError("line " + std::to_string(lineno) + ": bad key '" + key + "'");
        for (const auto& e : current->entries)
            if (e.first == key)
                throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key +
                                  "' in [" + current->name + "]");
        current->entries.emplace_back(key, value);
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string ConfigFile::serialize() const {
    std::string out;
    for (std::size_t i = 0; i < sections_.size(); ++i) {
        if (i) out += "\n";
        out += "[" + sections_[i].name + "]\n";
        for (const auto& e : sections_[i].entries) out += e.first + " = " + e.second + "\n";
    }
    return out;
}

const ConfigFile::Section* ConfigFile::find_section(const std::string& name) const {
    for (const auto& s : sections_)
        if (s.name == name) return &s;
    return nullptr;
}

ConfigFile::Section& ConfigFile::section(const std::string& name) {
    for (auto& s : sections_)
        if (s.name == name) return s;
    sections_.push_back({name, {}});
    return sections_.back();
}

bool ConfigFile::has(const std::string& sec, const std::string& key) const {
    return find(sec, key).has_value();
}

std::optional<std::string> ConfigFile::find(const std::string& sec, const std::string& key) const {
    const Section* s = find_section(sec);
    if (!s) return std::nullopt;
    for (const auto& e : s->entries)
        if (e.first == key) return e.second;
    return std::nullopt;
}

std::string ConfigFile::get_string(const std::string& sec, const std::string& key) const {
    auto v = find(sec, key);
    if (!v) throw ConfigError("missing config key [" + sec + "] " + key);
    return *v;
}

double ConfigFile::get_double(const std::string& sec, const std::string& key) const {
    return parse_double(sec, key, get_string(sec, key));
}

std::int64_t ConfigFile::get_int(const std::string& sec, const std::string& key) const {
    std::string t = trim(get_string(sec, key));
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size())
        throw ConfigError("[" + sec + "] " + key + ": not an integer: '" + t + "'");
    return v;
}

std::uint64_t ConfigFile::get_u64(const std::string& sec, const std::string& key) const {
    std::string t = trim(get_string(sec, key));
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size())
        throw ConfigError("[" + sec + "] " + key + ": not an unsigned integer: '" + t + "'");
    return v;
}

bool ConfigFile::get_bool(const std::string& sec, const std::string& key) const {
    std::string t = trim(get_string(sec, key));
    std::transform(t.begin(), t.end(), t.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ConfigError("[" + sec + "] " + key + ": not a boolean: '" + t + "'");
}

std::vector<double> ConfigFile::get_grid(const std::string& sec, const std::string& key) const {
    std::istringstream in(get_string(sec, key));
    std::vector<double> grid;
    std::string tok;
    while (in >> tok) grid.push_back(parse_double(sec, key, tok));
    if (grid.empty())
        throw ConfigError("[" + sec + "] " + key + ": empty parameter grid");
    return grid;
}

void ConfigFile::set(const std::string& sec, const std::string& key, const std::string& value) {
    if (!valid_name(sec) || !valid_name(key))
        throw ConfigError("bad section or key name: [" + sec + "] " + key);
    Section& s = section(sec);
    for (auto& e : s.entries)
        if (e.first == key) {
            e.second = value;
            return;
        }
    s.entries.emplace_back(key, value);
}

void ConfigFile::set(const std::string& sec, const std::string& key, double value) {
    set(sec, key, format_double(value));
}
void ConfigFile::set(const std::string& sec, const std::string& key, std::int64_t value) {
    set(sec, key, std::to_string(value));
}
void ConfigFile::set(const std::string& sec, const std::string& key, std::uint64_t value) {
    set(sec, key, std::to_string(value));
}

std::vector<std::string> ConfigFile::section_names() const {
    std::vector<std::string> out;
    for (const auto& s : sections_) out.push_back(s.name);
    return out;
}

std::vector<std::string> ConfigFile::keys(const std::string& sec) const {
    std::vector<std::string> out;
    if (const Section* s = find_section(sec))
        for (const auto& e : s->entries) out.push_back(e.first);
    return out;
}

bool ConfigFile::operator==(const ConfigFile& other) const {
    if (sections_.size() != other.sections_.size()) return false;
    for (std::size_t i = 0; i < sections_.size(); ++i) {
        if (sections_[i].name != other.sections_[i].name) return false;
        if (sections_[i].entries != other.sections_[i].entries) return false;
    }
    return true;
}

} // namespace trl
