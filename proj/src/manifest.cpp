#include "tracerlab/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "tracerlab/config.hpp"

namespace fs = std::filesystem;

namespace trl {

std::uint64_t fnv1a64(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 14695981039346656037ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = fnv1a64(bytes.data(), bytes.size());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_text_atomic(const std::string& path, const std::string& content) {
    fs::path target(path);
    std::error_code ec;
    if (target.has_parent_path()) {
        fs::create_directories(target.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + target.parent_path().string() + ": " + ec.message());
    }
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp, ec);
            throw IoError("write failed: " + tmp.string());
        }
    }
    fs::rename(tmp, target, ec); // same directory: atomic replace on POSIX
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot rename into place: " + target.string());
    }
}

OutputRecord write_output(const std::string& run_dir, const std::string& name,
                          const std::string& content) {
    write_text_atomic((fs::path(run_dir) / name).string(), content);
    OutputRecord rec;
    rec.path = name;
    rec.bytes = content.size();
    rec.fnv1a64 = fnv1a64_hex(content);
    return rec;
}

nlohmann::json OutputRecord::to_json() const {
    return {{"path", path}, {"bytes", bytes}, {"fnv1a64", fnv1a64}};
}

nlohmann::json CheckRecord::to_json() const {
    return {{"name", name},     {"pass", pass},           {"value", value},
            {"target", target}, {"tolerance", tolerance}, {"detail", detail}};
}

bool RunManifest::pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

std::string RunManifest::metrics_digest() const {
    nlohmann::json core = {{"suite", suite},          {"preset", preset},
                           {"config_echo", config_echo}, {"master_seed", master_seed},
                           {"metrics", metrics},      {"tables", tables}};
    nlohmann::json chk = nlohmann::json::array();
    for (const auto& c : checks) chk.push_back(c.to_json());
    core["checks"] = chk;
    return fnv1a64_hex(core.dump());
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json j = {{"tool_version", tool_version},
                        {"schema_version", schema_version},
                        {"suite", suite},
                        {"preset", preset},
                        {"config_echo", config_echo},
                        {"master_seed", master_seed},
                        {"wall_clock_sec", wall_clock_sec},
                        {"metrics", metrics},
                        {"tables", tables},
                        {"pass", pass()},
                        {"metrics_digest", metrics_digest()}};
    j["checks"] = nlohmann::json::array();
    for (const auto& c : checks) j["checks"].push_back(c.to_json());
    j["outputs"] = nlohmann::json::array();
    for (const auto& o : outputs) j["outputs"].push_back(o.to_json());
    return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
    RunManifest m;
    m.tool_version = j.value("tool_version", std::string(kToolVersion));
    m.schema_version = j.value("schema_version", kManifestSchemaVersion);
    m.suite = j.value("suite", std::string());
    m.preset = j.value("preset", std::string());
    m.config_echo = j.value("config_echo", std::string());
    m.master_seed = j.value("master_seed", std::uint64_t{0});
    m.wall_clock_sec = j.value("wall_clock_sec", 0.0);
    m.metrics = j.value("metrics", nlohmann::json::object());
    m.tables = j.value("tables", nlohmann::json::object());
    for (const auto& c : j.value("checks", nlohmann::json::array())) {
        CheckRecord r;
        r.name = c.value("name", std::string());
        r.pass = c.value("pass", false);
        r.value = c.value("value", 0.0);
        r.target = c.value("target", 0.0);
        r.tolerance = c.value("tolerance", 0.0);
        r.detail = c.value("detail", std::string());
        m.checks.push_back(r);
    }
    for (const auto& o : j.value("outputs", nlohmann::json::array())) {
        OutputRecord r;
        r.path = o.value("path", std::string());
        r.bytes = o.value("bytes", std::uint64_t{0});
        r.fnv1a64 = o.value("fnv1a64", std::string());
        m.outputs.push_back(r);
    }
    return m;
}

std::string save_manifest(const RunManifest& manifest, const std::string& run_dir,
                          const std::string& out_root) {
    fs::path path = fs::path(run_dir) / "manifest.json";
    write_text_atomic(path.string(), manifest.to_json().dump(2) + "\n");

    // Append-only run ledger: one line per completed run, never truncated.
    std::error_code ec;
    fs::create_directories(out_root, ec);
    if (ec) throw IoError("cannot create output root " + out_root + ": " + ec.message());
    auto now = std::chrono::system_clock::now().time_since_epoch();
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(now).count();
    std::ofstream log(fs::path(out_root) / "manifests.log", std::ios::app);
    if (!log) throw IoError("cannot append to manifests.log in " + out_root);
    log << secs << " suite=" << manifest.suite << " preset=" << manifest.preset
        << " seed=" << manifest.master_seed << " pass=" << (manifest.pass() ? 1 : 0)
        << " digest=" << manifest.metrics_digest() << " manifest=" << path.string() << "\n";
    if (!log) throw IoError("short write to manifests.log in " + out_root);
    return path.string();
}

RunManifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open manifest: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("manifest " + path + " is not valid JSON: " + e.what());
    }
    return RunManifest::from_json(j);
}

nlohmann::json make_table(const std::vector<std::string>& columns,
                          const std::vector<std::vector<double>>& rows,
                          const std::vector<std::string>& labels) {
    for (const auto& r : rows)
        if (r.size() != columns.size())
            throw std::logic_error("make_table: row width does not match column count");
    if (!labels.empty() && labels.size() != rows.size())
        throw std::logic_error("make_table: label count does not match row count");
    nlohmann::json t = {{"columns", columns}, {"rows", rows}};
    if (!labels.empty()) t["labels"] = labels;
    return t;
}

std::string csv_from_table(const nlohmann::json& table) {
    std::string out;
    bool labeled = table.contains("labels");
    if (labeled) out += "label,";
    const auto& cols = table.at("columns");
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i) out += ",";
        out += cols[i].get<std::string>();
    }
    out += "\n";
    const auto& rows = table.at("rows");
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (labeled) out += table.at("labels")[r].get<std::string>() + ",";
        const auto& row = rows[r];
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ",";
            out += format_double(row[i].get<double>());
        }
        out += "\n";
    }
    return out;
}

} // namespace trl
