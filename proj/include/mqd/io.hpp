#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "mqd/integrator.hpp"

// File formats: long-format trajectory CSV, flat key=value config files, and
// the shared number formatting that makes reruns byte-comparable.

namespace mqd {

// Shortest round-trip decimal form of a double. Used everywhere a number ends
// up in a file so that identical doubles always serialize identically.
inline std::string format_double(double v) {
    char buf[32];
    const std::to_chars_result res = std::to_chars(buf, buf + sizeof buf, v);
    if (res.ec != std::errc())
        throw std::runtime_error("double formatting failed");
    return std::string(buf, res.ptr);
}

// Trajectory CSV, one row per particle per snapshot:
//   t_ps,particle_index,x_nm
// Streams without knowing the particle count up front and loads with any
// CSV reader.
inline void write_trajectory_csv(std::ostream& out, const Trajectory& t) {
    out << "t_ps,particle_index,x_nm\n";
    for (std::size_t i = 0; i < t.frames(); ++i) {
        const std::string ts = format_double(t.times[i]);
        for (std::size_t j = 0; j < t.positions[i].size(); ++j)
            out << ts << ',' << j << ',' << format_double(t.positions[i][j]) << '\n';
    }
}

inline void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& t) {
    std::ofstream out(path, std::ios::binary);  // binary: byte-stable newlines
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_trajectory_csv(out, t);
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Quantity parsing: plain numbers with an optional unit suffix ("60ps",
// "100 nm", "27.5"). The suffix, when present, must match the expected unit.

inline double parse_quantity(std::string_view text, std::string_view expected_unit) {
    std::size_t b = 0, e = text.size();
    while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
    if (b == e) throw std::invalid_argument("empty quantity");

    // Split off a trailing alphabetic suffix.
    std::size_t s = e;
    while (s > b && (std::isalpha(static_cast<unsigned char>(text[s - 1])) ||
                     text[s - 1] == '%'))
        --s;
    std::string_view num = text.substr(b, s - b);
    std::string_view unit = text.substr(s, e - s);
    while (!num.empty() && std::isspace(static_cast<unsigned char>(num.back())))
        num.remove_suffix(1);
    if (!unit.empty() && unit != expected_unit)
        throw std::invalid_argument("unit '" + std::string(unit) + "' does not match expected '" +
                                    std::string(expected_unit) + "'");

    double value = 0.0;
    const char* first = num.data();
    const char* last = num.data() + num.size();
    const std::from_chars_result res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last)
        throw std::invalid_argument("malformed number '" + std::string(num) + "'");
    return value;
}

// ---------------------------------------------------------------------------
// Config files. The native format is flat key = value text:
//
//     # comment
//     scenario   = box
//     particles  = 101
//     duration   = 60ps
//
// A file whose first non-space byte is '{' is instead read as JSON; if it has
// a top-level "config" object (i.e. it is a report.json), that object is
// used, so a previous run's report works directly as --config.

using ConfigMap = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::string json_scalar_to_string(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number()) return format_double(v.get<double>());
    throw std::invalid_argument("config value is not a scalar: " + v.dump());
}

}  // namespace detail

inline ConfigMap parse_config_text(const std::string& text) {
    // JSON sniff.
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        if (c == '{') {
            nlohmann::json j = nlohmann::json::parse(text);
            if (j.contains("config") && j["config"].is_object()) j = j["config"];
            ConfigMap m;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (it.value().is_object()) continue;
                if (it.value().is_array()) {
                    std::string joined;
                    for (const auto& elem : it.value()) {
                        if (!joined.empty()) joined += ',';
                        joined += detail::json_scalar_to_string(elem);
                    }
                    m[it.key()] = joined;
                    continue;
                }
                m[it.key()] = detail::json_scalar_to_string(it.value());
            }
            return m;
        }
        break;
    }

    ConfigMap m;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        if (t.front() == '[' && t.back() == ']') continue;  // tolerate section headers
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        " is not key = value: '" + t + "'");
        const std::string key = detail::trim(std::string_view(t).substr(0, eq));
        const std::string val = detail::trim(std::string_view(t).substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("empty config key at line " +
                                                     std::to_string(lineno));
        m[key] = val;
    }
    return m;
}

inline ConfigMap read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

// ---------------------------------------------------------------------------
// Output directories: <root>/<name>-YYYYMMDD-HHMMSS[-k]/ where root comes
// from --out, then $MQD_OUT, then the current directory.

inline std::filesystem::path make_run_directory(const std::filesystem::path& root,
                                                const std::string& name,
                                                std::tm stamp) {
    char ts[32];
    std::snprintf(ts, sizeof ts, "%04d%02d%02d-%02d%02d%02d", stamp.tm_year + 1900,
                  stamp.tm_mon + 1, stamp.tm_mday, stamp.tm_hour, stamp.tm_min, stamp.tm_sec);
    std::filesystem::create_directories(root);
    for (int k = 0;; ++k) {
        std::filesystem::path dir =
            root / (k == 0 ? name + "-" + ts : name + "-" + ts + "-" + std::to_string(k));
        std::error_code ec;
        if (std::filesystem::create_directory(dir, ec)) return dir;
        if (ec && ec != std::errc::file_exists)
            throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
        if (k > 1000) throw std::runtime_error("cannot find a free run directory under " +
                                               root.string());
    }
}

}  // namespace mqd
