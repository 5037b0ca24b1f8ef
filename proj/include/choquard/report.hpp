#pragma once

// Machine-readable output: a versioned JSON report per run and CSV tables for
// anything plot-shaped. CSV bodies are deterministic for a fixed config and
// version: numbers are printed with shortest-round-trip formatting, comma
// separated, '.' decimal, LF endings, header mandatory. Timings live only in
// the JSON report.

#include <charconv>
#include <chrono>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "choquard/config.hpp"

namespace choquard {

inline constexpr const char* k_report_schema = "choquard-report/1";
inline constexpr const char* k_tool_version = "0.1.0";

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double x) {
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc{}) throw std::runtime_error("format_double failed");
    return std::string(buf, p);
}

inline nlohmann::json to_json(const toml::Value& v) {
    using K = toml::Value::Kind;
    switch (v.kind) {
        case K::Bool: return v.b;
        case K::Int: return v.i;
        case K::Float: return v.d;
        case K::Str: return v.s;
        case K::Array: {
            nlohmann::json a = nlohmann::json::array();
            for (const auto& e : v.arr) a.push_back(to_json(e));
            return a;
        }
    }
    return nullptr;
}

/// Echoes the parsed config as nested JSON ("grid.n" -> config.grid.n).
inline nlohmann::json config_echo(const toml::Table& table) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [key, value] : table) {
        const std::size_t dot = key.find('.');
        if (dot == std::string::npos)
            out[key] = to_json(value);
        else
            out[key.substr(0, dot)][key.substr(dot + 1)] = to_json(value);
    }
    return out;
}

class Stopwatch {
  public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        const auto d = std::chrono::steady_clock::now() - start_;
        return std::chrono::duration<double, std::milli>(d).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

/// Skeleton report with the schema tag and config echo filled in; callers add
/// "results" and "timings_ms" entries.
inline nlohmann::json make_report(const ExperimentConfig& cfg, const std::string& command) {
    nlohmann::json rep;
    rep["schema"] = k_report_schema;
    rep["tool_version"] = k_tool_version;
    rep["command"] = command;
    rep["config"] = config_echo(cfg.raw);
    rep["results"] = nlohmann::json::object();
    rep["timings_ms"] = nlohmann::json::object();
    return rep;
}

inline void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << body;
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

inline void write_report(const std::string& path, const nlohmann::json& rep) {
    write_text_file(path, rep.dump(2) + "\n");
}

/// Column-oriented CSV table; every cell is a string already in final form.
class CsvTable {
  public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
        if (header_.empty()) throw std::invalid_argument("CsvTable: header required");
    }

    void add_row(std::vector<std::string> cells) {
        if (cells.size() != header_.size())
            throw std::invalid_argument("CsvTable: row width mismatch");
        rows_.push_back(std::move(cells));
    }

    std::string body() const {
        std::string out;
        auto append_row = [&out](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i) out.push_back(',');
                out += cells[i];
            }
            out.push_back('\n');
        };
        append_row(header_);
        for (const auto& row : rows_) append_row(row);
        return out;
    }

    void write(const std::string& path) const { write_text_file(path, body()); }

  private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace choquard
