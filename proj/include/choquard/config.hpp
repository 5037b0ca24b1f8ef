#pragma once

// Experiment configuration: a strict subset of TOML (tables, scalar keys,
// single-line arrays, # comments) mapped onto typed specs. The subset is
// deliberate: configs stay trivially diffable and the parser rejects anything
// it does not understand, including unknown keys, so typos fail loudly.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "choquard/params.hpp"
#include "choquard/potentials.hpp"
#include "choquard/solver.hpp"

namespace choquard::toml {

struct Value {
    enum class Kind { Bool, Int, Float, Str, Array };
    Kind kind = Kind::Int;
    bool b = false;
    long long i = 0;
    double d = 0.0;
    std::string s;
    std::vector<Value> arr;

    bool as_bool() const {
        if (kind != Kind::Bool) throw std::runtime_error("config: expected a boolean");
        return b;
    }
    long long as_int() const {
        if (kind != Kind::Int) throw std::runtime_error("config: expected an integer");
        return i;
    }
    double as_double() const {
        if (kind == Kind::Int) return static_cast<double>(i);
        if (kind != Kind::Float) throw std::runtime_error("config: expected a number");
        return d;
    }
    const std::string& as_string() const {
        if (kind != Kind::Str) throw std::runtime_error("config: expected a string");
        return s;
    }
    std::vector<double> as_double_array() const {
        if (kind != Kind::Array) throw std::runtime_error("config: expected an array");
        std::vector<double> out;
        out.reserve(arr.size());
        for (const Value& v : arr) out.push_back(v.as_double());
        return out;
    }
    std::vector<long long> as_int_array() const {
        if (kind != Kind::Array) throw std::runtime_error("config: expected an array");
        std::vector<long long> out;
        out.reserve(arr.size());
        for (const Value& v : arr) out.push_back(v.as_int());
        return out;
    }
};

/// Flat table keyed by "section.key".
using Table = std::map<std::string, Value>;

namespace detail {

[[noreturn]] inline void fail(int line, const std::string& what) {
    throw std::runtime_error("config line " + std::to_string(line) + ": " + what);
}

inline void skip_ws(const std::string& t, std::size_t& pos) {
    while (pos < t.size() && (t[pos] == ' ' || t[pos] == '\t')) ++pos;
}

inline bool bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

inline Value parse_value(const std::string& t, std::size_t& pos, int line);

inline Value parse_string(const std::string& t, std::size_t& pos, int line) {
    Value v;
    v.kind = Value::Kind::Str;
    ++pos;  // opening quote
    while (pos < t.size() && t[pos] != '"') {
        char c = t[pos++];
        if (c == '\\') {
            if (pos >= t.size()) fail(line, "dangling escape in string");
            switch (t[pos++]) {
                case '"': c = '"'; break;
                case '\\': c = '\\'; break;
                case 'n': c = '\n'; break;
                case 't': c = '\t'; break;
                default: fail(line, "unsupported escape in string");
            }
        }
        v.s.push_back(c);
    }
    if (pos >= t.size()) fail(line, "unterminated string");
    ++pos;  // closing quote
    return v;
}

inline Value parse_number(const std::string& t, std::size_t& pos, int line) {
    const std::size_t start = pos;
    while (pos < t.size() &&
           (std::isdigit(static_cast<unsigned char>(t[pos])) || t[pos] == '+' || t[pos] == '-' ||
            t[pos] == '.' || t[pos] == 'e' || t[pos] == 'E' || t[pos] == '_'))
        ++pos;
    std::string tok = t.substr(start, pos - start);
    std::erase(tok, '_');
    if (tok.empty()) fail(line, "expected a number");
    const bool floaty = tok.find_first_of(".eE") != std::string::npos;
    Value v;
    if (!floaty) {
        v.kind = Value::Kind::Int;
        const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v.i);
        if (ec != std::errc{} || p != tok.data() + tok.size()) fail(line, "bad integer '" + tok + "'");
    } else {
        v.kind = Value::Kind::Float;
        const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v.d);
        if (ec != std::errc{} || p != tok.data() + tok.size()) fail(line, "bad number '" + tok + "'");
    }
    return v;
}

inline Value parse_value(const std::string& t, std::size_t& pos, int line) {
    skip_ws(t, pos);
    if (pos >= t.size()) fail(line, "missing value");
    const char c = t[pos];
    if (c == '"') return parse_string(t, pos, line);
    if (c == '[') {
        Value v;
        v.kind = Value::Kind::Array;
        ++pos;
        skip_ws(t, pos);
        if (pos < t.size() && t[pos] == ']') {
            ++pos;
            return v;
        }
        for (;;) {
            v.arr.push_back(parse_value(t, pos, line));
            skip_ws(t, pos);
            if (pos >= t.size()) fail(line, "unterminated array (arrays must be single-line)");
            if (t[pos] == ',') {
                ++pos;
                skip_ws(t, pos);
                continue;
            }
            if (t[pos] == ']') {
                ++pos;
                return v;
            }
            fail(line, "expected ',' or ']' in array");
        }
    }
    if (t.compare(pos, 4, "true") == 0 && (pos + 4 >= t.size() || !bare_key_char(t[pos + 4]))) {
        pos += 4;
        Value v;
        v.kind = Value::Kind::Bool;
        v.b = true;
        return v;
    }
    if (t.compare(pos, 5, "false") == 0 && (pos + 5 >= t.size() || !bare_key_char(t[pos + 5]))) {
        pos += 5;
        Value v;
        v.kind = Value::Kind::Bool;
        v.b = false;
        return v;
    }
    return parse_number(t, pos, line);
}

}  // namespace detail

inline Table parse(const std::string& text) {
    Table out;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        std::size_t pos = 0;
        detail::skip_ws(raw, pos);
        if (pos >= raw.size() || raw[pos] == '#') continue;
        if (raw[pos] == '[') {
            const std::size_t close = raw.find(']', pos);
            if (close == std::string::npos) detail::fail(line, "unterminated table header");
            section = raw.substr(pos + 1, close - pos - 1);
            if (section.empty()) detail::fail(line, "empty table name");
            for (char c : section)
                if (!detail::bare_key_char(c)) detail::fail(line, "bad table name '" + section + "'");
            pos = close + 1;
            detail::skip_ws(raw, pos);
            if (pos < raw.size() && raw[pos] != '#')
                detail::fail(line, "trailing characters after table header");
            continue;
        }
        const std::size_t kstart = pos;
        while (pos < raw.size() && detail::bare_key_char(raw[pos])) ++pos;
        if (pos == kstart) detail::fail(line, "expected a key");
        const std::string key = raw.substr(kstart, pos - kstart);
        detail::skip_ws(raw, pos);
        if (pos >= raw.size() || raw[pos] != '=') detail::fail(line, "expected '=' after key");
        ++pos;
        const Value v = detail::parse_value(raw, pos, line);
        detail::skip_ws(raw, pos);
        if (pos < raw.size() && raw[pos] != '#') detail::fail(line, "trailing characters after value");
        const std::string full = section.empty() ? key : section + "." + key;
        if (out.count(full)) detail::fail(line, "duplicate key '" + full + "'");
        out[full] = v;
    }
    return out;
}

inline Table parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
    std::ostringstream body;
    body << in.rdbuf();
    return parse(body.str());
}

}  // namespace choquard::toml

namespace choquard {

struct GridSpec {
    double r_max = 40.0;
    std::size_t n = 2000;
    double grading = 1.0;
};

struct PotentialSpec {
    std::string family = "model";  // constant | model | null | tabulated
    double c = 1.0;
    double mu = 1.0;
    double lambda = 1.0;
    std::string csv;  // tabulated family, resolved against the config directory
};

struct SweepSpec {
    // Default well depths stay clear of both existence thresholds (1/4 and
    // 9/16 at dim 3) by more than the default margin.
    std::vector<double> mu_values{0.1, 0.18, 0.4, 0.7, 1.0};
    double threshold_margin = 0.05;
};

struct ScanSpec {
    std::vector<double> lambdas;  // empty: powers of two, 2^-2 .. 2^8
};

struct VerifySpec {
    std::vector<int> quadrature_dims{3, 4, 5, 6};
    std::vector<double> hardy_lambdas{0.5, 1.0, 2.0};
    std::vector<double> oracle_alphas{0.5, 1.0, 2.0};
    std::vector<double> null_lambdas{0.5, 1.0, 2.0};
    int fd_fields = 10;
};

struct ExperimentConfig {
    ProblemParams params{3, 1.0};
    GridSpec grid;
    PotentialSpec potential;
    SolveOptions solver;
    SweepSpec sweep;
    ScanSpec scan;
    VerifySpec verify;
    std::string cache_dir;

    toml::Table raw;         // parsed key/value pairs, echoed into reports
    std::string config_dir;  // directory of the source file, for relative paths
};

inline std::vector<double> default_scan_lambdas() {
    std::vector<double> l;
    for (int k = -2; k <= 8; ++k) l.push_back(std::pow(2.0, k));
    return l;
}

namespace detail {

inline const std::set<std::string>& known_config_keys() {
    static const std::set<std::string> keys = {
        "problem.dim",          "problem.alpha",        "grid.r_max",
        "grid.n",               "grid.grading",         "potential.family",
        "potential.c",          "potential.mu",         "potential.lambda",
        "potential.csv",        "solver.max_iters",     "solver.grad_tol",
        "solver.step0",         "solver.init",          "solver.lambda0",
        "solver.sigma0",        "solver.spread_frac",   "solver.spread_checks",
        "solver.check_every",   "solver.precondition",  "sweep.mu_values",
        "sweep.threshold_margin", "scan.lambdas",       "verify.quadrature_dims",
        "verify.hardy_lambdas", "verify.oracle_alphas", "verify.null_lambdas",
        "verify.fd_fields",     "cache.dir",
    };
    return keys;
}

}  // namespace detail

/// Maps a parsed table onto the typed config; rejects unknown keys.
inline ExperimentConfig make_config(toml::Table table, std::string config_dir = ".") {
    for (const auto& [key, value] : table)
        if (!detail::known_config_keys().count(key))
            throw std::runtime_error("config: unknown key '" + key + "'");

    ExperimentConfig cfg;
    cfg.raw = table;
    cfg.config_dir = std::move(config_dir);
    auto get = [&](const char* key) -> const toml::Value* {
        const auto it = table.find(key);
        return it == table.end() ? nullptr : &it->second;
    };

    if (const auto* v = get("problem.dim")) cfg.params.dim = static_cast<int>(v->as_int());
    if (const auto* v = get("problem.alpha")) cfg.params.alpha = v->as_double();
    cfg.params.validate();

    if (const auto* v = get("grid.r_max")) cfg.grid.r_max = v->as_double();
    if (const auto* v = get("grid.n")) {
        const long long n = v->as_int();
        if (n < 4) throw std::runtime_error("config: grid.n must be at least 4");
        cfg.grid.n = static_cast<std::size_t>(n);
    }
    if (const auto* v = get("grid.grading")) cfg.grid.grading = v->as_double();
    if (!(cfg.grid.r_max > 0.0)) throw std::runtime_error("config: grid.r_max must be positive");
    if (!(cfg.grid.grading >= 1.0)) throw std::runtime_error("config: grid.grading must be >= 1");

    if (const auto* v = get("potential.family")) cfg.potential.family = v->as_string();
    if (const auto* v = get("potential.c")) cfg.potential.c = v->as_double();
    if (const auto* v = get("potential.mu")) cfg.potential.mu = v->as_double();
    if (const auto* v = get("potential.lambda")) cfg.potential.lambda = v->as_double();
    if (const auto* v = get("potential.csv")) cfg.potential.csv = v->as_string();
    {
        const std::string& f = cfg.potential.family;
        if (f != "constant" && f != "model" && f != "null" && f != "tabulated")
            throw std::runtime_error("config: unknown potential.family '" + f + "'");
        if (f == "tabulated" && cfg.potential.csv.empty())
            throw std::runtime_error("config: potential.csv required for the tabulated family");
    }

    if (const auto* v = get("solver.max_iters")) cfg.solver.max_iters = static_cast<int>(v->as_int());
    if (const auto* v = get("solver.grad_tol")) cfg.solver.grad_tol = v->as_double();
    if (const auto* v = get("solver.step0")) cfg.solver.step0 = v->as_double();
    if (const auto* v = get("solver.init")) {
        const std::string& s = v->as_string();
        if (s == "profile")
            cfg.solver.init = SolveOptions::Init::Profile;
        else if (s == "gaussian")
            cfg.solver.init = SolveOptions::Init::Gaussian;
        else
            throw std::runtime_error("config: solver.init must be 'profile' or 'gaussian'");
    }
    if (const auto* v = get("solver.lambda0")) cfg.solver.lambda0 = v->as_double();
    if (const auto* v = get("solver.sigma0")) cfg.solver.sigma0 = v->as_double();
    if (const auto* v = get("solver.spread_frac")) cfg.solver.spread_frac = v->as_double();
    if (const auto* v = get("solver.spread_checks"))
        cfg.solver.spread_checks = static_cast<int>(v->as_int());
    if (const auto* v = get("solver.check_every"))
        cfg.solver.check_every = static_cast<int>(v->as_int());
    if (const auto* v = get("solver.precondition")) cfg.solver.precondition = v->as_bool();
    if (cfg.solver.max_iters < 1) throw std::runtime_error("config: solver.max_iters must be >= 1");
    if (!(cfg.solver.grad_tol > 0.0))
        throw std::runtime_error("config: solver.grad_tol must be positive");

    if (const auto* v = get("sweep.mu_values")) cfg.sweep.mu_values = v->as_double_array();
    if (const auto* v = get("sweep.threshold_margin")) cfg.sweep.threshold_margin = v->as_double();
    if (const auto* v = get("scan.lambdas")) cfg.scan.lambdas = v->as_double_array();
    if (cfg.scan.lambdas.empty()) cfg.scan.lambdas = default_scan_lambdas();
    for (double l : cfg.scan.lambdas)
        if (!(l > 0.0)) throw std::runtime_error("config: scan.lambdas must be positive");

    if (const auto* v = get("verify.quadrature_dims")) {
        cfg.verify.quadrature_dims.clear();
        for (long long d : v->as_int_array())
            cfg.verify.quadrature_dims.push_back(static_cast<int>(d));
    }
    if (const auto* v = get("verify.hardy_lambdas")) cfg.verify.hardy_lambdas = v->as_double_array();
    if (const auto* v = get("verify.oracle_alphas")) cfg.verify.oracle_alphas = v->as_double_array();
    if (const auto* v = get("verify.null_lambdas")) cfg.verify.null_lambdas = v->as_double_array();
    if (const auto* v = get("verify.fd_fields")) cfg.verify.fd_fields = static_cast<int>(v->as_int());
    if (cfg.verify.fd_fields < 1) throw std::runtime_error("config: verify.fd_fields must be >= 1");

    if (const auto* v = get("cache.dir")) cfg.cache_dir = v->as_string();
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::string dir = ".";
    const std::size_t slash = path.find_last_of('/');
    if (slash != std::string::npos) dir = path.substr(0, slash);
    return make_config(toml::parse_file(path), dir);
}

/// Instantiates the configured potential, resolving CSV paths against the
/// config file's directory.
inline Potential make_potential(const ExperimentConfig& cfg) {
    const PotentialSpec& spec = cfg.potential;
    if (spec.family == "constant") return Potential::constant(spec.c);
    if (spec.family == "model") return Potential::model(spec.mu);
    if (spec.family == "null") return Potential::null_family(spec.lambda);
    std::string path = spec.csv;
    if (!path.empty() && path.front() != '/') path = cfg.config_dir + "/" + path;
    return load_potential_csv(path);
}

inline RadialGrid make_grid(const ExperimentConfig& cfg) {
    return build_grid(cfg.params.dim, cfg.grid.r_max, cfg.grid.n, cfg.grid.grading);
}

}  // namespace choquard
