// config.hpp: run configuration: flat dotted key = value documents
//
//   # comment
//   system.mass  = [1, 1, 1]          # or a scalar for all three axes
//   system.omega = [1, 1, 1]
//   system.hbar  = 1                  # default 1
//   coefficients.source = matrices    # or: vectors
//   coefficients.lambda = [1, 1, 1]   # 3x3 rows, or a 3-list for a diagonal
//   coefficients.Dqq    = [[0.5,0,0],[0,0.5,0],[0,0,0.5]]
//   coefficients.a1     = [[1,0],[0,0],[0,0],[0,0],[0,0],[0,0]]   # six [re, im]
//   initial.mean = [0, 0, 0, 0, 0, 0]
//   initial.cov  = [[1],[0,1],[0,0,1],[0,0,0,1],[0,0,0,0,1],[0,0,0,0,0,1]]
//   time.t_end = 10
//   time.n_steps = 100
//   output.means = true
//   oracle.enabled = false
//   oracle.dt = 0.001
//
// Values are JSON; a bare word is read as a string. A value whose brackets
// are unbalanced continues on the following lines.

#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lindblad3/core.hpp"
#include "lindblad3/propagator.hpp"

namespace lindblad3 {

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

enum class CoefficientSource { matrices, vectors };

struct TimeGrid {
    double t_end = 1.0;
    int n_steps = 100;

    double time(int i) const { return t_end * static_cast<double>(i) / static_cast<double>(n_steps); }
};

struct OutputSelection {
    bool means = true;
    bool covariances = true;
    bool l3 = true;
    bool l2 = true;
    bool stationary = false; // adds a distance-to-sigma(inf) column; needs a stable drift
};

struct OracleSettings {
    bool enabled = false;
    double dt = 1e-3;
};

struct RunConfig {
    OscillatorSystem system;
    CoefficientSource source = CoefficientSource::matrices;
    LindbladVectors vectors;
    OpeningCoefficients coefficients;
    GaussianState initial;
    TimeGrid grid;
    OutputSelection outputs;
    OracleSettings oracle;
    std::vector<std::string> warnings;
};

// Shortest decimal string that reads back to the same double.
inline std::string format_double(double x) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return {buf.data(), ptr};
}

namespace detail {

using json = nlohmann::json;

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline int bracket_balance(std::string_view s) {
    int depth = 0;
    for (char c : s) depth += (c == '[' || c == '{') - (c == ']' || c == '}');
    return depth;
}

inline std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

inline bool is_bare_word(const std::string& s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
    return s != "true" && s != "false" && s != "null";
}

// key -> (parsed value, line number)
using Document = std::map<std::string, std::pair<json, int>>;

inline Document tokenize(const std::string& text) {
    Document doc;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        const int start_line = line_no;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("", "line " + std::to_string(start_line) + ": expected 'key = value'");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        std::string value = trim(std::string_view(line).substr(eq + 1));
        while (bracket_balance(value) > 0 && std::getline(in, raw)) {
            ++line_no;
            value += " " + trim(strip_comment(raw));
        }
        if (key.empty()) throw ConfigError("", "line " + std::to_string(start_line) + ": empty key");
        if (value.empty()) throw ConfigError(key, "missing value");
        if (doc.count(key)) throw ConfigError(key, "duplicate key");
        json parsed;
        if (is_bare_word(value)) {
            parsed = value;
        } else {
            try {
                parsed = json::parse(value);
            } catch (const json::parse_error&) {
                throw ConfigError(key, "cannot parse value '" + value + "'");
            }
        }
        doc.emplace(key, std::make_pair(std::move(parsed), start_line));
    }
    return doc;
}

inline double as_real(const std::string& key, const json& v) {
    if (!v.is_number()) throw ConfigError(key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(key, "expected a finite number");
    return x;
}

inline bool as_bool(const std::string& key, const json& v) {
    if (!v.is_boolean()) throw ConfigError(key, "expected true or false");
    return v.get<bool>();
}

inline std::vector<double> as_real_list(const std::string& key, const json& v) {
    if (!v.is_array()) throw ConfigError(key, "expected a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_real(key + "[" + std::to_string(i) + "]", v[i]));
    return out;
}

// Scalar (broadcast) or 3-list.
inline Vec3 as_axis_vector(const std::string& key, const json& v) {
    if (v.is_number()) return Vec3::Constant(as_real(key, v));
    const auto xs = as_real_list(key, v);
    if (xs.size() != 3) throw ConfigError(key, "expected a number or a list of 3 numbers");
    return {xs[0], xs[1], xs[2]};
}

// 3x3 rows, or a 3-list taken as the diagonal.
inline Mat3 as_mat3(const std::string& key, const json& v) {
    if (!v.is_array() || v.size() != 3) throw ConfigError(key, "expected 3 rows of 3 numbers or a diagonal of 3");
    Mat3 m = Mat3::Zero();
    if (v[0].is_number()) {
        const auto d = as_real_list(key, v);
        m.diagonal() << d[0], d[1], d[2];
        return m;
    }
    for (Eigen::Index r = 0; r < 3; ++r) {
        const auto row = as_real_list(key + "[" + std::to_string(r) + "]", v[static_cast<std::size_t>(r)]);
        if (row.size() != 3) throw ConfigError(key, "row " + std::to_string(r) + " must have 3 entries");
        for (Eigen::Index c = 0; c < 3; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
    }
    return m;
}

inline cplx as_complex(const std::string& key, const json& v) {
    if (v.is_number()) return {as_real(key, v), 0.0};
    const auto xs = as_real_list(key, v);
    if (xs.size() != 2) throw ConfigError(key, "expected a complex number as [re, im]");
    return {xs[0], xs[1]};
}

inline CVec6 as_cvec6(const std::string& key, const json& v) {
    if (!v.is_array() || v.size() != 6) throw ConfigError(key, "expected 6 complex components");
    CVec6 out;
    for (std::size_t j = 0; j < 6; ++j)
        out[static_cast<Eigen::Index>(j)] = as_complex(key + "[" + std::to_string(j) + "]", v[j]);
    return out;
}

// Lower-triangle rows (lengths 1..6), full 6x6 rows, or a 6-list diagonal.
inline Mat6 as_covariance(const std::string& key, const json& v) {
    if (!v.is_array() || v.size() != 6) throw ConfigError(key, "expected 6 rows or a diagonal of 6");
    Mat6 m = Mat6::Zero();
    if (v[0].is_number()) {
        const auto d = as_real_list(key, v);
        for (Eigen::Index i = 0; i < 6; ++i) m(i, i) = d[static_cast<std::size_t>(i)];
        return m;
    }
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < 6; ++r) rows.push_back(as_real_list(key + "[" + std::to_string(r) + "]", v[r]));
    bool lower = true, full = true;
    for (std::size_t r = 0; r < 6; ++r) {
        lower = lower && rows[r].size() == r + 1;
        full = full && rows[r].size() == 6;
    }
    if (!lower && !full) throw ConfigError(key, "rows must form a lower triangle (lengths 1..6) or a full 6x6 matrix");
    for (Eigen::Index r = 0; r < 6; ++r)
        for (Eigen::Index c = 0; c <= (full ? 5 : r); ++c) m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    if (lower) {
        m.triangularView<Eigen::StrictlyUpper>() = m.transpose().triangularView<Eigen::StrictlyUpper>();
    } else {
        const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
        if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
            throw ConfigError(key, "covariance is not symmetric");
        m = symmetrize(m);
    }
    return m;
}

inline const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "system.mass",          "system.omega",        "system.hbar",         "coefficients.source",
        "coefficients.a1",      "coefficients.a2",     "coefficients.a3",     "coefficients.b1",
        "coefficients.b2",      "coefficients.b3",     "coefficients.Dqq",    "coefficients.Dpp",
        "coefficients.Dqp",     "coefficients.alpha",  "coefficients.beta",   "coefficients.lambda",
        "initial.mean",         "initial.cov",         "time.t_start",        "time.t_end",
        "time.n_steps",         "output.means",        "output.covariances",  "output.l3",
        "output.l2",            "output.stationary",   "oracle.enabled",      "oracle.dt"};
    return keys;
}

} // namespace detail

inline RunConfig parse_config(const std::string& text) {
    using detail::json;
    const detail::Document doc = detail::tokenize(text);
    for (const auto& [key, value] : doc)
        if (!detail::known_keys().count(key))
            throw ConfigError(key, "unknown key (line " + std::to_string(value.second) + ")");

    auto find = [&](const std::string& key) -> const json* {
        const auto it = doc.find(key);
        return it == doc.end() ? nullptr : &it->second.first;
    };
    auto require = [&](const std::string& key) -> const json& {
        const json* v = find(key);
        if (!v) throw ConfigError(key, "required key is missing");
        return *v;
    };

    RunConfig cfg;

    // system
    const Vec3 mass = detail::as_axis_vector("system.mass", require("system.mass"));
    const Vec3 omega = detail::as_axis_vector("system.omega", require("system.omega"));
    const double hbar = find("system.hbar") ? detail::as_real("system.hbar", *find("system.hbar")) : 1.0;
    for (Eigen::Index k = 0; k < 3; ++k) {
        if (!(mass[k] > 0.0)) throw ConfigError("system.mass", "mass of axis " + std::to_string(k + 1) + " must be positive");
        if (!(omega[k] > 0.0)) throw ConfigError("system.omega", "omega of axis " + std::to_string(k + 1) + " must be positive");
    }
    if (!(hbar > 0.0)) throw ConfigError("system.hbar", "must be positive");
    cfg.system = OscillatorSystem(mass, omega, hbar);

    // coefficients
    const json& source = require("coefficients.source");
    if (source == "vectors") {
        cfg.source = CoefficientSource::vectors;
    } else if (source == "matrices") {
        cfg.source = CoefficientSource::matrices;
    } else {
        throw ConfigError("coefficients.source", "expected 'vectors' or 'matrices'");
    }
    static const char* const vector_keys[] = {"a1", "a2", "a3", "b1", "b2", "b3"};
    static const char* const matrix_keys[] = {"Dqq", "Dpp", "Dqp", "alpha", "beta", "lambda"};
    const auto& own = cfg.source == CoefficientSource::vectors ? vector_keys : matrix_keys;
    const auto& other = cfg.source == CoefficientSource::vectors ? matrix_keys : vector_keys;
    for (const char* k : other)
        if (find(std::string("coefficients.") + k))
            throw ConfigError(std::string("coefficients.") + k,
                              "not allowed with coefficients.source = " + source.get<std::string>());

    if (cfg.source == CoefficientSource::vectors) {
        for (std::size_t k = 0; k < kAxes; ++k) {
            const std::string ka = std::string("coefficients.") + own[k];
            const std::string kb = std::string("coefficients.") + own[3 + k];
            if (const json* v = find(ka)) cfg.vectors.a[k] = detail::as_cvec6(ka, *v);
            if (const json* v = find(kb)) cfg.vectors.b[k] = detail::as_cvec6(kb, *v);
        }
        cfg.coefficients = build_coefficients(cfg.vectors, hbar);
    } else {
        Mat3* slots[] = {&cfg.coefficients.Dqq,   &cfg.coefficients.Dpp,  &cfg.coefficients.Dqp,
                         &cfg.coefficients.alpha, &cfg.coefficients.beta, &cfg.coefficients.lambda};
        for (std::size_t i = 0; i < 6; ++i) {
            const std::string key = std::string("coefficients.") + own[i];
            if (const json* v = find(key)) *slots[i] = detail::as_mat3(key, *v);
        }
    }
    try {
        cfg.warnings = validate_coefficients(cfg.coefficients, hbar);
    } catch (const InvariantError& e) {
        throw ConfigError("coefficients", e.what());
    }

    // initial state
    if (const json* v = find("initial.mean")) {
        const auto xs = detail::as_real_list("initial.mean", *v);
        if (xs.size() != 6) throw ConfigError("initial.mean", "expected 6 numbers (q1,q2,q3,p1,p2,p3)");
        for (Eigen::Index i = 0; i < 6; ++i) cfg.initial.mean[i] = xs[static_cast<std::size_t>(i)];
    }
    cfg.initial.cov = detail::as_covariance("initial.cov", require("initial.cov"));

    // time grid
    if (const json* v = find("time.t_start"))
        if (detail::as_real("time.t_start", *v) != 0.0) throw ConfigError("time.t_start", "only t_start = 0 is supported");
    cfg.grid.t_end = detail::as_real("time.t_end", require("time.t_end"));
    if (!(cfg.grid.t_end > 0.0)) throw ConfigError("time.t_end", "must be positive");
    const json& steps = require("time.n_steps");
    if (!steps.is_number_integer()) throw ConfigError("time.n_steps", "expected an integer");
    const auto n = steps.get<long long>();
    if (n < 2 || n > 10'000'000) throw ConfigError("time.n_steps", "must be in [2, 1e7]");
    cfg.grid.n_steps = static_cast<int>(n);

    // outputs and oracle
    auto flag = [&](const std::string& key, bool& slot) {
        if (const json* v = find(key)) slot = detail::as_bool(key, *v);
    };
    flag("output.means", cfg.outputs.means);
    flag("output.covariances", cfg.outputs.covariances);
    flag("output.l3", cfg.outputs.l3);
    flag("output.l2", cfg.outputs.l2);
    flag("output.stationary", cfg.outputs.stationary);
    flag("oracle.enabled", cfg.oracle.enabled);
    if (const json* v = find("oracle.dt")) {
        cfg.oracle.dt = detail::as_real("oracle.dt", *v);
        if (!(cfg.oracle.dt > 0.0)) throw ConfigError("oracle.dt", "must be positive");
    }
    return cfg;
}

// Canonical document for a configuration; parse_config(emit_config(c))
// reproduces c.
inline std::string emit_config(const RunConfig& cfg) {
    std::ostringstream os;
    auto real_list = [](auto begin, auto end) {
        std::string s = "[";
        for (auto it = begin; it != end; ++it) s += (it == begin ? "" : ", ") + format_double(*it);
        return s + "]";
    };
    auto vec3 = [&](const Vec3& v) { return real_list(v.data(), v.data() + 3); };
    auto mat3 = [&](const Mat3& m) {
        std::string s = "[";
        for (Eigen::Index r = 0; r < 3; ++r) {
            const Vec3 row = m.row(r).transpose();
            s += (r ? ", " : "") + vec3(row);
        }
        return s + "]";
    };
    auto cvec = [&](const CVec6& v) {
        std::string s = "[";
        for (Eigen::Index j = 0; j < 6; ++j)
            s += (j ? ", [" : "[") + format_double(v[j].real()) + ", " + format_double(v[j].imag()) + "]";
        return s + "]";
    };
    auto boolean = [](bool b) { return b ? "true" : "false"; };

    os << "system.mass = " << vec3(cfg.system.mass()) << "\n";
    os << "system.omega = " << vec3(cfg.system.omega()) << "\n";
    os << "system.hbar = " << format_double(cfg.system.hbar()) << "\n";
    if (cfg.source == CoefficientSource::vectors) {
        os << "coefficients.source = vectors\n";
        for (std::size_t k = 0; k < kAxes; ++k) os << "coefficients.a" << k + 1 << " = " << cvec(cfg.vectors.a[k]) << "\n";
        for (std::size_t k = 0; k < kAxes; ++k) os << "coefficients.b" << k + 1 << " = " << cvec(cfg.vectors.b[k]) << "\n";
    } else {
        const auto& c = cfg.coefficients;
        os << "coefficients.source = matrices\n";
        os << "coefficients.Dqq = " << mat3(c.Dqq) << "\n";
        os << "coefficients.Dpp = " << mat3(c.Dpp) << "\n";
        os << "coefficients.Dqp = " << mat3(c.Dqp) << "\n";
        os << "coefficients.alpha = " << mat3(c.alpha) << "\n";
        os << "coefficients.beta = " << mat3(c.beta) << "\n";
        os << "coefficients.lambda = " << mat3(c.lambda) << "\n";
    }
    os << "initial.mean = " << real_list(cfg.initial.mean.data(), cfg.initial.mean.data() + 6) << "\n";
    os << "initial.cov = [";
    for (Eigen::Index r = 0; r < 6; ++r) {
        std::vector<double> row;
        for (Eigen::Index c = 0; c <= r; ++c) row.push_back(cfg.initial.cov(r, c));
        os << (r ? ", " : "") << real_list(row.begin(), row.end());
    }
    os << "]\n";
    os << "time.t_end = " << format_double(cfg.grid.t_end) << "\n";
    os << "time.n_steps = " << cfg.grid.n_steps << "\n";
    os << "output.means = " << boolean(cfg.outputs.means) << "\n";
    os << "output.covariances = " << boolean(cfg.outputs.covariances) << "\n";
    os << "output.l3 = " << boolean(cfg.outputs.l3) << "\n";
    os << "output.l2 = " << boolean(cfg.outputs.l2) << "\n";
    os << "output.stationary = " << boolean(cfg.outputs.stationary) << "\n";
    os << "oracle.enabled = " << boolean(cfg.oracle.enabled) << "\n";
    os << "oracle.dt = " << format_double(cfg.oracle.dt) << "\n";
    return os.str();
}

} // namespace lindblad3
