#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dupin/errors.hpp"

// Key-value run configuration.
//
// The accepted file format, also summarized by the CLI's --help-formats:
//
//   # comment to end of line
//   grid         = 24        # sample points on the chart domain
//   normals      = 18        # normal directions per point (0 = automatic)
//   curves       = 2         # transport curves per point
//   curve-length = 0.5
//   tol          = 1e-6      # verdict tolerance (0 = per-chart default)
//   fd-step      = 1e-5
//   rk-step      = 1e-3
//   richardson   = true      # extrapolated divided differences
//   seed         = 0x9d2f    # decimal or 0x-prefixed hex
//
// One `key = value` pair per line; later lines override earlier ones.  Keys
// are lowercase words with `-` or `_` separators (the two are equivalent).
// Values carry no quoting; everything after `=` up to a comment is trimmed.

namespace dupin {

struct ConfigMap {
    std::vector<std::pair<std::string, std::string>> entries;  // file order
    std::string origin = "<config>";

    const std::string* find(const std::string& key) const {
        const std::string* hit = nullptr;
        for (const auto& [k, v] : entries)
            if (k == key) hit = &v;  // last assignment wins
        return hit;
    }
    bool has(const std::string& key) const { return find(key) != nullptr; }

    std::string get(const std::string& key, const std::string& fallback) const {
        const std::string* v = find(key);
        return v ? *v : fallback;
    }

    double get_double(const std::string& key, double fallback) const {
        const std::string* v = find(key);
        if (!v) return fallback;
        try {
            std::size_t used = 0;
            const double x = std::stod(*v, &used);
            if (used != v->size()) throw std::invalid_argument(*v);
            return x;
        } catch (const std::exception&) {
            throw invalid_input(origin + ": key '" + key + "' is not a number: '" + *v + "'");
        }
    }

    int get_int(const std::string& key, int fallback) const {
        const double x = get_double(key, static_cast<double>(fallback));
        const int i = static_cast<int>(x);
        if (static_cast<double>(i) != x)
            throw invalid_input(origin + ": key '" + key + "' is not an integer");
        return i;
    }

    // Seeds accept decimal or 0x-prefixed hex.
    std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const {
        const std::string* v = find(key);
        if (!v) return fallback;
        try {
            std::size_t used = 0;
            const std::uint64_t s = std::stoull(*v, &used, 0);
            if (used != v->size()) throw std::invalid_argument(*v);
            return s;
        } catch (const std::exception&) {
            throw invalid_input(origin + ": key '" + key + "' is not a seed: '" + *v + "'");
        }
    }

    bool get_bool(const std::string& key, bool fallback) const {
        const std::string* v = find(key);
        if (!v) return fallback;
        if (*v == "true" || *v == "on" || *v == "1") return true;
        if (*v == "false" || *v == "off" || *v == "0") return false;
        throw invalid_input(origin + ": key '" + key + "' is not a boolean: '" + *v + "'");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

// `-` and `_` are interchangeable in keys; both map to `-`.
inline std::string normalize_key(const std::string& s) {
    std::string out = s;
    for (char& c : out) {
        if (c == '_') c = '-';
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

}  // namespace detail

inline ConfigMap parse_config(std::istream& in, const std::string& origin = "<config>") {
    ConfigMap cfg;
    cfg.origin = origin;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw invalid_input(origin + ":" + std::to_string(lineno) +
                                ": expected 'key = value'");
        const std::string key = detail::normalize_key(detail::trim(line.substr(0, eq)));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw invalid_input(origin + ":" + std::to_string(lineno) +
                                ": empty key or value");
        for (char c : key)
            if (!std::islower(static_cast<unsigned char>(c)) &&
                !std::isdigit(static_cast<unsigned char>(c)) && c != '-')
                throw invalid_input(origin + ":" + std::to_string(lineno) + ": bad key '" +
                                    key + "'");
        cfg.entries.emplace_back(key, val);
    }
    return cfg;
}

inline ConfigMap load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_input("load_config: cannot open '" + path + "'");
    return parse_config(in, path);
}

}  // namespace dupin
