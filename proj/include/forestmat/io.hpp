#pragma once

#include <cstdio>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "forestmat/digraph.hpp"
#include "forestmat/error.hpp"
#include "forestmat/matrix.hpp"
#include "forestmat/rational.hpp"

namespace forestmat {

using json = nlohmann::json;

// ---- weight text forms ----------------------------------------------------

// Canonical text for a weight: round-trips exactly through parse_weight.
inline std::string weight_repr(double w) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", w);
    return buf;
}

inline std::string weight_repr(const rational& w) {
    // prefer an exact decimal; fall back to p/q
    bigint den = denominator(w);
    int twos = 0, fives = 0;
    bigint d = den;
    while (d % 2 == 0) { d /= 2; ++twos; }
    while (d % 5 == 0) { d /= 5; ++fives; }
    if (d == 1) {
        int digits = std::max(twos, fives);
        bigint scaled = numerator(w);
        for (int i = 0; i < digits; ++i) scaled *= 10;
        scaled /= den;
        std::string s = scaled.str();
        bool neg = !s.empty() && s[0] == '-';
        if (neg) s = s.substr(1);
        while (static_cast<int>(s.size()) <= digits) s = "0" + s;
        if (digits > 0) s.insert(s.size() - digits, ".");
        return (neg ? "-" : "") + s;
    }
    return numerator(w).str() + "/" + denominator(w).str();
}

template <typename T>
T parse_weight_text(const std::string& text) {
    if constexpr (scalar_traits<T>::is_exact) {
        auto slash = text.find('/');
        if (slash != std::string::npos) {
            auto num = parse_rational_decimal(text.substr(0, slash));
            auto den = parse_rational_decimal(text.substr(slash + 1));
            if (!num || !den || *den == 0)
                throw error(errc::parse_error, "bad fraction '" + text + "'");
            return *num / *den;
        }
    }
    return parse_weight<T>(text);
}

// ---- digraph files ----------------------------------------------------------
//
//   # comment
//   n <vertex count>
//   <tail> <head> <weight>      (one arc per line)

namespace detail {

inline bool significant_line(const std::string& line, std::string& out) {
    std::size_t i = line.find_first_not_of(" \t\r");
    if (i == std::string::npos || line[i] == '#') return false;
    out = line.substr(i);
    return true;
}

} // namespace detail

template <typename T>
digraph<T> parse_digraph_file(std::istream& in) {
    std::string line, body;
    int lineno = 0;
    int n = -1;
    std::vector<arc<T>> arcs;
    while (std::getline(in, line)) {
        ++lineno;
        if (!detail::significant_line(line, body)) continue;
        std::istringstream ls(body);
        if (n < 0) {
            std::string tag;
            ls >> tag >> n;
            if (ls.fail() || tag != "n" || n <= 1)
                throw error(errc::parse_error, "line " + std::to_string(lineno) +
                                                   ": expected header 'n <count>'");
            continue;
        }
        int tail, head;
        std::string wtext;
        ls >> tail >> head >> wtext;
        std::string extra;
        if (ls.fail() || (ls >> extra))
            throw error(errc::parse_error,
                        "line " + std::to_string(lineno) + ": expected 'tail head weight'");
        T w;
        try {
            w = parse_weight_text<T>(wtext);
        } catch (const error&) {
            throw error(errc::parse_error,
                        "line " + std::to_string(lineno) + ": bad weight '" + wtext + "'");
        }
        arcs.push_back({tail, head, w});
    }
    if (n < 0) throw error(errc::parse_error, "missing 'n <count>' header");
    return digraph<T>(n, std::move(arcs));
}

template <typename T>
digraph<T> parse_digraph_string(const std::string& text) {
    std::istringstream in(text);
    return parse_digraph_file<T>(in);
}

template <typename T>
std::string digraph_to_text(const digraph<T>& g) {
    std::string out = "n " + std::to_string(g.order()) + "\n";
    for (const auto& a : g.arcs())
        out += std::to_string(a.tail) + " " + std::to_string(a.head) + " " +
               weight_repr(a.weight) + "\n";
    return out;
}

// ---- transition-matrix files ------------------------------------------------
//
//   p <state count>
//   <row of probabilities>      (n rows)

template <typename T>
matrix<T> parse_matrix_file(std::istream& in) {
    std::string line, body;
    int lineno = 0, n = -1, row = 0;
    matrix<T> m;
    while (std::getline(in, line)) {
        ++lineno;
        if (!detail::significant_line(line, body)) continue;
        std::istringstream ls(body);
        if (n < 0) {
            std::string tag;
            ls >> tag >> n;
            if (ls.fail() || tag != "p" || n < 1)
                throw error(errc::parse_error, "line " + std::to_string(lineno) +
                                                   ": expected header 'p <count>'");
            m = matrix<T>(n, n);
            continue;
        }
        if (row >= n)
            throw error(errc::parse_error, "line " + std::to_string(lineno) + ": extra row");
        std::string wtext;
        for (int j = 0; j < n; ++j) {
            ls >> wtext;
            if (ls.fail())
                throw error(errc::parse_error, "line " + std::to_string(lineno) +
                                                   ": expected " + std::to_string(n) + " entries");
            m(row, j) = parse_weight_text<T>(wtext);
        }
        ++row;
    }
    if (n < 0) throw error(errc::parse_error, "missing 'p <count>' header");
    if (row != n)
        throw error(errc::parse_error, "expected " + std::to_string(n) + " rows, got " +
                                           std::to_string(row));
    return m;
}

// Peeks at the first significant token: "n" digraph, "p" transition matrix.
inline char detect_input_kind(const std::string& text) {
    std::istringstream in(text);
    std::string line, body;
    while (std::getline(in, line))
        if (detail::significant_line(line, body)) return body.empty() ? '?' : body[0];
    return '?';
}

// ---- report envelopes -------------------------------------------------------

inline std::string fnv1a_hex(const std::string& data) {
    unsigned long long h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", h);
    return buf;
}

template <typename T>
std::string digraph_digest(const digraph<T>& g) {
    return fnv1a_hex(digraph_to_text(g));
}

// 12 significant digits, so envelopes are byte-stable
inline double sig12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return std::strtod(buf, nullptr);
}

template <typename T>
json matrix_to_json(const matrix<T>& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(sig12(to_double(m(i, j))));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json bool_matrix_to_json(const std::vector<std::vector<bool>>& m) {
    json rows = json::array();
    for (const auto& r : m) {
        json row = json::array();
        for (bool b : r) row.push_back(b ? 1 : 0);
        rows.push_back(std::move(row));
    }
    return rows;
}

template <typename T>
json vector_to_json(const std::vector<T>& v) {
    json arr = json::array();
    for (const auto& x : v) arr.push_back(sig12(to_double(x)));
    return arr;
}

template <typename T>
json digraph_to_json(const digraph<T>& g) {
    json arcs = json::array();
    for (const auto& a : g.arcs()) arcs.push_back({a.tail, a.head, weight_repr(a.weight)});
    return json{{"n", g.order()}, {"arcs", std::move(arcs)}};
}

} // namespace forestmat
