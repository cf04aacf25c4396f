#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <cstdlib>
#include <optional>
#include <string>

#include "forestmat/error.hpp"

namespace forestmat {

using rational = boost::multiprecision::cpp_rational;
using bigint = boost::multiprecision::cpp_int;

inline double to_double(double x) { return x; }
inline double to_double(const rational& x) { return x.convert_to<double>(); }

// Exact vs floating arithmetic. Tolerances in the numeric modules key off this.
template <typename T>
struct scalar_traits {
    static constexpr bool is_exact = false;
};
template <>
struct scalar_traits<rational> {
    static constexpr bool is_exact = true;
};

// Parses a plain decimal ("2", "-0.95", "1.33e2") into an exact rational.
inline std::optional<rational> parse_rational_decimal(const std::string& text) {
    const char* s = text.c_str();
    const char* p = s;
    bool neg = false;
    if (*p == '+' || *p == '-') neg = (*p++ == '-');
    std::string digits;
    long frac_digits = 0;
    bool any = false;
    while (std::isdigit(static_cast<unsigned char>(*p))) { digits += *p++; any = true; }
    if (*p == '.') {
        ++p;
        while (std::isdigit(static_cast<unsigned char>(*p))) {
            digits += *p++;
            ++frac_digits;
            any = true;
        }
    }
    if (!any) return std::nullopt;
    long exp10 = 0;
    if (*p == 'e' || *p == 'E') {
        ++p;
        char* end = nullptr;
        exp10 = std::strtol(p, &end, 10);
        if (end == p) return std::nullopt;
        p = end;
    }
    if (*p != '\0') return std::nullopt;

    // cpp_int reads a leading 0 as an octal prefix; strip it
    std::size_t first = digits.find_first_not_of('0');
    digits = first == std::string::npos ? "0" : digits.substr(first);
    bigint num(digits);
    if (neg) num = -num;
    long shift = exp10 - frac_digits;
    bigint pow10 = 1;
    for (long i = 0; i < (shift < 0 ? -shift : shift); ++i) pow10 *= 10;
    if (shift >= 0) return rational(num * pow10);
    return rational(num, pow10);
}

template <typename T>
T parse_weight(const std::string& text);

template <>
inline double parse_weight<double>(const std::string& text) {
    char* end = nullptr;
    double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0')
        throw error(errc::parse_error, "bad number '" + text + "'");
    return v;
}

template <>
inline rational parse_weight<rational>(const std::string& text) {
    auto r = parse_rational_decimal(text);
    if (!r) throw error(errc::parse_error, "bad decimal '" + text + "'");
    return *r;
}

} // namespace forestmat
