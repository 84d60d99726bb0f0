#pragma once

// Exact parsing of alpha lists such as "4/35,25/35,3/35,2/35,1/35" or
// "0.9,0.1": each entry becomes a reduced fraction so the simplex check is
// exact before anything is rounded to double.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "ratebound/error.hpp"

namespace ratebound {

struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    friend bool operator==(const Rational&, const Rational&) = default;
};

namespace detail {

inline Rational reduce(__int128 num, __int128 den)
{
    if (den < 0) {
        num = -num;
        den = -den;
    }
    __int128 a = num < 0 ? -num : num;
    __int128 b = den;
    while (b != 0) {
        const __int128 t = a % b;
        a = b;
        b = t;
    }
    if (a > 1) {
        num /= a;
        den /= a;
    }
    if (num > INT64_MAX || num < INT64_MIN || den > INT64_MAX) {
        fail(ErrorCode::InvalidInputs, "fraction too large to represent exactly");
    }
    return {static_cast<std::int64_t>(num), static_cast<std::int64_t>(den)};
}

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
        s.remove_suffix(1);
    }
    return s;
}

inline std::int64_t parse_int(std::string_view s, std::string_view whole)
{
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        fail(ErrorCode::InvalidInputs, "not a number: '" + std::string(whole) + "'");
    }
    return v;
}

/// Decimal without exponent, e.g. "-0.125", as an exact fraction.
inline Rational parse_decimal(std::string_view s, std::string_view whole)
{
    const auto dot = s.find('.');
    if (dot == std::string_view::npos) {
        return {parse_int(s, whole), 1};
    }
    std::string digits(s.substr(0, dot));
    const std::string_view frac = s.substr(dot + 1);
    if (frac.size() > 18) {
        fail(ErrorCode::InvalidInputs, "too many decimals in '" + std::string(whole) + "'");
    }
    digits += frac;
    if (digits.empty() || digits == "-" || digits == "+") {
        fail(ErrorCode::InvalidInputs, "not a number: '" + std::string(whole) + "'");
    }
    if (digits.front() == '+') {
        digits.erase(0, 1);
    }
    __int128 den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) {
        den *= 10;
    }
    return reduce(parse_int(digits, whole), den);
}

} // namespace detail

inline Rational parse_rational(std::string_view text)
{
    const std::string_view s = detail::trim(text);
    const auto slash = s.find('/');
    if (slash == std::string_view::npos) {
        return detail::parse_decimal(s, text);
    }
    const Rational num = detail::parse_decimal(detail::trim(s.substr(0, slash)), text);
    const Rational den = detail::parse_decimal(detail::trim(s.substr(slash + 1)), text);
    if (den.num == 0) {
        fail(ErrorCode::InvalidInputs, "zero denominator in '" + std::string(text) + "'");
    }
    return detail::reduce(static_cast<__int128>(num.num) * den.den, static_cast<__int128>(num.den) * den.num);
}

inline Rational operator+(const Rational& a, const Rational& b)
{
    return detail::reduce(static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den,
                          static_cast<__int128>(a.den) * b.den);
}

inline std::vector<Rational> parse_rational_list(std::string_view text)
{
    std::vector<Rational> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto end = comma == std::string_view::npos ? text.size() : comma;
        out.push_back(parse_rational(text.substr(start, end - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

/// Parses an alpha list; returns doubles and whether the exact sum is 1.
inline std::vector<double> parse_alpha(std::string_view text, bool* exact_simplex = nullptr)
{
    const auto parts = parse_rational_list(text);
    Rational sum{0, 1};
    std::vector<double> alpha;
    alpha.reserve(parts.size());
    for (const auto& r : parts) {
        sum = sum + r;
        alpha.push_back(r.value());
    }
    if (exact_simplex != nullptr) {
        *exact_simplex = sum == Rational{1, 1};
    }
    return alpha;
}

} // namespace ratebound
