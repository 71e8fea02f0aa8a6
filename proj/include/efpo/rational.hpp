#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace efpo {

/// Exact rational scalar. GMP keeps every value canonical (reduced, positive
/// denominator), so equality and hashing are structural.
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;
using Integer = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                              boost::multiprecision::et_off>;

using RationalVector = std::vector<Rational>;

class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

inline Integer numerator(const Rational& x) { return boost::multiprecision::numerator(x); }
inline Integer denominator(const Rational& x) { return boost::multiprecision::denominator(x); }

inline bool is_zero(const Rational& x) { return x.sign() == 0; }
inline bool is_positive(const Rational& x) { return x.sign() > 0; }
inline bool is_negative(const Rational& x) { return x.sign() < 0; }

/// Canonical wire form: "a" when the denominator is 1, otherwise "a/b".
inline std::string to_string(const Rational& x) {
    if (denominator(x) == 1) return numerator(x).str();
    return numerator(x).str() + "/" + denominator(x).str();
}

namespace detail {

inline bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

// Boost reads a leading zero as an octal prefix.
inline Integer decimal_integer(std::string_view digits, bool negative) {
    while (digits.size() > 1 && digits.front() == '0') digits.remove_prefix(1);
    Integer value(std::string(digits).c_str());
    return negative ? Integer(-value) : value;
}

}  // namespace detail

/// Parses "a" or "a/b" with an optional leading minus on the numerator.
/// Decimal points, exponents, whitespace and zero denominators are rejected.
inline Rational parse_rational(std::string_view text) {
    std::string_view num = text;
    std::string_view den = "1";
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        num = text.substr(0, slash);
        den = text.substr(slash + 1);
    }
    std::string_view digits = num;
    const bool negative = !digits.empty() && digits.front() == '-';
    if (negative) digits.remove_prefix(1);
    if (!detail::all_digits(digits) || !detail::all_digits(den))
        throw ParseError("not an exact rational: \"" + std::string(text) + "\"");
    Integer d = detail::decimal_integer(den, false);
    if (d == 0) throw ParseError("zero denominator: \"" + std::string(text) + "\"");
    return Rational(detail::decimal_integer(digits, negative), d);
}

inline Rational pow(const Rational& base, unsigned exponent) {
    Rational result = 1;
    for (unsigned i = 0; i < exponent; ++i) result *= base;
    return result;
}

inline double to_double(const Rational& x) { return x.convert_to<double>(); }

}  // namespace efpo
