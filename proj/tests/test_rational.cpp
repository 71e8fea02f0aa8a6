#include "efpo/rational.hpp"

#include <catch_amalgamated.hpp>

using efpo::parse_rational;
using efpo::ParseError;
using efpo::Rational;

TEST_CASE("rationals are stored reduced with a positive denominator") {
    // Two-argument construction needs a positive denominator with this backend.
    const Rational x = Rational(6) / -4;
    CHECK(efpo::numerator(x) == -3);
    CHECK(efpo::denominator(x) == 2);
    CHECK(efpo::to_string(x) == "-3/2");
    CHECK(efpo::to_string(Rational(8, 4)) == "2");
    CHECK(efpo::to_string(Rational(0, 7)) == "0");
}

TEST_CASE("parse_rational accepts integers and fractions") {
    CHECK(parse_rational("7") == 7);
    CHECK(parse_rational("-7") == -7);
    CHECK(parse_rational("2/4") == Rational(1, 2));
    CHECK(parse_rational("-10/4") == Rational(-5, 2));
    CHECK(parse_rational("010") == 10);
    CHECK(parse_rational("007/09") == Rational(7, 9));
    CHECK(parse_rational("-0") == 0);
    CHECK(parse_rational("123456789012345678901234567890/3") ==
          Rational(efpo::Integer("41152263004115226300411522630")));
}

TEST_CASE("parse_rational rejects anything inexact or malformed") {
    for (const char* bad : {"0.5", "1e3", "", "/", "1/", "/2", "+1", "1/-2", " 1", "1 ", "1/0", "0/0", "--1", "1/2/3",
                            "nan", "inf", "0x10"})
        CHECK_THROWS_AS(parse_rational(bad), ParseError);
}

TEST_CASE("to_string and parse_rational round-trip") {
    for (long a = -30; a <= 30; a += 7)
        for (long b = 1; b <= 12; ++b) {
            const Rational x(a, b);
            CHECK(parse_rational(efpo::to_string(x)) == x);
        }
}

TEST_CASE("pow and to_double") {
    CHECK(efpo::pow(Rational(1, 2), 3) == Rational(1, 8));
    CHECK(efpo::pow(Rational(5, 3), 0) == 1);
    CHECK(efpo::to_double(Rational(1, 4)) == 0.25);
}
