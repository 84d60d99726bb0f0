#include <gtest/gtest.h>

#include "ratebound/rational.hpp"

using namespace ratebound;

TEST(Rational, ParsesFractionsAndDecimals)
{
    EXPECT_EQ(parse_rational("4/35"), (Rational{4, 35}));
    EXPECT_EQ(parse_rational(" 10/20 "), (Rational{1, 2}));
    EXPECT_EQ(parse_rational("0.125"), (Rational{1, 8}));
    EXPECT_EQ(parse_rational("-0.5"), (Rational{-1, 2}));
    EXPECT_EQ(parse_rational("3"), (Rational{3, 1}));
    EXPECT_EQ(parse_rational("0.5/2"), (Rational{1, 4}));
    EXPECT_EQ(parse_rational("1/-2"), (Rational{-1, 2}));
}

TEST(Rational, RejectsGarbage)
{
    for (const char* bad : {"", "abc", "1/0", "1..2", "1/", "0.1e3", "-", "."}) {
        EXPECT_THROW(parse_rational(bad), Error) << bad;
    }
}

TEST(Rational, Sum)
{
    EXPECT_EQ(parse_rational("1/3") + parse_rational("1/6"), (Rational{1, 2}));
}

TEST(Rational, AlphaListExactSimplex)
{
    bool exact = false;
    const auto alpha = parse_alpha("4/35,25/35,3/35,2/35,1/35", &exact);
    EXPECT_TRUE(exact);
    ASSERT_EQ(alpha.size(), 5U);
    EXPECT_DOUBLE_EQ(alpha[1], 25.0 / 35);
    parse_alpha("0.1,0.2,0.7", &exact);
    EXPECT_TRUE(exact);
    parse_alpha("0.333,0.333,0.333", &exact);
    EXPECT_FALSE(exact);
    EXPECT_THROW(parse_alpha("0.5,,0.5"), Error);
}
