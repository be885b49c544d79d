#include <gtest/gtest.h>

#include "mcprioq/errors.hpp"
#include "mcprioq/rational.hpp"

namespace {

using mcprioq::Rational;

TEST(Rational, ParsesFractionsAndDecimals) {
  EXPECT_EQ(Rational::parse("1/2"), Rational(1, 2));
  EXPECT_EQ(Rational::parse("2/4"), Rational(1, 2));
  EXPECT_EQ(Rational::parse("0.5"), Rational(1, 2));
  EXPECT_EQ(Rational::parse(".25"), Rational(1, 4));
  EXPECT_EQ(Rational::parse("1"), Rational(1, 1));
  EXPECT_EQ(Rational::parse("1.0"), Rational(1, 1));
  EXPECT_EQ(Rational::parse("0"), Rational(0, 1));
  EXPECT_EQ(Rational::parse("0.125").to_string(), "1/8");
}

TEST(Rational, RejectsMalformed) {
  for (const char* bad : {"", "/", "1/", "/2", "1/0", "a", "-1", "0.5.5", "1e3", " 1", "."}) {
    EXPECT_THROW(Rational::parse(bad), mcprioq::InputError) << bad;
  }
}

TEST(Rational, DecayFactorRange) {
  EXPECT_TRUE(Rational(1, 2).is_decay_factor());
  EXPECT_TRUE(Rational(1, 1).is_decay_factor());
  EXPECT_FALSE(Rational(0, 1).is_decay_factor());
  EXPECT_FALSE(Rational(3, 2).is_decay_factor());
}

TEST(Rational, ScaleFloor) {
  const Rational half(1, 2);
  EXPECT_EQ(half.scale_floor(5), 2u);
  EXPECT_EQ(half.scale_floor(1), 0u);
  EXPECT_EQ(Rational(2, 3).scale_floor(UINT64_MAX), UINT64_MAX / 3 * 2);
  EXPECT_EQ(Rational(1, 1).scale_floor(UINT64_MAX), UINT64_MAX);
}

}  // namespace
