#include "crsched/simplify.hpp"

#include <gtest/gtest.h>

using namespace crsched;

TEST(Interval, Boundaries) {
  Epsilon one(Rational(1));
  EXPECT_EQ(interval_of(Rational(1), one), 0);
  EXPECT_EQ(interval_of(Rational(3), one), 1);
  EXPECT_EQ(interval_of(parse_rational("5.0625"), Epsilon()), 4);
  EXPECT_THROW(interval_of(Rational(1, 2), one), DomainError);
}
