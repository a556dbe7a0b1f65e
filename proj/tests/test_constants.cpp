#include "crsched/constants.hpp"

#include <gtest/gtest.h>

using namespace crsched;

TEST(Constants, HalfEpsilonOneMachine) {
  auto r = theoretical_constants(Rational(1, 2), 1);
  EXPECT_EQ(r.distinct_large, 7);
  EXPECT_EQ(r.large_per_type, 5);
  EXPECT_EQ(r.max_large_per_type, 35);
  EXPECT_EQ(r.s, 17);
  EXPECT_EQ(r.Gamma, r.K * r.s);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Constants, PeriodCountIsLeast) {
  // q^K/(1-q^K) <= eps holds at K and fails at K-1
  for (long long s : {1, 2, 3}) {
    Rational eps(1, 2);
    long long K = detail::least_period_count(eps, s);
    Rational dp = eps / pow(1 + eps, s);
    Rational q = 1 - dp / (1 + dp);
    auto holds = [&](long long k) { return pow(q, k) / (1 - pow(q, k)) <= eps; };
    EXPECT_TRUE(holds(K));
    if (K > 1) EXPECT_FALSE(holds(K - 1));
  }
  EXPECT_EQ(detail::least_period_count(Rational(1, 2), 2), 6);
}

TEST(Constants, EpsilonOne) {
  auto r = theoretical_constants(Rational(1), 2);
  EXPECT_EQ(r.distinct_large, 0);
  EXPECT_EQ(r.large_per_type, 4);
  EXPECT_EQ(r.M, to_ll(ceil_div(pow(Rational(2), r.s))));
}

TEST(Constants, DeskDominationFactor) {
  SchemeConfig cfg;
  cfg.Delta = 2;
  cfg.K = 2;
  cfg.s = 1;
  // eps / (Delta Gamma (1+eps)^(Gamma+s)) = 0.5 / (2*2*3.375)
  EXPECT_EQ(desk_domination_factor(cfg), Rational(1, 27));
}
