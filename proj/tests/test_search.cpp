#include "crsched/search.hpp"

#include <gtest/gtest.h>

using namespace crsched;

namespace {

Instance shape_of(bool pmtn, int m = 1) {
  Instance shape;
  shape.env = MachineEnv::identical(m);
  shape.preemptive = pmtn;
  return shape;
}

/// One job of relative size R_{x + size[x mod period]} at every date.
Universe rotating(const SchemeConfig& cfg, int period, long long X_max) {
  Universe u;
  u.shape = shape_of(true);
  u.shape.eps = cfg.eps;
  u.X_max = X_max;
  const long long sizes[] = {-6, -7, -8};
  for (int k = 0; k < period; ++k) u.catalogs.push_back({ReleaseOption{JobTemplate{sizes[k], 0, true}}});
  return u;
}

SchemeConfig small_nonpmtn() {
  SchemeConfig cfg;
  cfg.s = 3;
  return cfg;
}

Universe tiny_nonpmtn(const SchemeConfig& cfg, long long X_max) {
  UniverseSpec spec;
  spec.p_exps = {-3, -2};
  spec.relative = true;
  spec.Delta = 1;
  spec.X_max = X_max;
  return build_universe(shape_of(false), cfg, spec, "tiny");
}

}  // namespace

TEST(Universe, CountsOptionsPerDate) {
  SchemeConfig cfg;
  UniverseSpec spec;
  spec.p_exps = {0};
  spec.Delta = 1;
  spec.X_max = 1;
  auto u = build_universe(shape_of(true), cfg, spec);
  ASSERT_EQ(u.catalogs.size(), 2u);
  EXPECT_EQ(u.catalog(0).size(), 2u);
  EXPECT_TRUE(u.catalog(0).front().empty());
  EXPECT_EQ(u.instance_count(), 4);
  EXPECT_EQ(u.catalog(7).size(), 1u);

  spec.Delta = 2;
  EXPECT_EQ(build_universe(shape_of(true), cfg, spec).instance_count(), 9);
}

TEST(Universe, DeltaZeroOnlyStops) {
  SchemeConfig cfg;
  UniverseSpec spec;
  spec.p_exps = {0, 1};
  spec.Delta = 0;
  spec.X_max = 3;
  auto u = build_universe(shape_of(true), cfg, spec);
  EXPECT_EQ(u.instance_count(), 1);
}

TEST(Universe, SizeWindow) {
  SchemeConfig cfg;
  UniverseSpec spec;
  spec.p_exps = {-20, 0, 5};
  spec.Delta = 1;
  spec.X_max = 0;
  auto u = build_universe(shape_of(true), cfg, spec);
  ASSERT_EQ(u.catalog(0).size(), 2u);
  EXPECT_EQ(u.catalog(0)[1].front().p_exp, 0);
}

TEST(Universe, CapRefuses) {
  SchemeConfig cfg;
  cfg.universe_cap = 10;
  UniverseSpec spec;
  spec.p_exps = {0};
  spec.Delta = 2;
  spec.X_max = 3;
  EXPECT_THROW(build_universe(shape_of(true), cfg, spec), SearchRefusal);
}

TEST(Universe, InstantiatesRelativeSizes) {
  SchemeConfig cfg;
  Universe u = rotating(cfg, 1, 3);
  auto jobs = u.instantiate(u.catalog(2).front(), 2, "t");
  ASSERT_EQ(jobs.size(), 1u);
  EXPECT_EQ(jobs[0].release, cfg.eps.power(2));
  EXPECT_EQ(jobs[0].proc.front(), cfg.eps.power(-4));
}

class Cycles : public ::testing::TestWithParam<int> {};

TEST_P(Cycles, PeriodOfRotation) {
  const int period = GetParam();
  SchemeConfig cfg;
  cfg.s = 2;
  cfg.K = 1;
  Universe u = rotating(cfg, period, 20);
  ActionCache cache(cfg);
  auto map = builtin_map("srpt", cfg);
  auto rs = reachable_classes(u, cfg, &map, cache);
  EXPECT_FALSE(rs.truncated);
  auto c = detect_cycle(rs);
  ASSERT_TRUE(c);
  EXPECT_EQ(c->period, period);
  EXPECT_TRUE(cycle_holds(rs, *c, u.X_max));
  EXPECT_FALSE(cycle_holds(rs, *c));
}

INSTANTIATE_TEST_SUITE_P(Search, Cycles, ::testing::Values(1, 2, 3));

TEST(Reachable, UnrestrictedCoversMap) {
  SchemeConfig cfg;
  cfg.s = 8;
  cfg.oracle_job_cap = 10;
  UniverseSpec spec;
  spec.p_exps = {0};
  spec.Delta = 1;
  spec.X_max = 1;
  auto u = build_universe(shape_of(true), cfg, spec);
  ActionCache cache(cfg);
  auto map = builtin_map("srpt", cfg);
  auto one = reachable_classes(u, cfg, &map, cache);
  auto all = reachable_classes(u, cfg, nullptr, cache);
  for (const auto& [k, key] : one.registry) EXPECT_TRUE(all.registry.count(k)) << k;
  EXPECT_GE(all.registry.size(), one.registry.size());
}

TEST(Evaluate, SrptIsOptimalOnOneMachine) {
  SchemeConfig cfg;
  cfg.s = 8;
  cfg.oracle_job_cap = 10;
  UniverseSpec spec;
  spec.p_exps = {0};
  spec.Delta = 2;
  spec.X_max = 1;
  auto u = build_universe(shape_of(true), cfg, spec);
  auto rep = evaluate_map(builtin_map("srpt", cfg), u, cfg, OptPolicy::grid, 2);
  EXPECT_EQ(rep.rho, 1);
  EXPECT_FALSE(rep.ends.empty());
  EXPECT_FALSE(rep.truncated);
  for (const auto& e : rep.ends) EXPECT_GE(e.ratio, 1);

  auto idle = evaluate_map(builtin_map("idle_safety", cfg), u, cfg);
  EXPECT_GE(idle.rho, rep.rho);
}

TEST(Evaluate, NoEndConfigurations) {
  SchemeConfig cfg;
  UniverseSpec spec;
  spec.p_exps = {0};
  spec.Delta = 0;
  spec.X_max = 2;
  auto u = build_universe(shape_of(true), cfg, spec);
  EXPECT_THROW(evaluate_map(builtin_map("srpt", cfg), u, cfg), SearchRefusal);
}

TEST(Evaluate, RelevantInstanceIsShifted) {
  SchemeConfig cfg;
  cfg.s = 8;
  UniverseSpec spec;
  spec.p_exps = {0};
  spec.Delta = 1;
  spec.X_max = 1;
  auto u = build_universe(shape_of(true), cfg, spec);
  ActionCache cache(cfg);
  auto map = builtin_map("srpt", cfg);
  auto rs = reachable_classes(u, cfg, &map, cache);
  ASSERT_FALSE(rs.ends.empty());
  for (const auto& e : rs.ends) {
    auto rel = relevant_instance(rs.registry.at(e.key), u.shape, cfg);
    Rational first = rel.instance.jobs.front().release;
    for (const auto& j : rel.instance.jobs) first = std::min(first, j.release);
    EXPECT_EQ(first, 1);
  }
}

TEST(Search, BranchAndBoundMatchesExhaustive) {
  auto cfg = small_nonpmtn();
  auto u = tiny_nonpmtn(cfg, 0);
  auto bb = search_best_map(u, cfg, SearchMode::branch_and_bound);
  auto ex = search_best_map(u, cfg, SearchMode::exhaustive);
  EXPECT_EQ(bb.report.rho, ex.report.rho);
  EXPECT_LE(bb.stats.complete_maps, ex.stats.complete_maps);
  auto smith = evaluate_map(builtin_map("smith_list_nonpmtn", cfg), u, cfg);
  EXPECT_LE(ex.report.rho, smith.rho);
}

TEST(Search, FoundMapReproducesItsValue) {
  auto cfg = small_nonpmtn();
  auto u = tiny_nonpmtn(cfg, 0);
  auto bb = search_best_map(u, cfg);
  auto again = evaluate_map(bb.map, u, cfg);
  EXPECT_EQ(again.rho, bb.report.rho);
}

TEST(Search, HeuristicIsNoBetterThanExact) {
  auto cfg = small_nonpmtn();
  auto u = tiny_nonpmtn(cfg, 0);
  auto exact = search_best_map(u, cfg);
  auto h = heuristic_search(u, cfg, builtin_map("smith_list_nonpmtn", cfg), 4);
  EXPECT_FALSE(h.report.exact);
  EXPECT_GE(h.report.rho, exact.report.rho);
}

TEST(Search, RefusesHeuristicMode) {
  auto cfg = small_nonpmtn();
  auto u = tiny_nonpmtn(cfg, 0);
  EXPECT_THROW(search_best_map(u, cfg, SearchMode::heuristic), DomainError);
}
