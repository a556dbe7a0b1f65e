#include "crsched/randomized.hpp"

#include <gtest/gtest.h>

using namespace crsched;

namespace {

std::vector<Rational> q(std::initializer_list<std::pair<int, int>> v) {
  std::vector<Rational> out;
  for (auto [n, d] : v) out.emplace_back(n, d);
  return out;
}

Instance shape_of(bool pmtn) {
  Instance shape;
  shape.env = MachineEnv::identical(1);
  shape.preemptive = pmtn;
  return shape;
}

SchemeConfig toy_cfg() {
  SchemeConfig cfg;
  cfg.s = 4;
  return cfg;
}

Universe toy_universe(const SchemeConfig& cfg, long long X_max, int Delta = 1) {
  UniverseSpec spec;
  spec.p_exps = {-3, -2};
  spec.relative = true;
  spec.Delta = Delta;
  spec.X_max = X_max;
  return build_universe(shape_of(false), cfg, spec, "toy");
}

Instance periods_instance(const SchemeConfig& cfg, const std::vector<Rational>& rw) {
  Instance inst = shape_of(true);
  inst.eps = cfg.eps;
  for (std::size_t k = 0; k < rw.size(); ++k) {
    if (rw[k] == 0) continue;
    Rational r = cfg.eps.power(static_cast<long long>(k) * cfg.s);
    inst.jobs.push_back(Job{"q" + std::to_string(k), r, {Rational(1)}, rw[k] / r});
  }
  return inst;
}

}  // namespace

TEST(Discretize, LargestRemainder) {
  EXPECT_EQ(discretize(q({{3, 5}, {2, 5}}), Rational(1, 4)), q({{1, 2}, {1, 2}}));
  EXPECT_EQ(discretize(q({{1, 4}, {3, 4}}), Rational(1, 4)), q({{1, 4}, {3, 4}}));
  EXPECT_EQ(discretize(q({{1, 1}}), Rational(1, 8)), q({{1, 1}}));
  // equal remainders: the lower index gets the chunk
  EXPECT_EQ(discretize(q({{1, 2}, {1, 2}}), Rational(1, 1)), q({{1, 1}, {0, 1}}));
}

TEST(Discretize, StaysWithinOneQuantum) {
  std::mt19937_64 rng(7);
  const Rational delta(1, 8);
  for (int t = 0; t < 200; ++t) {
    std::uniform_int_distribution<int> n(1, 5), w(0, 30);
    std::vector<int> ws(static_cast<std::size_t>(n(rng)));
    int total = 0;
    for (auto& v : ws) total += v = w(rng);
    if (total == 0) continue;
    std::vector<Rational> p;
    for (auto v : ws) p.emplace_back(v, total);
    auto d = discretize(p, delta);
    Rational sum(0);
    for (std::size_t i = 0; i < p.size(); ++i) {
      sum += d[i];
      EXPECT_EQ(denominator_of(d[i] / delta), 1);
      EXPECT_LT(abs(d[i] - p[i]), delta);
    }
    EXPECT_EQ(sum, 1);
  }
}

TEST(Discretize, RejectsBadInput) {
  EXPECT_THROW(discretize(q({{1, 2}, {1, 3}}), Rational(1, 4)), DomainError);
  EXPECT_THROW(discretize(q({{1, 1}}), Rational(2, 5)), DomainError);
}

TEST(RandomizedMap, DeterministicEmbeddingMatchesEvaluate) {
  auto cfg = toy_cfg();
  auto u = toy_universe(cfg, 1);
  auto smith = builtin_map("smith_list_nonpmtn", cfg);
  auto det = evaluate_map(smith, u, cfg);
  auto ran = evaluate_randomized_map(RandomizedMap::from_deterministic(smith), u, cfg);
  EXPECT_EQ(ran.rho, det.rho);
}

TEST(RandomizedMap, HalfAndHalfAveragesValues) {
  auto cfg = toy_cfg();
  auto u = toy_universe(cfg, 0);
  // the one-job instance of the larger size has a real choice at date 0
  Universe one = u;
  one.catalogs = {{u.catalog(0).back()}};
  ActionCache cache(cfg);
  auto rs = reachable_classes(one, cfg, nullptr, cache);
  const CanonicalKey* choice = nullptr;
  for (const auto& [text, key] : rs.registry)
    if (cache.actions(key).size() > 1 && !choice) choice = &rs.registry.at(text);
  ASSERT_TRUE(choice);
  const auto& actions = cache.actions(*choice);
  auto fixed = [&](std::size_t i) {
    AlgorithmMap m;
    m.name = "fixed";
    m.table[choice->text] = actions[i].atoms;
    m.rule = [](const CanonicalKey&, const std::vector<ActionPlan>& a) { return a.front().atoms; };
    return m;
  };
  RandomizedMap half;
  half.fallback = fixed(0);
  half.table[choice->text] = {{actions[0].atoms, Rational(1, 2)}, {actions[1].atoms, Rational(1, 2)}};
  auto a = evaluate_randomized_map(RandomizedMap::from_deterministic(fixed(0)), one, cfg);
  auto b = evaluate_randomized_map(RandomizedMap::from_deterministic(fixed(1)), one, cfg);
  auto h = evaluate_randomized_map(half, one, cfg);
  ASSERT_EQ(h.ends.size(), 1u);
  EXPECT_EQ(h.ends[0].opt, a.ends[0].opt);
  EXPECT_EQ(h.ends[0].value, (a.ends[0].value + b.ends[0].value) / 2);
}

TEST(RandomizedMap, MissingEntryIsReported) {
  auto cfg = toy_cfg();
  auto u = toy_universe(cfg, 0);
  RandomizedMap empty;
  EXPECT_THROW(evaluate_randomized_map(empty, u, cfg), MapIncomplete);
}

TEST(RandomizedMap, DiscretizedMapsAreOnTheGrid) {
  auto cfg = toy_cfg();
  auto u = toy_universe(cfg, 1);
  ActionCache cache(cfg);
  auto rs = reachable_classes(u, cfg, nullptr, cache);
  std::mt19937_64 rng(3);
  auto f = random_map(rs.registry, cache, rng);
  ASSERT_FALSE(f.table.empty());
  auto g = discretize_map(f, cfg.delta);
  EXPECT_TRUE(g.discretized(cfg.delta));
  auto rf = evaluate_randomized_map(f, u, cfg);
  auto rg = evaluate_randomized_map(g, u, cfg);
  EXPECT_LE(rg.rho, (1 + cfg.eps.value()) * rf.rho);
}

TEST(RandomizedMap, ExhaustiveSearchOnSingleChoice) {
  auto cfg = toy_cfg();
  cfg.delta = Rational(1, 2);
  auto u = toy_universe(cfg, 0);
  Universe one = u;
  one.catalogs = {{u.catalog(0).back()}};
  auto [g, rep] = search_randomized_map(one, cfg);
  EXPECT_TRUE(g.discretized(cfg.delta));
  auto det = search_best_map(one, cfg, SearchMode::exhaustive);
  EXPECT_LE(rep.rho, det.report.rho);
}

TEST(OffsetSplit, ThreePeriods) {
  SchemeConfig cfg;
  cfg.offset_modulus = 3;
  auto inst = periods_instance(cfg, {9, 3, 6});
  auto all = offset_split(inst, cfg);
  ASSERT_EQ(all.variants.size(), 3u);
  EXPECT_EQ(all.variants[0].moved_rw, 9);
  EXPECT_EQ(all.variants[1].moved_rw, 3);
  EXPECT_EQ(all.variants[2].moved_rw, 6);
  EXPECT_EQ(all.average_moved, 6);
  EXPECT_TRUE(all.identity_holds);
  EXPECT_EQ(all.variants[1].net_only_jobs, std::set<std::string>{"q1"});
  auto one = offset_split(inst, cfg, 2);
  ASSERT_EQ(one.variants.size(), 1u);
  EXPECT_EQ(one.variants[0].offset, 2);
  EXPECT_EQ(one.average_moved, 6);
}

TEST(OffsetSplit, SinglePeriod) {
  SchemeConfig cfg;
  for (int M : {2, 4, 7}) {
    cfg.offset_modulus = M;
    auto split = offset_split(periods_instance(cfg, {5}), cfg);
    int moved = 0;
    for (const auto& v : split.variants) moved += v.moved_rw > 0;
    EXPECT_EQ(moved, 1);
    EXPECT_TRUE(split.identity_holds);
  }
}

TEST(OffsetSplit, PartsAreCutAfterMovedPeriods) {
  SchemeConfig cfg;
  cfg.offset_modulus = 2;
  auto split = offset_split(periods_instance(cfg, {1, 1, 1, 1, 1}), cfg, 1);
  std::vector<std::pair<int, int>> parts{{0, 1}, {2, 3}, {4, 4}};
  EXPECT_EQ(split.variants[0].parts, parts);
}

TEST(OffsetSplit, MakespanLastWindowHitsAtMostTwoOffsets) {
  SchemeConfig cfg;
  cfg.s = 3;
  cfg.offset_modulus = 4;
  for (long long last = 0; last < 12; ++last) {
    Instance inst = shape_of(true);
    inst.objective = Objective::makespan();
    inst.eps = cfg.eps;
    for (long long y = 0; y <= last; ++y) inst.jobs.push_back(Job{"m" + std::to_string(y), cfg.eps.power(y), {1}, 1});
    auto split = offset_split(inst, cfg);
    EXPECT_LE(split.last_window_offsets.size(), 2u);
    EXPECT_GE(split.last_window_offsets.size(), 1u);
  }
}

TEST(OffsetSplit, DerivedModulus) {
  SchemeConfig cfg;  // eps = 1/2, s = 2: (9/4) / (1/2) = 4.5
  EXPECT_EQ(offset_modulus(cfg), 5);
}
