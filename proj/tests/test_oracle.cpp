#include "crsched/oracle.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace crsched;

namespace {

Instance make(std::vector<std::tuple<Rational, Rational, Rational>> jobs, bool pmtn, int m = 1,
              Objective obj = Objective::weighted_completion()) {
  Instance inst;
  inst.env = MachineEnv::identical(m);
  inst.preemptive = pmtn;
  inst.objective = obj;
  int k = 0;
  for (auto& [r, p, w] : jobs) inst.jobs.push_back(Job{"j" + std::to_string(++k), r, {p}, w});
  return inst;
}

Instance random_instance(std::mt19937& rng, int n, bool pmtn, int m) {
  std::uniform_int_distribution<int> r(2, 8), p(1, 8), w(1, 3);
  std::vector<std::tuple<Rational, Rational, Rational>> jobs;
  for (int k = 0; k < n; ++k) jobs.emplace_back(Rational(r(rng), 2), Rational(p(rng), 2), Rational(w(rng)));
  return make(jobs, pmtn, m);
}

}  // namespace

TEST(Oracle, NonpreemptiveTwoOrders) {
  SchemeConfig cfg;
  EXPECT_EQ(opt_nonpreemptive_bb(make({{1, 1, 1}, {1, 2, 1}}, false), cfg).value, 6);
}

TEST(Oracle, PreemptiveSrptInstance) {
  SchemeConfig cfg;
  auto inst = make({{1, 4, 1}, {2, 1, 1}}, true);
  auto res = opt_value(inst, cfg, false);
  EXPECT_EQ(res.value, 9);
  EXPECT_EQ(res.witness.completions[0]->raw, 6);
  EXPECT_EQ(res.witness.completions[1]->raw, 3);
}

TEST(Oracle, PreemptiveSrptInstanceOnGrid) {
  // job 2 completes in I_2 (C = 27/8); job 1 has atoms of 2, which first fit
  // into I_4 and I_5 (C = 729/64)
  SchemeConfig cfg;
  auto res = opt_grid(make({{1, 4, 1}, {2, 1, 1}}, true), cfg);
  EXPECT_EQ(res.value, Rational(945, 64));
}

TEST(Oracle, SingleJob) {
  SchemeConfig cfg;
  for (bool pmtn : {true, false}) {
    auto res = opt_value(make({{Rational(3, 2), 2, 3}}, pmtn), cfg, false);
    EXPECT_EQ(res.value, Rational(21, 2));
  }
}

TEST(Oracle, NoContentionOnEnoughMachines) {
  SchemeConfig cfg;
  auto inst = make({{1, 2, 1}, {1, 3, 2}}, true, 2);
  EXPECT_EQ(opt_value(inst, cfg, false).value, 3 + 8);
  // on the grid the completions snap to interval ends
  auto g = opt_grid(inst, cfg);
  EXPECT_EQ(g.value, evaluate_objective(g.witness, inst, true).value());
  EXPECT_GE(g.value, 11);
}

TEST(Oracle, ParallelMakespan) {
  SchemeConfig cfg;
  for (bool pmtn : {true, false})
    EXPECT_EQ(opt_value(make({{1, 2, 1}, {1, 2, 1}}, pmtn, 2, Objective::makespan()), cfg, false).value, 3);
}

TEST(Oracle, SymmetricJobsCommonValue) {
  SchemeConfig cfg;
  auto res = opt_nonpreemptive_bb(make({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}, false), cfg);
  EXPECT_EQ(res.value, 2 + 3 + 4);
}

TEST(Oracle, LowerBounds) {
  EXPECT_EQ(lower_bounds(make({{1, 2, 3}}, true)), 9);
  EXPECT_EQ(lower_bounds(make({}, true)), 0);
}

TEST(Oracle, RefusesOverCap) {
  SchemeConfig cfg;
  cfg.oracle_job_cap = 2;
  EXPECT_THROW(opt_value(make({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}, true), cfg, false), OracleRefusal);
}

TEST(Oracle, RandomOrderingOfTiers) {
  std::mt19937 rng(7);
  SchemeConfig cfg;
  for (int trial = 0; trial < 40; ++trial) {
    int m = 1 + trial % 2;
    int n = 1 + trial % 4;
    auto pm = random_instance(rng, n, true, m);
    auto np = pm;
    np.preemptive = false;
    auto lb = lower_bounds(pm);
    auto rp = opt_value(pm, cfg, false), rn = opt_value(np, cfg, false);
    auto gp = opt_value(pm, cfg, true), gn = opt_value(np, cfg, true);
    EXPECT_LE(lb, rp.value);
    EXPECT_LE(rp.value, gp.value);
    EXPECT_LE(rn.value, gn.value);
    EXPECT_LE(rp.value, rn.value);
    EXPECT_LE(gp.value, gn.value);
    for (auto* r : {&rp, &rn}) {
      const Instance& inst = r == &rp ? pm : np;
      EXPECT_FALSE(check_schedule_feasibility(r->witness, inst).has_value());
      EXPECT_EQ(evaluate_objective(r->witness, inst, false).value(), r->value);
    }
    for (auto* r : {&gp, &gn}) {
      const Instance& inst = r == &gp ? pm : np;
      auto v = check_schedule_feasibility(r->witness, inst);
      EXPECT_FALSE(v.has_value()) << (v ? v->message : "");
      EXPECT_EQ(evaluate_objective(r->witness, inst, true).value(), r->value);
    }
  }
}

TEST(Oracle, CacheTransparency) {
  SchemeConfig cfg;
  OracleCache cache;
  auto inst = make({{1, 4, 1}, {2, 1, 1}}, true);
  auto a = cached_opt(inst, cfg, true, cache);
  auto b = cached_opt(inst, cfg, true, cache);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, opt_grid(inst, cfg).value);
  EXPECT_EQ(cache.size(), 1u);
  std::swap(inst.jobs[0], inst.jobs[1]);
  EXPECT_EQ(oracle_key(inst, cfg, true), cache.size() == 1 ? oracle_key(make({{1, 4, 1}, {2, 1, 1}}, true), cfg, true) : "");
}

TEST(Oracle, CacheFileRoundTrip) {
  OracleCache cache;
  cache.store("k1", Rational(7, 3));
  auto path = testing::TempDir() + "/cache.jsonl";
  cache.save(path);
  {
    std::ofstream out(path, std::ios::app);
    out << "garbage line\n";
  }
  OracleCache loaded;
  loaded.load(path);
  EXPECT_EQ(loaded.size(), 1u);
  EXPECT_EQ(*loaded.find("k1"), Rational(7, 3));
}
