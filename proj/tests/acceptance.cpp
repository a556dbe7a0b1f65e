// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion ...]   (default: all)

#include "crsched/randomized.hpp"

#include <chrono>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>

using namespace crsched;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Instance identical_shape(int m, bool pmtn) {
  Instance shape;
  shape.env = MachineEnv::identical(m);
  shape.preemptive = pmtn;
  return shape;
}

std::string q(const Rational& r) { return to_string(r); }

// ---------------------------------------------------------------------------

Outcome srpt_single_machine() {
  auto t0 = Clock::now();
  SchemeConfig cfg;
  cfg.s = 8;
  cfg.oracle_job_cap = 10;
  UniverseSpec spec;
  spec.p_exps = {0};
  spec.Delta = 2;
  spec.X_max = 4;
  auto u = build_universe(identical_shape(1, true), cfg, spec, "1|r_j,pmtn|sum C_j");
  auto rep = evaluate_map(builtin_map("srpt", cfg), u, cfg, OptPolicy::grid, 4);
  const double t = seconds_since(t0);
  std::ostringstream os;
  os << "rho'=" << q(rep.rho) << " over " << u.instance_count().str() << " instances, " << rep.ends.size()
     << " end classes, " << t << " s";
  return {rep.rho == 1 && !rep.truncated && t <= 60, os.str()};
}

Outcome nonpreemptive_search() {
  auto t0 = Clock::now();
  SchemeConfig cfg;
  cfg.s = 3;
  UniverseSpec spec;
  spec.p_exps = {-3, -2};
  spec.relative = true;
  spec.Delta = 1;
  spec.X_max = 1;
  auto u = build_universe(identical_shape(1, false), cfg, spec, "1|r_j|sum w_j C_j toy");
  auto bb = search_best_map(u, cfg, SearchMode::branch_and_bound);
  auto ex = search_best_map(u, cfg, SearchMode::exhaustive);
  const double t = seconds_since(t0);
  const Rational bound = 2 * (1 + cfg.eps.value());
  std::ostringstream os;
  os << "B&B rho'=" << q(bb.report.rho) << ", exhaustive rho'=" << q(ex.report.rho) << ", bound " << q(bound)
     << ", maps " << bb.stats.complete_maps << " vs " << ex.stats.complete_maps << ", " << t << " s";
  return {bb.report.rho <= bound && bb.report.rho == ex.report.rho && t <= 600, os.str()};
}

Outcome cycling() {
  SchemeConfig cfg;
  cfg.s = 2;
  cfg.K = 1;
  const long long sizes[] = {-6, -7, -8};
  std::ostringstream os;
  bool ok = true;
  for (int period = 1; period <= 3; ++period) {
    Universe u;
    u.name = "rotation" + std::to_string(period);
    u.shape = identical_shape(1, true);
    u.shape.eps = cfg.eps;
    u.X_max = 24;
    for (int k = 0; k < period; ++k) u.catalogs.push_back({ReleaseOption{JobTemplate{sizes[k], 0, true}}});
    ActionCache cache(cfg);
    auto map = builtin_map("srpt", cfg);
    auto rs = reachable_classes(u, cfg, &map, cache);
    auto c = detect_cycle(rs);
    const bool holds = c && cycle_holds(rs, *c, u.X_max);
    ok = ok && c && c->period == period && holds;
    os << (period > 1 ? "; " : "") << "universe " << period << ": ";
    if (c)
      os << "period " << c->period << " from level " << c->first << (holds ? ", repeats to the horizon" : ", breaks");
    else
      os << "no cycle";
  }
  return {ok, os.str()};
}

Instance random_rounded_instance(std::mt19937_64& rng, const Epsilon& eps) {
  std::uniform_int_distribution<int> n(1, 12), r(0, 15), p(-2, 2), w(-3, 3);
  Instance inst = identical_shape(2, true);
  inst.eps = eps;
  const int k = n(rng);
  for (int j = 0; j < k; ++j)
    inst.jobs.push_back(Job{"j" + std::to_string(j), eps.power(r(rng)), {eps.power(p(rng))}, eps.power(w(rng))});
  return inst;
}

Outcome offset_identity() {
  std::mt19937_64 rng(81);
  SchemeConfig cfg;
  int checked = 0, violations = 0;
  for (int t = 0; t < 100; ++t) {
    auto inst = random_rounded_instance(rng, cfg.eps);
    for (int M : {2, 3, 5}) {
      cfg.offset_modulus = M;
      auto split = offset_split(inst, cfg);
      Rational sum(0);
      for (const auto& v : split.variants) sum += v.moved_rw;
      ++checked;
      if (sum != release_weight(inst.jobs) || split.average_moved != release_weight(inst.jobs) / M) ++violations;
    }
  }
  return {violations == 0, std::to_string(checked) + " splits, " + std::to_string(violations) + " violations"};
}

Rational random_positive(std::mt19937_64& rng, int lo, int hi, int den) {
  std::uniform_int_distribution<int> d(lo, hi);
  return Rational(d(rng), den);
}

Outcome transform_postconditions() {
  std::mt19937_64 rng(99);
  SchemeConfig cfg;
  const Rational e = cfg.eps.value();
  int speed_violations = 0, ptime_violations = 0;
  for (int t = 0; t < 100; ++t) {
    std::uniform_int_distribution<int> mm(1, 5), n(1, 4);
    const int m = mm(rng);
    std::vector<Rational> speeds;
    for (int i = 0; i < m; ++i) speeds.push_back(random_positive(rng, 1, 400, 8));
    Instance qm;
    qm.eps = cfg.eps;
    qm.env = MachineEnv::related(speeds);
    for (int j = 0, k = n(rng); j < k; ++j)
      qm.jobs.push_back(Job{"q" + std::to_string(j), 1, {random_positive(rng, 1, 40, 4)}, 1});
    auto sb = bound_speeds_related(qm, cfg);
    const auto& sp = sb.instance.env.speeds;
    const Rational lo = *std::min_element(sp.begin(), sp.end()), hi = *std::max_element(sp.begin(), sp.end());
    if (lo != 1 || hi > m / e) ++speed_violations;

    Instance rm;
    rm.eps = cfg.eps;
    rm.env = MachineEnv::unrelated(m);
    std::bernoulli_distribution missing(0.25);
    for (int j = 0, k = n(rng); j < k; ++j) {
      Job job{"u" + std::to_string(j), 1, {}, 1};
      for (int i = 0; i < m; ++i)
        job.proc.push_back(missing(rng) ? std::nullopt : std::optional<Rational>(random_positive(rng, 1, 2000, 4)));
      if (!job.min_finite_proc()) job.proc[0] = Rational(1);
      rm.jobs.push_back(std::move(job));
    }
    auto pb = bound_ptimes_unrelated(rm, cfg);
    for (const auto& job : pb.instance.jobs) {
      Rational fastest = *job.min_finite_proc();
      for (const auto& p : job.proc)
        if (p && *p > m / e * fastest) ++ptime_violations;
    }
  }
  return {speed_violations == 0 && ptime_violations == 0,
          "100 Qm + 100 Rm instances, violations: speeds " + std::to_string(speed_violations) + ", processing times " +
              std::to_string(ptime_violations)};
}

Outcome simplification_sandwich() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  SchemeConfig cfg;
  int violations = 0;
  for (int t = 0; t < 200; ++t) {
    std::uniform_int_distribution<int> n(1, 5), m(1, 2), num(1, 16);
    std::bernoulli_distribution pmtn(0.5);
    Instance inst = identical_shape(m(rng), pmtn(rng));
    inst.eps = cfg.eps;
    for (int j = 0, k = n(rng); j < k; ++j)
      inst.jobs.push_back(
          Job{"j" + std::to_string(j), Rational(num(rng) + 3, 4), {Rational(num(rng), 4)}, Rational(num(rng), 4)});
    auto res = simplify_pipeline(inst, cfg);
    const Rational a = opt_value(inst, cfg, false).value, b = opt_value(res.instance, cfg, false).value;
    if (!(a <= b && b <= res.factor() * a)) ++violations;
  }
  const double secs = seconds_since(t0);
  std::ostringstream os;
  os << "200 instances, " << violations << " violations, " << secs << " s";
  return {violations == 0 && secs <= 600, os.str()};
}

/// Chooses among the feasible actions by a hash of the key, so equal keys
/// get equal actions.
AlgorithmMap hashed_map(std::uint64_t seed) {
  AlgorithmMap map;
  map.name = "hashed" + std::to_string(seed);
  map.rule = [seed](const CanonicalKey& key, const std::vector<ActionPlan>& actions) {
    const std::size_t h = std::hash<std::string>{}(key.text) ^ (seed * 0x9e3779b97f4a7c15ULL);
    return actions[h % actions.size()].atoms;
  };
  return map;
}

Outcome irrelevant_bound() {
  std::mt19937_64 rng(404);
  SchemeConfig cfg;
  cfg.s = 2;
  cfg.K = 6;
  cfg.Delta = 2;
  const Epsilon& eps = cfg.eps;
  const Rational bound = 3 * eps.value();
  int schedules = 0, checks = 0, violations = 0, attempts = 0, with_irrelevant = 0;
  Rational worst(0);
  while (schedules < 100) {
    if (++attempts > 10000) return {false, "could not generate schedules"};
    std::uniform_int_distribution<int> count(1, 2), prel(-7, -6), wexp(0, 3), m(1, 2), last(14, 22);
    std::bernoulli_distribution light(0.15), pmtn(0.5);
    Instance inst = identical_shape(m(rng), pmtn(rng));
    inst.eps = eps;
    const int X = last(rng);
    std::map<long long, std::vector<Job>> by_date;
    for (long long x = 0; x <= X; ++x)
      for (int k = 0, c = count(rng); k < c; ++k) {
        Job j{"x" + std::to_string(x) + "_" + std::to_string(k), eps.power(x), {eps.power(x + prel(rng))},
              eps.power(light(rng) ? -40 : wexp(rng))};
        inst.jobs.push_back(j);
        by_date[x].push_back(std::move(j));
      }
    if (partition_periods(inst, cfg).parts.size() != 1) continue;

    AlgorithmMap map = hashed_map(rng());
    Simulator sim(inst, cfg);
    ActionCache cache(cfg);
    std::vector<std::vector<bool>> irrelevant_at;
    try {
      for (long long x = 0; x <= X || !sim.all_finished(); ++x) {
        sim.begin_interval(x <= X ? by_date[x] : std::vector<Job>{});
        if (x <= X) irrelevant_at.push_back(sim.irrelevant());
        StepView v = sim.view();
        sim.apply(v, map.choose(v.key(), cache.actions(v.key())));
      }
    } catch (const SafetyNetInfeasible&) {
      continue;
    }
    ++schedules;
    auto sched = sim.schedule();
    const auto& jobs = sim.instance().jobs;
    bool any = false;
    for (std::size_t j = 0; j < jobs.size(); ++j)
      if (sched.completions[j]->raw > jobs[j].release * pow(eps.base(), cfg.s)) ++violations;
    for (std::size_t x = 0; x < irrelevant_at.size(); ++x) {
      Rational lhs(0), rel(0);
      const auto& flags = irrelevant_at[x];
      for (std::size_t j = 0; j < flags.size(); ++j) {
        if (flags[j])
          lhs += jobs[j].weight * sched.completions[j]->raw;
        else
          rel += jobs[j].release * jobs[j].weight;
      }
      any = any || lhs > 0;
      ++checks;
      if (lhs > bound * rel) ++violations;
      if (rel > 0 && lhs / rel > worst) worst = lhs / rel;
    }
    with_irrelevant += any;
  }
  std::ostringstream os;
  os << schedules << " schedules (" << with_irrelevant << " with irrelevant jobs), " << checks
     << " dates, worst ratio " << std::setprecision(4) << to_double(worst) << " vs " << q(bound) << ", "
     << violations << " violations";
  return {violations == 0 && with_irrelevant > 0, os.str()};
}

// A release pattern replayed from a start date with a weight shift and a
// permutation of the jobs of each date.
struct PatternJob {
  long long date, p_rel, w_exp;
};

struct Pattern {
  std::vector<PatternJob> jobs;
  int m = 1;
  bool preemptive = true;
  long long steps = 0;  // configuration at start + steps
  std::uint64_t map_seed = 0;
};

std::optional<Configuration> replay(const Pattern& pat, const SchemeConfig& cfg, long long x0, long long y,
                                   std::mt19937_64& shuffle, std::string* key) {
  const Epsilon& eps = cfg.eps;
  Instance inst = identical_shape(pat.m, pat.preemptive);
  inst.eps = eps;
  std::map<long long, std::vector<Job>> by_date;
  int id = 0;
  for (const auto& pj : pat.jobs) {
    const long long x = x0 + pj.date;
    by_date[x].push_back(
        Job{"p" + std::to_string(id++), eps.power(x), {eps.power(x + pj.p_rel)}, eps.power(pj.w_exp + y)});
  }
  for (auto& [x, jobs] : by_date) std::shuffle(jobs.begin(), jobs.end(), shuffle);
  for (auto& [x, jobs] : by_date) inst.jobs.insert(inst.jobs.end(), jobs.begin(), jobs.end());
  Simulator sim(inst, cfg, false);
  sim.set_start(x0);
  ActionCache cache(cfg);
  AlgorithmMap map = hashed_map(pat.map_seed);
  try {
    for (long long x = x0;; ++x) {
      sim.begin_interval(by_date[x]);
      StepView v = sim.view();
      if (x == x0 + pat.steps) {
        *key = v.key().text;
        return v.conf;
      }
      sim.apply(v, map.choose(v.key(), cache.actions(v.key())));
    }
  } catch (const SafetyNetInfeasible&) {
    return std::nullopt;
  }
}

/// Brute-force equivalence: a bijection of relevant jobs and one weight
/// shift under which all scaled quantities, the recent interval schedules,
/// the machine assignment and the safety-net load agree.
bool equivalent(const Configuration& a, const Configuration& b, const SchemeConfig& cfg) {
  if (a.preemptive != b.preemptive || a.objective != b.objective || a.m != b.m) return false;
  if (a.relevant.size() != b.relevant.size()) return false;
  const long long dx = b.x - a.x;
  const Rational scale = dx >= 0 ? cfg.eps.power(dx) : 1 / cfg.eps.power(-dx);
  if (b.net_volume != a.net_volume * scale) return false;
  const std::size_t n = a.relevant.size();
  auto compatible = [&](const ConfJob& u, const ConfJob& v, long long y) {
    if (u.r_exp + dx != v.r_exp || u.p_exp + dx != v.p_exp || u.w_exp + y != v.w_exp) return false;
    if (u.done != v.done || u.total != v.total) return false;
    if (u.completed_x.has_value() != v.completed_x.has_value()) return false;
    if (u.completed_x && *u.completed_x + dx != *v.completed_x) return false;
    if ((u.machine >= 0) != (v.machine >= 0) || u.trace.size() != v.trace.size()) return false;
    for (std::size_t k = 0; k < u.trace.size(); ++k)
      if (u.trace[k] * scale != v.trace[k]) return false;
    return true;
  };
  auto machines_match = [&](const std::vector<std::size_t>& sigma) {
    if (a.preemptive) return true;
    std::multiset<std::tuple<int, long long, bool>> ma, mb;
    for (const auto& ms : a.machines)
      ma.emplace(static_cast<int>(ms.status), ms.job >= 0 ? static_cast<long long>(sigma[ms.job]) : -1, ms.host);
    for (const auto& ms : b.machines) mb.emplace(static_cast<int>(ms.status), ms.job, ms.host);
    return ma == mb;
  };
  if (n == 0) return machines_match({});
  std::vector<std::size_t> sigma(n);
  std::vector<bool> used(n, false);
  std::function<bool(std::size_t, long long)> assign = [&](std::size_t i, long long y) {
    if (i == n) return machines_match(sigma);
    for (std::size_t k = 0; k < n; ++k) {
      if (used[k] || !compatible(a.relevant[i], b.relevant[k], y)) continue;
      used[k] = true;
      sigma[i] = k;
      if (assign(i + 1, y)) return true;
      used[k] = false;
    }
    return false;
  };
  for (std::size_t k = 0; k < n; ++k) {
    const long long y = b.relevant[k].w_exp - a.relevant[0].w_exp;
    std::fill(used.begin(), used.end(), false);
    if (assign(0, y)) return true;
  }
  return false;
}

Outcome key_equivalence() {
  std::mt19937_64 rng(55);
  SchemeConfig cfg;
  cfg.s = 4;
  cfg.K = 1;
  int pairs = 0, agree = 0, equal_pairs = 0, attempts = 0;
  auto random_pattern = [&] {
    std::uniform_int_distribution<int> n(1, 4), date(0, 3), prel(-4, -2), w(0, 2), m(1, 2), steps(0, 5);
    std::bernoulli_distribution pmtn(0.5);
    Pattern p;
    p.m = m(rng);
    p.preemptive = pmtn(rng);
    p.steps = steps(rng);
    p.map_seed = rng() % 3;
    std::map<long long, int> per_date;
    for (int k = 0, c = n(rng); k < c; ++k) {
      long long d = date(rng);
      if (per_date[d]++ >= 2) continue;
      p.jobs.push_back({d, prel(rng), w(rng)});
    }
    return p;
  };
  while (pairs < 1000) {
    if (++attempts > 100000) return {false, "could not generate configuration pairs"};
    Pattern a = random_pattern(), b = a;
    std::uniform_int_distribution<int> kind(0, 2), shift(-3, 6), mutate(0, 3);
    switch (kind(rng)) {
      case 0:  // shifted, scaled, relabeled twin
        break;
      case 1: {  // twin with one change
        auto& j = b.jobs[rng() % b.jobs.size()];
        switch (mutate(rng)) {
          case 0: j.p_rel = j.p_rel == -2 ? -3 : j.p_rel + 1; break;
          case 1: j.w_exp += 1; break;
          case 2: j.date += 1; break;
          default: b.steps += 1; break;
        }
        break;
      }
      default:  // unrelated pattern of the same machine setting
        b = random_pattern();
        b.m = a.m;
        b.preemptive = a.preemptive;
        break;
    }
    std::string ka, kb;
    auto ca = replay(a, cfg, 0, 0, rng, &ka);
    auto cb = replay(b, cfg, shift(rng) + 4, shift(rng), rng, &kb);
    if (!ca || !cb) continue;
    ++pairs;
    const bool oracle = equivalent(*ca, *cb, cfg);
    equal_pairs += oracle;
    agree += oracle == (ka == kb);
  }
  std::ostringstream os;
  os << agree << "/" << pairs << " pairs agree (" << equal_pairs << " equivalent by the oracle)";
  return {agree == pairs && equal_pairs > 0 && equal_pairs < pairs, os.str()};
}

Outcome randomized_discretization() {
  SchemeConfig cfg;
  cfg.s = 4;
  cfg.delta = Rational(1, 8);
  const Rational factor = 1 + cfg.eps.value();
  Universe one;
  one.name = "one instance";
  one.shape = identical_shape(1, false);
  one.shape.eps = cfg.eps;
  one.X_max = 1;
  one.catalogs = {{ReleaseOption{JobTemplate{-2, 0, true}}}, {ReleaseOption{JobTemplate{-3, 0, true}}}};
  Universe four = one;
  four.name = "four instances";
  four.catalogs = {{ReleaseOption{JobTemplate{-3, 0, true}}, ReleaseOption{JobTemplate{-2, 0, true}}},
                   {ReleaseOption{}, ReleaseOption{JobTemplate{-3, 0, true}}}};
  std::mt19937_64 rng(7);
  std::ostringstream os;
  int violations = 0;
  for (const Universe* u : {&one, &four}) {
    ActionCache cache(cfg);
    auto rs = reachable_classes(*u, cfg, nullptr, cache);
    OracleCache oc;
    Rational worst(0);
    std::size_t entries = 0;
    for (int t = 0; t < 50; ++t) {
      auto f = random_map(rs.registry, cache, rng);
      auto g = discretize_map(f, cfg.delta);
      entries = f.table.size();
      const Rational rf = evaluate_randomized_map(f, *u, cfg, OptPolicy::grid, &oc).rho;
      const Rational rg = evaluate_randomized_map(g, *u, cfg, OptPolicy::grid, &oc).rho;
      if (!g.discretized(cfg.delta) || rg > factor * rf) ++violations;
      if (rg / rf > worst) worst = rg / rf;
    }
    os << (u == &one ? "" : "; ") << u->name << " (" << u->instance_count().str() << ", " << entries
       << " random entries): worst rho'(g)/rho'(f) " << std::setprecision(4) << to_double(worst);
  }
  os << "; bound " << q(factor) << ", " << violations << " violations";
  return {violations == 0, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"SRPT is 1-competitive on a preemptive single-machine universe", srpt_single_machine},
      {"best non-preemptive map within 2(1+eps), B&B agrees with exhaustive search", nonpreemptive_search},
      {"simplification loss sandwich on 200 random instances", simplification_sandwich},
      {"irrelevant jobs cost at most 3 eps rw(Rel)", irrelevant_bound},
      {"canonical keys agree with a bijection search", key_equivalence},
      {"cycle detection finds periods 1, 2 and 3", cycling},
      {"discretized randomized maps lose at most 1+eps", randomized_discretization},
      {"offset split moves every period exactly once", offset_identity},
      {"related speeds and unrelated processing times bounded by m/eps", transform_postconditions},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    auto t0 = Clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << "AC" << id << " " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << "  [" << o.detail
              << "] (" << std::fixed << std::setprecision(1) << seconds_since(t0) << " s)" << std::defaultfloat
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
