#pragma once

// Offline optimum for small instances.
//
// Two schedule spaces:
//  * grid: the interval grid used by algorithm maps. Large jobs are processed
//    in atoms of mu * p_j, small jobs complete inside one interval, and a job
//    finishing in I_x completes at R_{x+1}. Non-preemptive jobs follow the
//    reserved-machine convention.
//  * refined: ordinary schedules with raw completion times.

#include "crsched/config.hpp"
#include "crsched/core.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace crsched {

class OracleRefusal : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct OracleStats {
  std::size_t nodes = 0;
  std::size_t cache_hits = 0;
};

struct OracleResult {
  Rational value;
  Schedule witness;
  OracleStats stats;
  bool grid = false;
  bool exact = true;  // false: best schedule found on a finite refinement
};

namespace detail {

inline Rational exact_cost(const Objective& obj, const Rational& w, const Rational& c) {
  auto v = job_cost(obj, w, c);
  if (!v.exact()) throw OracleRefusal("oracle needs an exactly representable objective (integer alpha)");
  return v.lo;
}

inline Rational combine2(const Objective& obj, const Rational& a, const Rational& b) {
  return obj.kind == ObjectiveKind::makespan ? std::max(a, b) : Rational(a + b);
}

inline void check_caps(const Instance& inst, const SchemeConfig& cfg) {
  if (inst.jobs.size() > cfg.oracle_job_cap)
    throw OracleRefusal("oracle refuses " + std::to_string(inst.jobs.size()) + " jobs (cap " +
                        std::to_string(cfg.oracle_job_cap) + ")");
  if (!inst.objective.exact()) throw OracleRefusal("oracle needs an exactly representable objective (integer alpha)");
}

inline Rational fastest_proc(const Instance& inst, std::size_t j) {
  std::optional<Rational> best;
  for (int i = 0; i < inst.env.m; ++i) {
    auto p = inst.proc_time(j, i);
    if (p && (!best || *p < *best)) best = *p;
  }
  return *best;
}

}  // namespace detail

/// Combined per-job bound with C_j >= r_j + (fastest processing time).
inline Rational lower_bounds(const Instance& inst) {
  if (inst.jobs.empty()) return 0;
  Rational total(0);
  for (std::size_t j = 0; j < inst.jobs.size(); ++j) {
    Rational c = inst.jobs[j].release + detail::fastest_proc(inst, j);
    total = detail::combine2(inst.objective, total, detail::exact_cost(inst.objective, inst.jobs[j].weight, c));
  }
  if (inst.objective.kind == ObjectiveKind::weighted_completion) total = std::max(total, release_weight(inst.jobs));
  return total;
}

// ---------------------------------------------------------------------------
// Grid model shared with the simulator

/// Per-job grid data: first interval it may be processed in, atom size.
struct GridJob {
  long long first_x = 0;
  bool large = false;
  int atoms = 1;   // A for large jobs; small jobs complete in one piece
  Rational atom;   // mu * p for large jobs, p for small jobs
  Rational p;
};

inline GridJob grid_job(const Job& job, const Epsilon& eps, const Rational& mu) {
  GridJob g;
  g.p = job.p();
  g.first_x = ceil_log(job.release, eps.base());
  long long rx = interval_of(job.release, eps);
  g.large = g.p >= pow(eps.value(), 3) * eps.power(rx);
  if (g.large) {
    g.atoms = static_cast<int>(to_ll(denominator_of(mu) / numerator_of(mu)));
    g.atom = mu * g.p;
  } else {
    g.atoms = 1;
    g.atom = g.p;
  }
  return g;
}

/// One machine's plan for an interval in the non-preemptive grid model:
/// finish or continue the dedicated job, complete new jobs, start one carry-out.
struct MachinePlan {
  int dedicated = -1;
  int dedicated_atoms = 0;
  std::vector<int> completes;
  int carry_out = -1;
  int carry_out_atoms = 0;
};

struct GridStep {
  std::vector<int> next;                // atoms done after the interval
  std::vector<int> delta;               // atoms processed in the interval
  std::vector<MachinePlan> plans;       // non-preemptive only
};

namespace detail {

/// Exact amounts of one interval in integer units of a common denominator.
struct UnitScale {
  long long len = 0, cap = 0;
  std::vector<long long> atom, p;

  UnitScale(const std::vector<GridJob>& jobs, const Rational& length, const Rational& capacity) {
    Integer L = denominator_of(length);
    auto widen = [&](const Rational& q) { L = boost::multiprecision::lcm(L, denominator_of(q)); };
    widen(capacity);
    for (const auto& j : jobs) {
      widen(j.atom);
      widen(j.p);
    }
    auto units = [&](const Rational& q) {
      Integer v = numerator_of(q) * (L / denominator_of(q));
      if (boost::multiprecision::abs(v) > (Integer(1) << 60)) throw OracleRefusal("grid amounts exceed 60 bits");
      return v.convert_to<long long>();
    };
    len = units(length);
    cap = units(capacity);
    for (const auto& j : jobs) {
      atom.push_back(units(j.atom));
      p.push_back(units(j.p));
    }
  }
};

/// Enumerates every grid step from `done` in interval x. With `twin`
/// (twin[j] = an earlier job identical to j with the same progress, or -1)
/// steps that only permute identical jobs are skipped.
inline void enumerate_grid_steps(const std::vector<GridJob>& jobs, const std::vector<int>& done, long long x,
                                 const Epsilon& eps, int m, bool preemptive, const Rational& reserved,
                                 const std::function<void(const GridStep&)>& emit,
                                 const std::vector<int>* twin = nullptr) {
  const Rational len_q = eps.interval_length(x);
  const std::size_t n = jobs.size();
  const UnitScale u(jobs, len_q, m * len_q - reserved);
  const long long len = u.len;
  auto available = [&](std::size_t j) { return jobs[j].first_x <= x && done[j] < jobs[j].atoms; };
  auto symmetric_ok = [&](const std::vector<int>& delta) {
    if (!twin) return true;
    for (std::size_t j = 0; j < n; ++j)
      if ((*twin)[j] >= 0 && delta[j] > delta[(*twin)[j]]) return false;
    return true;
  };

  if (preemptive) {
    GridStep step;
    step.delta.assign(n, 0);
    const long long cap = u.cap;
    // Extra atoms never hurt in the preemptive grid model, so with `twin`
    // only maximal steps are emitted.
    auto maximal = [&](long long used) {
      for (std::size_t k = 0; k < n; ++k) {
        if (!available(k) || done[k] + step.delta[k] == jobs[k].atoms) continue;
        if (jobs[k].large) {
          if ((step.delta[k] + 1) * u.atom[k] <= len && used + u.atom[k] <= cap) return false;
        } else if (step.delta[k] == 0 && u.p[k] <= len && used + u.p[k] <= cap) {
          return false;
        }
      }
      return true;
    };
    std::function<void(std::size_t, long long)> rec = [&](std::size_t j, long long used) {
      if (j == n) {
        if (twin && !maximal(used)) return;
        step.next = done;
        for (std::size_t k = 0; k < n; ++k) step.next[k] += step.delta[k];
        emit(step);
        return;
      }
      rec(j + 1, used);
      if (!available(j)) return;
      const int limit = twin && (*twin)[j] >= 0 ? step.delta[(*twin)[j]] : jobs[j].atoms;
      if (jobs[j].large) {
        for (int k = 1; k <= std::min(limit, jobs[j].atoms - done[j]); ++k) {
          long long amt = k * u.atom[j];
          if (amt > len || used + amt > cap) break;
          step.delta[j] = k;
          rec(j + 1, used + amt);
        }
        step.delta[j] = 0;
      } else if (limit >= 1 && u.p[j] <= len && used + u.p[j] <= cap) {
        step.delta[j] = 1;
        rec(j + 1, used + u.p[j]);
        step.delta[j] = 0;
      }
    };
    rec(0, 0);
    return;
  }

  // Non-preemptive: one machine slot per started job, the rest free.
  std::vector<int> dedicated;
  for (std::size_t j = 0; j < n; ++j)
    if (done[j] > 0 && done[j] < jobs[j].atoms) dedicated.push_back(static_cast<int>(j));
  const int free_count = m - static_cast<int>(dedicated.size());
  if (free_count < 0) return;
  std::vector<char> taken(n, 0);
  GridStep step;
  step.delta.assign(n, 0);

  // Free machine with capacity `cap`: subsets of unstarted jobs completed,
  // optionally followed by one carry-out.
  auto fill_free = [&](MachinePlan& plan, long long cap, const std::function<void()>& then) {
    std::vector<int> cand;
    for (std::size_t j = 0; j < n; ++j)
      if (!taken[j] && available(j) && done[j] == 0) cand.push_back(static_cast<int>(j));
    std::function<void(std::size_t, long long)> pick = [&](std::size_t k, long long left) {
      if (k == cand.size()) {
        then();
        for (int j : cand) {
          if (taken[j] || !jobs[j].large) continue;
          for (int a = 1; a < jobs[j].atoms; ++a) {
            if (a * u.atom[j] > left) break;
            taken[j] = 1;
            plan.carry_out = j;
            plan.carry_out_atoms = a;
            step.delta[j] = a;
            then();
            step.delta[j] = 0;
            plan.carry_out = -1;
            plan.carry_out_atoms = 0;
            taken[j] = 0;
          }
        }
        return;
      }
      pick(k + 1, left);
      int j = cand[k];
      if (!taken[j] && u.p[j] <= left) {
        taken[j] = 1;
        plan.completes.push_back(j);
        step.delta[j] = jobs[j].atoms;
        pick(k + 1, left - u.p[j]);
        step.delta[j] = 0;
        plan.completes.pop_back();
        taken[j] = 0;
      }
    };
    pick(0, cap);
  };

  step.plans.assign(dedicated.size() + free_count, MachinePlan{});
  std::function<void(std::size_t)> slot = [&](std::size_t s) {
    if (s == step.plans.size()) {
      if (!symmetric_ok(step.delta)) return;
      step.next = done;
      for (std::size_t k = 0; k < n; ++k) step.next[k] += step.delta[k];
      emit(step);
      return;
    }
    MachinePlan& plan = step.plans[s];
    plan = MachinePlan{};
    if (s < dedicated.size()) {
      int d = dedicated[s];
      plan.dedicated = d;
      int rem = jobs[d].atoms - done[d];
      taken[d] = 1;
      for (int k = 0; k <= rem; ++k) {
        long long amt = k * u.atom[d];
        if (amt > len) break;
        plan.dedicated_atoms = k;
        step.delta[d] = k;
        if (k == rem)
          fill_free(plan, len - amt, [&] { slot(s + 1); });
        else
          slot(s + 1);
      }
      step.delta[d] = 0;
      taken[d] = 0;
      plan = MachinePlan{};
      plan.dedicated = d;
    } else {
      fill_free(plan, len, [&] { slot(s + 1); });
    }
  };
  slot(0);
}

/// Positions one interval's work as segments. Preemptive steps use
/// McNaughton's wrap-around rule, jobs finishing in the interval first.
inline void realize_interval(Schedule& sched, const std::vector<GridJob>& jobs, const GridStep& step,
                             const std::vector<int>& done, long long x, const Epsilon& eps, int m,
                             std::vector<int>& machine_of) {
  const Rational start = eps.power(x), end = eps.power(x + 1), len = eps.interval_length(x);
  IntervalRecord rec;
  rec.x = x;
  if (step.plans.empty()) {
    std::vector<std::size_t> order;
    for (std::size_t j = 0; j < jobs.size(); ++j)
      if (step.delta[j] > 0) order.push_back(j);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      bool fa = step.next[a] == jobs[a].atoms, fb = step.next[b] == jobs[b].atoms;
      if (fa != fb) return fa;
      return step.delta[a] * jobs[a].atom < step.delta[b] * jobs[b].atom;
    });
    int machine = 0;
    Rational t = start;
    for (auto j : order) {
      Rational amt = step.delta[j] * jobs[j].atom;
      rec.entries.push_back({machine, j, step.delta[j], amt});
      while (amt > 0) {
        Rational piece = std::min(amt, Rational(end - t));
        sched.segments.push_back({machine, j, t, t + piece});
        amt -= piece;
        t += piece;
        if (t == end) {
          ++machine;
          t = start;
        }
      }
      if (machine > m || (machine == m && t != start)) throw std::logic_error("McNaughton overflow");
    }
  } else {
    std::vector<char> busy(m, 0);
    for (const auto& plan : step.plans)
      if (plan.dedicated >= 0) busy[machine_of[plan.dedicated]] = 1;
    int next_free = 0;
    for (const auto& plan : step.plans) {
      int machine;
      if (plan.dedicated >= 0) {
        machine = machine_of[plan.dedicated];
      } else {
        while (busy[next_free]) ++next_free;
        machine = next_free++;
      }
      Rational t = start;
      if (plan.dedicated >= 0 && plan.dedicated_atoms > 0) {
        Rational amt = plan.dedicated_atoms * jobs[plan.dedicated].atom;
        sched.segments.push_back({machine, static_cast<std::size_t>(plan.dedicated), t, t + amt});
        rec.entries.push_back({machine, static_cast<std::size_t>(plan.dedicated), plan.dedicated_atoms, amt});
        t += amt;
      }
      std::vector<int> comp = plan.completes;
      std::sort(comp.begin(), comp.end(), [&](int a, int b) { return jobs[a].p < jobs[b].p; });
      for (int j : comp) {
        sched.segments.push_back({machine, static_cast<std::size_t>(j), t, t + jobs[j].p});
        rec.entries.push_back({machine, static_cast<std::size_t>(j), jobs[j].atoms, jobs[j].p});
        t += jobs[j].p;
      }
      if (plan.carry_out >= 0) {
        Rational amt = plan.carry_out_atoms * jobs[plan.carry_out].atom;
        sched.segments.push_back({machine, static_cast<std::size_t>(plan.carry_out), end - amt, end});
        rec.entries.push_back({machine, static_cast<std::size_t>(plan.carry_out), plan.carry_out_atoms, amt});
        machine_of[plan.carry_out] = machine;
      }
      (void)len;
    }
  }
  (void)done;
  sched.intervals.push_back(std::move(rec));
}

}  // namespace detail

/// Optimum over the interval grid. Identical machines only.
inline OracleResult opt_grid(const Instance& inst, const SchemeConfig& cfg) {
  detail::check_caps(inst, cfg);
  if (inst.env.kind != MachineKind::identical) throw OracleRefusal("grid oracle supports identical machines only");
  OracleResult res;
  res.grid = true;
  const std::size_t n = inst.jobs.size();
  if (n == 0) return res;
  const Epsilon& eps = inst.eps;
  const int m = inst.env.m;
  std::vector<GridJob> jobs;
  for (const auto& j : inst.jobs) jobs.push_back(grid_job(j, eps, cfg.mu));

  long long last = 0;
  Rational total(0);
  for (const auto& g : jobs) {
    last = std::max(last, g.first_x);
    total += g.p;
  }
  long long horizon = last;
  while (eps.interval_length(horizon) < total) ++horizon;

  // identical jobs are interchangeable: memo keys sort their progress
  std::vector<int> group(n);
  for (std::size_t j = 0; j < n; ++j) {
    group[j] = static_cast<int>(j);
    for (std::size_t k = 0; k < j; ++k)
      if (inst.jobs[k].release == inst.jobs[j].release && inst.jobs[k].p() == inst.jobs[j].p() &&
          inst.jobs[k].weight == inst.jobs[j].weight) {
        group[j] = group[k];
        break;
      }
  }
  auto key_of = [&](long long x, const std::vector<int>& done) {
    std::vector<std::pair<int, int>> v;
    for (std::size_t j = 0; j < n; ++j) v.emplace_back(group[j], done[j]);
    std::sort(v.begin(), v.end());
    std::string key = std::to_string(x) + ":";
    for (auto& [g, d] : v) key += std::to_string(g) + "," + std::to_string(d) + ";";
    return key;
  };

  std::unordered_map<std::string, std::optional<Rational>> memo;
  const Objective& obj = inst.objective;
  auto step_cost = [&](const GridStep& st, const std::vector<int>& done, long long x) {
    Rational c(0);
    for (std::size_t j = 0; j < n; ++j)
      if (st.next[j] == jobs[j].atoms && done[j] < jobs[j].atoms)
        c = detail::combine2(obj, c, detail::exact_cost(obj, inst.jobs[j].weight, eps.power(x + 1)));
    return c;
  };

  std::function<std::optional<Rational>(long long, const std::vector<int>&)> value =
      [&](long long x, const std::vector<int>& done) -> std::optional<Rational> {
    bool all = true;
    for (std::size_t j = 0; j < n; ++j) all = all && done[j] == jobs[j].atoms;
    if (all) return Rational(0);
    if (x > horizon) return std::nullopt;
    const std::string key = key_of(x, done);
    if (auto it = memo.find(key); it != memo.end()) {
      ++res.stats.cache_hits;
      return it->second;
    }
    if (++res.stats.nodes > cfg.oracle_state_cap)
      throw OracleRefusal("grid oracle state cap " + std::to_string(cfg.oracle_state_cap) + " exceeded");
    std::vector<GridStep> steps;
    std::vector<int> twin(n, -1);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = j; k-- > 0;)
        if (group[k] == group[j] && done[k] == done[j]) {
          twin[j] = static_cast<int>(k);
          break;
        }
    std::set<std::string> successors;
    detail::enumerate_grid_steps(
        jobs, done, x, eps, m, inst.preemptive, 0,
        [&](const GridStep& s) {
          if (successors.insert(key_of(x + 1, s.next)).second) steps.push_back(s);
        },
        &twin);
    std::optional<Rational> best;
    for (const auto& st : steps) {
      auto rest = value(x + 1, st.next);
      if (!rest) continue;
      Rational v = detail::combine2(obj, step_cost(st, done, x), *rest);
      if (!best || v < *best) best = v;
    }
    memo[key] = best;
    return best;
  };

  std::vector<int> done(n, 0);
  long long x0 = jobs[0].first_x;
  for (const auto& g : jobs) x0 = std::min(x0, g.first_x);
  auto best = value(x0, done);
  if (!best) throw std::logic_error("grid oracle found no schedule within its horizon");
  res.value = *best;

  // witness: follow an optimal step in every interval
  std::vector<int> machine_of(n, -1);
  Rational remaining = *best;
  for (long long x = x0; x <= horizon; ++x) {
    bool all = true;
    for (std::size_t j = 0; j < n; ++j) all = all && done[j] == jobs[j].atoms;
    if (all) break;
    std::optional<GridStep> chosen;
    std::vector<GridStep> steps;
    detail::enumerate_grid_steps(jobs, done, x, eps, m, inst.preemptive, 0,
                                 [&](const GridStep& s) { steps.push_back(s); });
    for (const auto& st : steps) {
      auto rest = value(x + 1, st.next);
      if (!rest) continue;
      Rational now = step_cost(st, done, x);
      if (detail::combine2(obj, now, *rest) == remaining) {
        chosen = st;
        if (obj.kind != ObjectiveKind::makespan) remaining -= now;
        break;
      }
    }
    if (!chosen) throw std::logic_error("grid oracle witness reconstruction failed");
    detail::realize_interval(res.witness, jobs, *chosen, done, x, eps, m, machine_of);
    done = chosen->next;
  }
  finalize_completions(res.witness, inst);
  for (std::size_t j = 0; j < n; ++j)
    if (res.witness.completions[j]) {
      // grid completions are charged at the interval end
      res.witness.completions[j]->snapped = eps.power(res.witness.completions[j]->interval + 1);
    }
  return res;
}

// ---------------------------------------------------------------------------
// Refined optimum

/// Single machine with preemption: for a fixed completion order the
/// priority-list schedule finishes every job no later than any schedule with
/// that order, so the minimum over all orders is exact.
inline OracleResult opt_single_machine_preemptive(const Instance& inst, const SchemeConfig& cfg) {
  detail::check_caps(inst, cfg);
  if (inst.env.m != 1) throw DomainError("single-machine solver needs m = 1");
  OracleResult res;
  const std::size_t n = inst.jobs.size();
  if (n == 0) return res;
  std::vector<Rational> p(n);
  for (std::size_t j = 0; j < n; ++j) p[j] = *inst.proc_time(j, 0);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::optional<Rational> best;
  std::vector<Segment> best_segments;
  do {
    ++res.stats.nodes;
    std::vector<Rational> rem = p;
    std::vector<Segment> segs;
    Rational t(0), cost(0);
    std::size_t left = n;
    bool pruned = false;
    while (left > 0) {
      std::optional<std::size_t> run;
      for (auto j : perm)
        if (rem[j] > 0 && inst.jobs[j].release <= t) {
          run = j;
          break;
        }
      if (!run) {
        std::optional<Rational> next;
        for (std::size_t j = 0; j < n; ++j)
          if (rem[j] > 0 && (!next || inst.jobs[j].release < *next)) next = inst.jobs[j].release;
        t = *next;
        continue;
      }
      Rational until = t + rem[*run];
      for (auto j : perm) {
        if (j == *run) break;
        if (rem[j] > 0 && inst.jobs[j].release > t && inst.jobs[j].release < until) until = inst.jobs[j].release;
      }
      segs.push_back({0, *run, t, until});
      rem[*run] -= until - t;
      t = until;
      if (rem[*run] == 0) {
        --left;
        cost = detail::combine2(inst.objective, cost, detail::exact_cost(inst.objective, inst.jobs[*run].weight, t));
        if (best && cost >= *best) {
          pruned = true;
          break;
        }
      }
    }
    if (!pruned && (!best || cost < *best)) {
      best = cost;
      best_segments = std::move(segs);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  res.value = *best;
  res.witness.segments = std::move(best_segments);
  finalize_completions(res.witness, inst);
  return res;
}

/// Non-preemptive branch and bound: jobs are appended in order of start
/// time, each starting as early as its machine and release date allow.
inline OracleResult opt_nonpreemptive_bb(const Instance& inst, const SchemeConfig& cfg) {
  detail::check_caps(inst, cfg);
  OracleResult res;
  const std::size_t n = inst.jobs.size();
  if (n == 0) return res;
  const int m = inst.env.m;
  const Objective& obj = inst.objective;
  std::vector<Rational> pmin(n);
  for (std::size_t j = 0; j < n; ++j) pmin[j] = detail::fastest_proc(inst, j);

  std::vector<Rational> free_at(m, Rational(0));
  std::vector<char> placed(n, 0);
  std::vector<Segment> segs, best_segs;
  std::optional<Rational> best;

  std::function<void(std::size_t, const Rational&, const Rational&)> dfs = [&](std::size_t count, const Rational& last,
                                                                              const Rational& cost) {
    if (++res.stats.nodes > cfg.oracle_state_cap)
      throw OracleRefusal("non-preemptive oracle node cap " + std::to_string(cfg.oracle_state_cap) + " exceeded");
    if (count == n) {
      if (!best || cost < *best) {
        best = cost;
        best_segs = segs;
      }
      return;
    }
    Rational bound = cost;
    for (std::size_t j = 0; j < n; ++j)
      if (!placed[j])
        bound = detail::combine2(obj, bound,
                                 detail::exact_cost(obj, inst.jobs[j].weight, std::max(inst.jobs[j].release, last) + pmin[j]));
    if (best && bound >= *best) return;
    for (std::size_t j = 0; j < n; ++j) {
      if (placed[j]) continue;
      for (int i = 0; i < m; ++i) {
        auto pt = inst.proc_time(j, i);
        if (!pt) continue;
        bool twin = false;  // identical machines with equal load are interchangeable
        if (inst.env.kind == MachineKind::identical)
          for (int k = 0; k < i; ++k) twin = twin || free_at[k] == free_at[i];
        if (twin) continue;
        Rational start = std::max(free_at[i], inst.jobs[j].release);
        if (start < last) continue;
        Rational end = start + *pt;
        Rational saved = free_at[i];
        free_at[i] = end;
        placed[j] = 1;
        segs.push_back({i, j, start, end});
        dfs(count + 1, start, detail::combine2(obj, cost, detail::exact_cost(obj, inst.jobs[j].weight, end)));
        segs.pop_back();
        placed[j] = 0;
        free_at[i] = saved;
      }
    }
  };
  dfs(0, Rational(0), Rational(0));
  res.value = *best;
  res.witness.segments = std::move(best_segs);
  finalize_completions(res.witness, inst);
  return res;
}

/// Preemptive identical machines, m >= 2: search over schedules whose
/// preemptions fall on |I_x|/G slot boundaries. The result is an upper bound
/// on the unrestricted optimum and is flagged inexact.
inline OracleResult opt_slot_preemptive(const Instance& inst, const SchemeConfig& cfg) {
  detail::check_caps(inst, cfg);
  if (inst.env.kind != MachineKind::identical) throw OracleRefusal("slot oracle supports identical machines only");
  OracleResult res;
  res.exact = false;
  const std::size_t n = inst.jobs.size();
  if (n == 0) return res;
  const Epsilon& eps = inst.eps;
  const int m = inst.env.m;
  const Objective& obj = inst.objective;

  struct Slot {
    Rational start, end;
  };
  auto slot_at = [&](long long idx) {
    long long x = idx / cfg.G, k = idx % cfg.G;
    Rational w = eps.interval_length(x) / cfg.G;
    return Slot{eps.power(x) + k * w, eps.power(x) + (k + 1) * w};
  };
  long long first = cfg.G * interval_of(std::min_element(inst.jobs.begin(), inst.jobs.end(), [](const Job& a, const Job& b) {
                                          return a.release < b.release;
                                        })->release, eps);

  std::map<std::pair<long long, std::vector<Rational>>, Rational> memo;
  std::function<Rational(long long, const std::vector<Rational>&)> value = [&](long long idx,
                                                                              const std::vector<Rational>& rem) -> Rational {
    std::vector<std::size_t> avail;
    bool any = false;
    Slot sl = slot_at(idx);
    for (std::size_t j = 0; j < n; ++j) {
      if (rem[j] == 0) continue;
      any = true;
      if (inst.jobs[j].release <= sl.start) avail.push_back(j);
    }
    if (!any) return 0;
    auto key = std::make_pair(idx, rem);
    if (auto it = memo.find(key); it != memo.end()) {
      ++res.stats.cache_hits;
      return it->second;
    }
    if (++res.stats.nodes > cfg.oracle_state_cap)
      throw OracleRefusal("slot oracle state cap " + std::to_string(cfg.oracle_state_cap) + " exceeded");
    std::optional<Rational> best;
    const std::size_t take = std::min<std::size_t>(m, avail.size());
    std::vector<char> pick(avail.size(), 0);
    std::fill(pick.begin(), pick.begin() + take, 1);
    const Rational len = sl.end - sl.start;
    do {
      std::vector<Rational> next = rem;
      Rational cost(0);
      for (std::size_t k = 0; k < avail.size(); ++k) {
        if (!pick[k]) continue;
        std::size_t j = avail[k];
        if (next[j] <= len) {
          cost = detail::combine2(obj, cost, detail::exact_cost(obj, inst.jobs[j].weight, sl.start + next[j]));
          next[j] = 0;
        } else {
          next[j] -= len;
        }
      }
      Rational v = detail::combine2(obj, cost, value(idx + 1, next));
      if (!best || v < *best) best = v;
    } while (std::prev_permutation(pick.begin(), pick.end()));
    memo[key] = *best;
    return *best;
  };

  std::vector<Rational> rem(n);
  for (std::size_t j = 0; j < n; ++j) rem[j] = inst.jobs[j].p();
  res.value = value(first, rem);

  // witness by replay
  long long idx = first;
  while (true) {
    Slot sl = slot_at(idx);
    std::vector<std::size_t> avail;
    bool any = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (rem[j] == 0) continue;
      any = true;
      if (inst.jobs[j].release <= sl.start) avail.push_back(j);
    }
    if (!any) break;
    Rational target = value(idx, rem);
    const std::size_t take = std::min<std::size_t>(m, avail.size());
    std::vector<char> pick(avail.size(), 0);
    std::fill(pick.begin(), pick.begin() + take, 1);
    const Rational len = sl.end - sl.start;
    bool found = false;
    do {
      std::vector<Rational> next = rem;
      Rational cost(0);
      std::vector<Segment> segs;
      int machine = 0;
      for (std::size_t k = 0; k < avail.size(); ++k) {
        if (!pick[k]) continue;
        std::size_t j = avail[k];
        Rational amt = std::min(next[j], len);
        segs.push_back({machine++, j, sl.start, sl.start + amt});
        if (next[j] <= len)
          cost = detail::combine2(obj, cost, detail::exact_cost(obj, inst.jobs[j].weight, sl.start + next[j]));
        next[j] -= amt;
      }
      if (detail::combine2(obj, cost, value(idx + 1, next)) == target) {
        for (auto& s : segs) res.witness.segments.push_back(s);
        rem = next;
        found = true;
        break;
      }
    } while (std::prev_permutation(pick.begin(), pick.end()));
    if (!found) throw std::logic_error("slot oracle witness reconstruction failed");
    ++idx;
  }
  finalize_completions(res.witness, inst);

  // grid and non-preemptive optima are refined schedules too; keep the best
  auto adopt = [&](Schedule w) {
    Rational raw = evaluate_objective(w, inst, false).value();
    if (raw < res.value) {
      res.value = raw;
      res.witness = std::move(w);
      res.witness.intervals.clear();
    }
  };
  try {
    adopt(opt_grid(inst, cfg).witness);
  } catch (const OracleRefusal&) {
  }
  Instance np = inst;
  np.preemptive = false;
  adopt(opt_nonpreemptive_bb(np, cfg).witness);
  return res;
}

inline OracleResult opt_refined(const Instance& inst, const SchemeConfig& cfg) {
  if (!inst.preemptive) return opt_nonpreemptive_bb(inst, cfg);
  if (inst.env.m == 1) return opt_single_machine_preemptive(inst, cfg);
  return opt_slot_preemptive(inst, cfg);
}

inline OracleResult opt_value(const Instance& inst, const SchemeConfig& cfg, bool grid) {
  return grid ? opt_grid(inst, cfg) : opt_refined(inst, cfg);
}

// ---------------------------------------------------------------------------
// Cache

/// Canonical text of an instance as the oracle sees it (job order and ids
/// do not matter).
inline std::string oracle_key(const Instance& inst, const SchemeConfig& cfg, bool grid) {
  std::vector<std::string> jobs;
  for (const auto& j : inst.jobs) {
    std::string t = "(" + to_string(j.release) + ",";
    for (const auto& p : j.proc) t += (p ? to_string(*p) : std::string("inf")) + "|";
    t += "," + to_string(j.weight) + ")";
    jobs.push_back(std::move(t));
  }
  std::sort(jobs.begin(), jobs.end());
  std::ostringstream os;
  os << "eps=" << to_string(inst.eps.value()) << ";m=" << inst.env.m << ";kind=" << static_cast<int>(inst.env.kind);
  for (const auto& s : inst.env.speeds) os << "," << to_string(s);
  os << ";pmtn=" << inst.preemptive << ";obj=" << static_cast<int>(inst.objective.kind) << ","
     << to_string(inst.objective.k) << "," << to_string(inst.objective.alpha) << ";grid=" << grid;
  if (grid) os << ";mu=" << to_string(cfg.mu);
  else if (inst.preemptive && inst.env.m > 1) os << ";G=" << cfg.G;
  os << ";jobs=";
  for (const auto& t : jobs) os << t;
  return os.str();
}

/// Value cache keyed by oracle_key; optionally persisted as JSON lines
/// ({"key": ..., "value": ...}).
class OracleCache {
public:
  std::optional<Rational> find(const std::string& key) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }
  void store(const std::string& key, const Rational& v) {
    std::lock_guard<std::mutex> lock(mu_);
    values_.emplace(key, v);
  }
  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return values_.size();
  }

  /// Merges a JSON-lines file; malformed lines are skipped with a warning.
  void load(const std::string& path) {
    std::ifstream in(path);
    if (!in) return;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      auto k = line.find("\"key\":\""), v = line.find("\",\"value\":\"");
      if (k == std::string::npos || v == std::string::npos || v < k) {
        std::cerr << "warning: dropping corrupt cache line " << lineno << " of " << path << "\n";
        continue;
      }
      std::string key = line.substr(k + 7, v - (k + 7));
      std::string rest = line.substr(v + 11);
      auto close = rest.find('"');
      try {
        if (close == std::string::npos) throw ParseError("unterminated");
        store(key, parse_rational(rest.substr(0, close)));
      } catch (const ParseError&) {
        std::cerr << "warning: dropping corrupt cache line " << lineno << " of " << path << "\n";
      }
    }
  }

  void save(const std::string& path) const {
    std::lock_guard<std::mutex> lock(mu_);
    std::ofstream out(path);
    for (const auto& [k, v] : values_) out << "{\"key\":\"" << k << "\",\"value\":\"" << to_string(v) << "\"}\n";
  }

private:
  mutable std::mutex mu_;
  std::map<std::string, Rational> values_;
};

/// Optimum value through a cache.
inline Rational cached_opt(const Instance& inst, const SchemeConfig& cfg, bool grid, OracleCache& cache) {
  const std::string key = oracle_key(inst, cfg, grid);
  if (auto v = cache.find(key)) return *v;
  Rational v = opt_value(inst, cfg, grid).value;
  cache.store(key, v);
  return v;
}

}  // namespace crsched
