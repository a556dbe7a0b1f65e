#pragma once

// Instance and schedule transformations. Each instance transformation
// returns the transformed object together with the multiplicative loss
// bound it is allowed to cost.

#include "crsched/config.hpp"
#include "crsched/core.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace crsched {

struct LossCertificate {
  Rational factor{1};
  std::string step;
};

inline Rational compose(const std::vector<LossCertificate>& ledger) {
  Rational f(1);
  for (const auto& c : ledger) f *= c.factor;
  return f;
}

struct Transformed {
  Instance instance;
  LossCertificate certificate;
};

/// Release interval index of a job (its date R_x).
inline long long release_interval(const Job& job, const Epsilon& eps) { return interval_of(job.release, eps); }

/// Processing requirement used for size classification: p_j on identical and
/// related machines, the largest finite entry on unrelated machines.
inline Rational size_of(const Job& job, const Instance& inst) {
  if (inst.env.kind == MachineKind::unrelated) return *job.max_finite_proc();
  return job.p();
}

namespace detail {

/// (r, p, w, id) lexicographic, used to break ties deterministically.
inline bool tuple_less(const Job& a, const Job& b) {
  if (a.release != b.release) return a.release < b.release;
  const Rational pa = a.min_finite_proc().value_or(0), pb = b.min_finite_proc().value_or(0);
  if (pa != pb) return pa < pb;
  if (a.weight != b.weight) return a.weight < b.weight;
  return a.id < b.id;
}

/// Smith order: non-increasing w/p.
inline bool smith_before(const Job& a, const Rational& pa, const Job& b, const Rational& pb) {
  Rational ra = a.weight / pa, rb = b.weight / pb;
  if (ra != rb) return ra > rb;
  return tuple_less(a, b);
}

inline std::map<long long, std::vector<std::size_t>> jobs_by_date(const Instance& inst) {
  std::map<long long, std::vector<std::size_t>> out;
  for (std::size_t j = 0; j < inst.jobs.size(); ++j) out[release_interval(inst.jobs[j], inst.eps)].push_back(j);
  return out;
}

inline Rational min_release_for(const Job& job, const Instance& inst) {
  Rational p = inst.env.kind == MachineKind::unrelated ? *job.min_finite_proc() : job.p();
  if (inst.env.kind == MachineKind::related) p /= inst.env.max_speed();
  return std::max({job.release, Rational(inst.eps.value() * p), Rational(1)});
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Geometric rounding

inline Transformed round_instance(const Instance& inst) {
  inst.validate();
  Instance out = inst;
  const Epsilon& eps = inst.eps;
  for (auto& job : out.jobs) {
    for (auto& p : job.proc)
      if (p) p = round_up_power(*p, eps);
    job.release = round_up_power(detail::min_release_for(job, out), eps);
    job.weight = round_up_power(job.weight, eps);
  }
  if (out.env.kind == MachineKind::related)
    for (auto& s : out.env.speeds) s = eps.power(floor_log(s, eps.base()));
  return {std::move(out), {pow(eps.base(), 3), "geometric_rounding"}};
}

/// True when every release date, processing time and weight is a power of (1+eps).
inline bool is_rounded(const Instance& inst) {
  for (const auto& job : inst.jobs) {
    if (!exact_log(job.release, inst.eps.base()) || !exact_log(job.weight, inst.eps.base())) return false;
    for (const auto& p : job.proc)
      if (p && !exact_log(*p, inst.eps.base())) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Size classes

enum class SizeKind { large, small, tiny };

struct DateClasses {
  std::vector<std::size_t> large, small, tiny;
};

struct SizeClass {
  std::map<long long, DateClasses> by_date;
  SizeKind kind_of(std::size_t j) const {
    for (const auto& [x, c] : by_date) {
      if (std::find(c.large.begin(), c.large.end(), j) != c.large.end()) return SizeKind::large;
      if (std::find(c.tiny.begin(), c.tiny.end(), j) != c.tiny.end()) return SizeKind::tiny;
      if (std::find(c.small.begin(), c.small.end(), j) != c.small.end()) return SizeKind::small;
    }
    throw DomainError("job index not classified");
  }
};

inline Rational large_threshold(long long x, const Epsilon& eps) { return pow(eps.value(), 3) * eps.power(x); }
inline Rational tiny_threshold(long long x, const Epsilon& eps, int d) {
  return eps.value() / (2 * d) * eps.interval_length(x);
}

inline SizeKind classify_size(const Rational& p, long long x, const Epsilon& eps, int d) {
  if (p >= large_threshold(x, eps)) return SizeKind::large;
  if (p <= tiny_threshold(x, eps, d)) return SizeKind::tiny;
  return SizeKind::small;
}

inline SizeClass classify_sizes(const Instance& inst, const SchemeConfig& cfg) {
  SizeClass out;
  for (const auto& [x, js] : detail::jobs_by_date(inst)) {
    auto& c = out.by_date[x];
    for (auto j : js) {
      switch (classify_size(size_of(inst.jobs[j], inst), x, inst.eps, cfg.d)) {
        case SizeKind::large: c.large.push_back(j); break;
        case SizeKind::small: c.small.push_back(j); break;
        case SizeKind::tiny: c.tiny.push_back(j); break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tiny-job packs

namespace detail {

/// Packs the tiny jobs released at date x; returns the replacement jobs.
inline std::vector<Job> pack_date(const Instance& inst, long long x, std::vector<std::size_t> tiny, int d) {
  const Epsilon& eps = inst.eps;
  std::sort(tiny.begin(), tiny.end(), [&](std::size_t a, std::size_t b) {
    return smith_before(inst.jobs[a], size_of(inst.jobs[a], inst), inst.jobs[b], size_of(inst.jobs[b], inst));
  });
  const Rational upper = eps.value() / d * eps.interval_length(x);
  const Rational lower = eps.value() / (2 * d) * eps.interval_length(x);
  std::vector<Job> packs;
  std::size_t k = 0;
  while (k < tiny.size()) {
    std::vector<std::size_t> members;
    Rational total(0);
    while (k < tiny.size() && total + size_of(inst.jobs[tiny[k]], inst) <= upper) {
      total += size_of(inst.jobs[tiny[k]], inst);
      members.push_back(tiny[k++]);
    }
    Job pack;
    Rational weight(0);
    for (auto j : members) {
      pack.id += (pack.id.empty() ? "" : "+") + inst.jobs[j].id;
      pack.release = std::max(pack.release, inst.jobs[j].release);
      weight += inst.jobs[j].weight;
    }
    if (total < lower) total = lower;
    Rational p = round_up_power(total, eps);
    if (inst.env.kind == MachineKind::unrelated) {
      // Members share one class in practice; scale the first member's row.
      const Job& first = inst.jobs[members.front()];
      Rational scale = p / size_of(first, inst);
      for (const auto& v : first.proc) pack.proc.push_back(v ? std::optional<Rational>(round_up_power(*v * scale, eps)) : std::nullopt);
    } else {
      pack.proc = {p};
    }
    pack.weight = round_up_power(weight, eps);
    packs.push_back(std::move(pack));
  }
  return packs;
}

}  // namespace detail

/// Groups the tiny jobs of each date into packs in Smith order.
inline Transformed pack_tiny_jobs(const Instance& inst, const SchemeConfig& cfg) {
  Instance out = inst;
  out.jobs.clear();
  const auto classes = classify_sizes(inst, cfg);
  std::set<std::size_t> tiny_all;
  for (const auto& [x, c] : classes.by_date) tiny_all.insert(c.tiny.begin(), c.tiny.end());
  for (std::size_t j = 0; j < inst.jobs.size(); ++j)
    if (!tiny_all.count(j)) out.jobs.push_back(inst.jobs[j]);
  for (const auto& [x, c] : classes.by_date) {
    if (c.tiny.empty()) continue;
    for (auto& pack : detail::pack_date(inst, x, c.tiny, cfg.d)) out.jobs.push_back(std::move(pack));
  }
  return {std::move(out), {pow(inst.eps.base(), 2), "tiny_job_packs"}};
}

// ---------------------------------------------------------------------------
// Count and volume caps

/// Number of large jobs of one type (date, size) kept at their date.
inline int large_cap(const SchemeConfig& cfg, int m) {
  if (cfg.mode == SchemeMode::desk) return cfg.large_per_type;
  // m/eps^2 + m jobs of one type can be touched in the interval.
  Rational v = Rational(m) / (cfg.eps.value() * cfg.eps.value()) + m;
  return static_cast<int>(to_ll(ceil_div(v)));
}

namespace detail {

inline void shift_to_next(Job& job, long long x, const SchemeConfig& cfg) {
  job.release = cfg.eps.power(std::min<long long>(x + 1, cfg.X_max + 1));
}

}  // namespace detail

namespace detail {

inline std::vector<std::size_t> jobs_at(const Instance& inst, long long x) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < inst.jobs.size(); ++j)
    if (release_interval(inst.jobs[j], inst.eps) == x) out.push_back(j);
  return out;
}

/// Replaces the tiny jobs of date x by packs. Returns true if any existed.
inline bool pack_at(Instance& inst, long long x, const SchemeConfig& cfg) {
  std::vector<std::size_t> tiny;
  for (auto j : jobs_at(inst, x))
    if (classify_size(size_of(inst.jobs[j], inst), x, inst.eps, cfg.d) == SizeKind::tiny) tiny.push_back(j);
  if (tiny.empty()) return false;
  auto packs = pack_date(inst, x, tiny, cfg.d);
  std::vector<Job> kept;
  for (std::size_t j = 0; j < inst.jobs.size(); ++j)
    if (std::find(tiny.begin(), tiny.end(), j) == tiny.end()) kept.push_back(std::move(inst.jobs[j]));
  for (auto& p : packs) kept.push_back(std::move(p));
  inst.jobs = std::move(kept);
  return true;
}

inline bool prune_at(Instance& inst, long long x, const SchemeConfig& cfg) {
  const int cap = large_cap(cfg, inst.env.m);
  std::map<Rational, std::vector<std::size_t>> types;
  for (auto j : jobs_at(inst, x)) {
    Rational p = size_of(inst.jobs[j], inst);
    if (classify_size(p, x, inst.eps, cfg.d) == SizeKind::large) types[p].push_back(j);
  }
  bool changed = false;
  for (auto& [p, js] : types) {
    if (static_cast<int>(js.size()) <= cap) continue;
    std::sort(js.begin(), js.end(), [&](std::size_t a, std::size_t b) {
      if (inst.jobs[a].weight != inst.jobs[b].weight) return inst.jobs[a].weight > inst.jobs[b].weight;
      return tuple_less(inst.jobs[a], inst.jobs[b]);
    });
    for (std::size_t k = cap; k < js.size(); ++k) shift_to_next(inst.jobs[js[k]], x, cfg);
    changed = true;
  }
  return changed;
}

inline bool cap_at(Instance& inst, long long x, const SchemeConfig& cfg) {
  std::vector<std::size_t> small;
  for (auto j : jobs_at(inst, x))
    if (classify_size(size_of(inst.jobs[j], inst), x, inst.eps, cfg.d) != SizeKind::large) small.push_back(j);
  std::sort(small.begin(), small.end(), [&](std::size_t a, std::size_t b) {
    return smith_before(inst.jobs[a], size_of(inst.jobs[a], inst), inst.jobs[b], size_of(inst.jobs[b], inst));
  });
  const Rational budget = inst.env.m * inst.eps.interval_length(x);
  Rational used(0);
  bool full = false;
  for (auto j : small) {
    Rational p = size_of(inst.jobs[j], inst);
    if (!full && used + p <= budget) {
      used += p;
    } else {
      full = true;
      shift_to_next(inst.jobs[j], x, cfg);
    }
  }
  return full;
}

inline long long first_date(const Instance& inst) {
  long long x = 0;
  bool any = false;
  for (const auto& job : inst.jobs) {
    long long y = release_interval(job, inst.eps);
    x = any ? std::min(x, y) : y;
    any = true;
  }
  return x;
}

}  // namespace detail

/// Keeps the heaviest large jobs of each (date, size) type and moves the rest
/// to the next date. Dates are swept upward, so moved jobs are reconsidered.
inline Transformed prune_large_jobs(const Instance& inst, const SchemeConfig& cfg) {
  Instance out = inst;
  for (long long x = detail::first_date(out); x <= cfg.X_max; ++x) detail::prune_at(out, x, cfg);
  return {std::move(out), {1, "large_job_count"}};
}

/// Per date keeps the longest Smith-order prefix of small jobs whose volume
/// fits into m * |I_x|; the rest moves to the next date.
inline Transformed cap_small_volume(const Instance& inst, const SchemeConfig& cfg) {
  Instance out = inst;
  for (long long x = detail::first_date(out); x <= cfg.X_max; ++x) detail::cap_at(out, x, cfg);
  return {std::move(out), {inst.eps.base(), "small_job_volume"}};
}

// ---------------------------------------------------------------------------
// Safety nets

struct NetRequest {
  long long release_interval = 0;
  long long net_interval = 0;
  Rational volume;
};

struct NetWindow {
  long long release_interval = 0;
  long long net_interval = 0;
  Rational start;
  Rational end;
};

struct SafetyNetPlan {
  std::vector<NetWindow> windows;
  const NetWindow* find(long long release_x) const {
    for (const auto& w : windows)
      if (w.release_interval == release_x) return &w;
    return nullptr;
  }
};

class SafetyNetInfeasible : public std::runtime_error {
public:
  SafetyNetInfeasible(const std::string& msg, int suggested_s) : std::runtime_error(msg), suggested_s_(suggested_s) {}
  int suggested_s() const { return suggested_s_; }

private:
  int suggested_s_;
};

/// Free space that time-stretching leaves at the end of interval y.
inline Rational net_capacity(long long y, const Epsilon& eps) { return eps.value() * eps.interval_length(y - 1); }

/// Stacks the requested windows at the end of their net intervals, the most
/// recent release date innermost.
inline SafetyNetPlan place_safety_nets(std::vector<NetRequest> requests, const Epsilon& eps) {
  std::sort(requests.begin(), requests.end(), [](const NetRequest& a, const NetRequest& b) {
    if (a.net_interval != b.net_interval) return a.net_interval < b.net_interval;
    return a.release_interval > b.release_interval;
  });
  SafetyNetPlan plan;
  std::map<long long, Rational> used;
  for (const auto& req : requests) {
    Rational& u = used[req.net_interval];
    Rational end = eps.power(req.net_interval + 1) - u;
    u += req.volume;
    if (u > net_capacity(req.net_interval, eps))
      throw SafetyNetInfeasible("safety net infeasible in interval " + std::to_string(req.net_interval) +
                                    ": increase s",
                                -1);
    plan.windows.push_back({req.release_interval, req.net_interval, end - req.volume, end});
  }
  std::sort(plan.windows.begin(), plan.windows.end(),
            [](const NetWindow& a, const NetWindow& b) { return a.release_interval < b.release_interval; });
  return plan;
}

/// Volume a release date needs in its safety net (fastest machine on related
/// machines, fastest row on unrelated machines).
inline std::map<long long, Rational> net_volumes(const Instance& inst) {
  std::map<long long, Rational> vol;
  for (const auto& job : inst.jobs) {
    Rational p = inst.env.kind == MachineKind::unrelated ? *job.min_finite_proc() : job.p();
    if (inst.env.kind == MachineKind::related) p /= inst.env.max_speed();
    vol[release_interval(job, inst.eps)] += p;
  }
  return vol;
}

/// Smallest s for which every date's volume fits its net.
inline int minimal_net_span(const Instance& inst) {
  int best = 1;
  for (const auto& [x, v] : net_volumes(inst)) {
    int s = 1;
    while (v > net_capacity(x + s - 1, inst.eps)) ++s;
    best = std::max(best, s);
  }
  return best;
}

inline SafetyNetPlan assign_safety_nets(const Instance& inst, const SchemeConfig& cfg) {
  std::vector<NetRequest> reqs;
  for (const auto& [x, v] : net_volumes(inst)) reqs.push_back({x, x + cfg.s - 1, v});
  try {
    return place_safety_nets(std::move(reqs), inst.eps);
  } catch (const SafetyNetInfeasible& e) {
    int s = minimal_net_span(inst);
    throw SafetyNetInfeasible(std::string(e.what()) + " (minimal feasible s = " + std::to_string(s) + ")", s);
  }
}

// ---------------------------------------------------------------------------
// Periods and parts

struct PartStructure {
  int s = 1;
  std::vector<Rational> period_rw;                 // index k = period Q_k
  std::vector<int> insignificant;                  // a_1 < a_2 < ...
  std::vector<std::pair<int, int>> parts;          // [first, last] period of each part
  std::set<std::string> net_only_jobs;             // jobs of insignificant periods

  int part_of_period(int k) const {
    for (std::size_t i = 0; i < parts.size(); ++i)
      if (k >= parts[i].first && k <= parts[i].second) return static_cast<int>(i);
    return -1;
  }
};

inline int period_of(long long x, int s) { return static_cast<int>(x / s); }

/// Splits the periods into parts at insignificant periods: a period is
/// insignificant when its release weight is at most eps/(1+eps)^s times the
/// release weight of the earlier periods of the current part.
inline PartStructure partition_periods(const Instance& inst, const SchemeConfig& cfg) {
  PartStructure ps;
  ps.s = cfg.s;
  if (inst.jobs.empty()) return ps;
  int last = 0;
  for (const auto& job : inst.jobs) last = std::max(last, period_of(release_interval(job, inst.eps), cfg.s));
  ps.period_rw.assign(last + 1, Rational(0));
  for (const auto& job : inst.jobs)
    ps.period_rw[period_of(release_interval(job, inst.eps), cfg.s)] += job.release * job.weight;

  const Rational factor = inst.eps.value() / pow(inst.eps.base(), cfg.s);
  int part_start = 0;
  Rational prior(0);
  int prior_count = 0;
  for (int k = 0; k <= last; ++k) {
    if (prior_count >= 1 && ps.period_rw[k] <= factor * prior) {
      ps.insignificant.push_back(k);
      ps.parts.emplace_back(part_start, k);
      part_start = k + 1;
      prior = 0;
      prior_count = 0;
      continue;
    }
    if (prior_count == 0 && ps.period_rw[k] == 0) continue;  // leading empty periods
    prior += ps.period_rw[k];
    ++prior_count;
  }
  if (part_start <= last) ps.parts.emplace_back(part_start, last);
  for (const auto& job : inst.jobs) {
    int k = period_of(release_interval(job, inst.eps), cfg.s);
    if (std::binary_search(ps.insignificant.begin(), ps.insignificant.end(), k)) ps.net_only_jobs.insert(job.id);
  }
  return ps;
}

// ---------------------------------------------------------------------------
// Relevance

struct RelevanceJob {
  long long release_x = 0;
  Rational weight;
};

/// eps / (Delta * Gamma * (1+eps)^(Gamma+s))
inline Rational domination_factor(const SchemeConfig& cfg) {
  return cfg.eps.value() / (Rational(cfg.Delta) * cfg.Gamma() * pow(cfg.eps.base(), cfg.Gamma() + cfg.s));
}

/// One relevance step at interval x. `irrelevant` carries the flags from
/// x-1 (jobs released at x enter as relevant) and is updated in place.
/// Jobs released after x are left untouched.
inline void relevance_step(const std::vector<RelevanceJob>& jobs, std::vector<bool>& irrelevant, long long x,
                           const SchemeConfig& cfg, const Objective& obj) {
  irrelevant.resize(jobs.size(), false);
  if (obj.kind == ObjectiveKind::makespan) {
    for (std::size_t j = 0; j < jobs.size(); ++j)
      if (jobs[j].release_x <= x && jobs[j].release_x <= x - cfg.s) irrelevant[j] = true;
    return;
  }
  const long long window_start = x - cfg.Gamma();
  std::optional<Rational> heaviest;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto& job = jobs[j];
    if (job.release_x > x || job.release_x < window_start) continue;
    bool eligible = job.release_x == x || !irrelevant[j];
    if (eligible && (!heaviest || job.weight > *heaviest)) heaviest = job.weight;
  }
  const Rational bound = heaviest ? domination_factor(cfg) * *heaviest : Rational(0);
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto& job = jobs[j];
    if (job.release_x > x || irrelevant[j]) continue;
    if (job.release_x < window_start || (heaviest && job.weight < bound)) irrelevant[j] = true;
  }
}

/// Relevance flags (true = irrelevant) of all jobs released up to R_x,
/// obtained by iterating the step from the earliest release date.
inline std::vector<bool> classify_relevance(const Instance& inst, long long x, const SchemeConfig& cfg) {
  std::vector<RelevanceJob> jobs;
  long long first = x;
  for (const auto& job : inst.jobs) {
    jobs.push_back({release_interval(job, inst.eps), job.weight});
    first = std::min(first, jobs.back().release_x);
  }
  std::vector<bool> irr(jobs.size(), false);
  for (long long y = first; y <= x; ++y) relevance_step(jobs, irr, y, cfg, inst.objective);
  return irr;
}

// ---------------------------------------------------------------------------
// Non-preemptive part rescaling

/// Scales the weights of each part by the smallest power of (1+eps) that makes
/// its first job dominate all earlier parts.
inline Transformed rescale_parts_nonpreemptive(const Instance& inst, const PartStructure& parts) {
  Instance out = inst;
  const Rational factor = inst.eps.value() / pow(inst.eps.base(), parts.s);
  Rational earlier(0);
  for (std::size_t i = 0; i < parts.parts.size(); ++i) {
    std::vector<std::size_t> members;
    for (std::size_t j = 0; j < out.jobs.size(); ++j) {
      int k = period_of(release_interval(out.jobs[j], out.eps), parts.s);
      if (k >= parts.parts[i].first && k <= parts.parts[i].second) members.push_back(j);
    }
    if (members.empty()) continue;
    if (i > 0 && earlier > 0) {
      std::size_t first = *std::min_element(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
        return detail::tuple_less(out.jobs[a], out.jobs[b]);
      });
      const Rational first_rw = out.jobs[first].release * out.jobs[first].weight;
      long long y = 0;
      while (earlier > factor * first_rw * out.eps.power(y)) ++y;
      if (y > 0)
        for (auto j : members) out.jobs[j].weight *= out.eps.power(y);
    }
    for (auto j : members) earlier += out.jobs[j].release * out.jobs[j].weight;
  }
  return {std::move(out), {inst.eps.base(), "part_rescaling"}};
}

// ---------------------------------------------------------------------------
// Related and unrelated machines

struct FoldPlan {
  std::vector<int> removed;     // original machine indices folded away
  int host = 0;                 // original index of the fastest machine
  std::vector<Rational> original_speeds;
  Rational scale{1};            // new speed = old speed / scale
};

struct SpeedBound {
  Instance instance;
  LossCertificate certificate;
  FoldPlan fold;
};

/// Removes machines of speed <= (eps/m) * s_max; their work is replayed in the
/// slack of the fastest machine. Speeds are renormalized so the slowest is 1,
/// with processing requirements scaled to keep processing durations.
inline SpeedBound bound_speeds_related(const Instance& inst, const SchemeConfig&) {
  if (inst.env.kind != MachineKind::related) throw DomainError("bound_speeds_related needs related machines");
  const auto& speeds = inst.env.speeds;
  const int m = inst.env.m;
  FoldPlan plan;
  plan.original_speeds = speeds;
  plan.host = static_cast<int>(std::max_element(speeds.begin(), speeds.end()) - speeds.begin());
  const Rational threshold = inst.eps.value() / m * speeds[plan.host];
  std::vector<Rational> kept;
  for (int i = 0; i < m; ++i) {
    if (i != plan.host && speeds[i] <= threshold)
      plan.removed.push_back(i);
    else
      kept.push_back(speeds[i]);
  }
  plan.scale = *std::min_element(kept.begin(), kept.end());
  Instance out = inst;
  for (auto& s : kept) s /= plan.scale;
  out.env = MachineEnv::related(kept);
  for (auto& job : out.jobs) job.proc = {job.p() / plan.scale};
  return {std::move(out), {pow(inst.eps.base(), 2), "speed_bound"}, std::move(plan)};
}

/// Forbids machines on which a job is more than m/eps times slower than on
/// its fastest machine.
inline Transformed bound_ptimes_unrelated(const Instance& inst, const SchemeConfig&) {
  if (inst.env.kind != MachineKind::unrelated) throw DomainError("bound_ptimes_unrelated needs unrelated machines");
  Instance out = inst;
  const Rational ratio = inst.eps.value() / inst.env.m;
  for (auto& job : out.jobs) {
    const Rational fastest = *job.min_finite_proc();
    for (auto& p : job.proc)
      if (p && fastest <= ratio * *p) p.reset();
    if (!job.min_finite_proc()) throw std::logic_error("job lost every machine");
  }
  return {std::move(out), {pow(inst.eps.base(), 2), "processing_time_range"}};
}

struct JobClassInfo {
  std::vector<bool> support;
  std::vector<Rational> ratios;  // p_ij / p_{i0 j} on the support, i0 = first supported machine
};

struct JobClassTable {
  std::vector<int> class_of;                  // per job
  std::vector<JobClassInfo> classes;
  std::vector<Rational> p_tilde;              // per job: largest finite p_ij
};

struct JobClassResult {
  JobClassTable table;
  Instance instance;
  LossCertificate certificate;
};

/// Groups unrelated jobs into classes (same support, proportional rows) and
/// applies the per-class count cap of each date, moving excess jobs (lowest
/// weight first) to the next date.
inline JobClassResult classify_job_classes(const Instance& inst, const SchemeConfig& cfg) {
  if (inst.env.kind != MachineKind::unrelated) throw DomainError("job classes need unrelated machines");
  JobClassResult res;
  res.instance = inst;
  auto describe = [&](const Job& job) {
    JobClassInfo info;
    std::optional<Rational> base;
    for (const auto& p : job.proc) {
      info.support.push_back(p.has_value());
      if (p) {
        if (!base) base = *p;
        info.ratios.push_back(*p / *base);
      }
    }
    return info;
  };
  auto same = [](const JobClassInfo& a, const JobClassInfo& b) { return a.support == b.support && a.ratios == b.ratios; };
  for (const auto& job : inst.jobs) {
    JobClassInfo info = describe(job);
    int id = -1;
    for (std::size_t c = 0; c < res.table.classes.size(); ++c)
      if (same(res.table.classes[c], info)) id = static_cast<int>(c);
    if (id < 0) {
      id = static_cast<int>(res.table.classes.size());
      res.table.classes.push_back(info);
    }
    res.table.class_of.push_back(id);
    res.table.p_tilde.push_back(*job.max_finite_proc());
  }
  for (long long x = 0; x <= cfg.X_max; ++x) {
    for (std::size_t c = 0; c < res.table.classes.size(); ++c) {
      std::vector<std::size_t> members;
      for (std::size_t j = 0; j < res.instance.jobs.size(); ++j)
        if (res.table.class_of[j] == static_cast<int>(c) && release_interval(res.instance.jobs[j], inst.eps) == x)
          members.push_back(j);
      if (static_cast<int>(members.size()) <= cfg.Delta) continue;
      std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
        const Job& ja = res.instance.jobs[a];
        const Job& jb = res.instance.jobs[b];
        if (ja.weight != jb.weight) return ja.weight > jb.weight;
        return detail::tuple_less(ja, jb);
      });
      for (std::size_t k = cfg.Delta; k < members.size(); ++k)
        detail::shift_to_next(res.instance.jobs[members[k]], x, cfg);
    }
  }
  res.certificate = {inst.eps.base(), "job_class_caps"};
  return res;
}

// ---------------------------------------------------------------------------
// Pipeline

struct PipelineOptions {
  bool rescale_nonpreemptive_parts = false;
};

struct PipelineResult {
  Instance instance;
  std::vector<LossCertificate> ledger;
  std::optional<SafetyNetPlan> nets;
  PartStructure parts;

  Rational factor() const { return compose(ledger); }
};

/// round -> pack -> prune -> cap -> (part rescaling) -> nets -> periods.
/// The three date-local steps run together date by date in increasing order,
/// so a job moved to a later date is classified again there.
inline PipelineResult simplify_pipeline(const Instance& input, const SchemeConfig& cfg,
                                        const PipelineOptions& opts = {}) {
  PipelineResult res;
  auto rounded = round_instance(input);
  res.ledger.push_back(rounded.certificate);
  Instance inst = std::move(rounded.instance);

  bool packed = false, capped = false;
  for (long long x = detail::first_date(inst); x <= cfg.X_max; ++x) {
    packed = detail::pack_at(inst, x, cfg) || packed;
    detail::prune_at(inst, x, cfg);
    capped = detail::cap_at(inst, x, cfg) || capped;
  }
  res.ledger.push_back({packed ? pow(inst.eps.base(), 2) : Rational(1), "tiny_job_packs"});
  res.ledger.push_back({1, "large_job_count"});
  res.ledger.push_back({capped ? inst.eps.base() : Rational(1), "small_job_volume"});

  res.parts = partition_periods(inst, cfg);
  if (opts.rescale_nonpreemptive_parts && !inst.preemptive) {
    auto t = rescale_parts_nonpreemptive(inst, res.parts);
    inst = std::move(t.instance);
    res.ledger.push_back(t.certificate);
  }
  try {
    res.nets = assign_safety_nets(inst, cfg);
  } catch (const SafetyNetInfeasible&) {
    res.nets.reset();
  }
  res.instance = std::move(inst);
  return res;
}

inline bool operator==(const Job& a, const Job& b) {
  return a.id == b.id && a.release == b.release && a.proc == b.proc && a.weight == b.weight;
}

}  // namespace crsched
