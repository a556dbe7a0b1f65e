#pragma once

// Domain model: jobs, machine environments, instances, schedules and their
// evaluation. All rounded quantities are exact powers of (1+eps).

#include "crsched/rational.hpp"

#include <boost/multiprecision/mpfr.hpp>

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace crsched {

class PrecisionError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IncompleteSchedule : public std::runtime_error {
public:
  IncompleteSchedule(std::vector<std::string> unfinished)
      : std::runtime_error(make_message(unfinished)), unfinished_(std::move(unfinished)) {}
  const std::vector<std::string>& unfinished() const { return unfinished_; }

private:
  static std::string make_message(const std::vector<std::string>& ids) {
    std::string msg = "schedule incomplete; unfinished jobs:";
    for (const auto& id : ids) msg += " " + id;
    return msg;
  }
  std::vector<std::string> unfinished_;
};

/// The rounding parameter. (1+eps) is rational, so every power is exact.
class Epsilon {
public:
  Epsilon() : value_(1, 2), base_(3, 2) {}
  explicit Epsilon(Rational value) : value_(std::move(value)) {
    if (value_ <= 0 || value_ > 1) throw DomainError("epsilon must lie in (0, 1]");
    base_ = 1 + value_;
  }

  const Rational& value() const { return value_; }
  const Rational& base() const { return base_; }

  /// R_x = (1+eps)^x
  Rational power(long long x) const { return pow(base_, x); }
  /// |I_x| = eps * (1+eps)^x
  Rational interval_length(long long x) const { return value_ * power(x); }

  friend bool operator==(const Epsilon& a, const Epsilon& b) { return a.value_ == b.value_; }

private:
  Rational value_;
  Rational base_;
};

/// Index x with (1+eps)^x <= t < (1+eps)^(x+1).
inline long long interval_of(const Rational& t, const Epsilon& eps) {
  if (t < 1) throw DomainError("interval_of: time " + to_string(t) + " lies before t=1");
  return floor_log(t, eps.base());
}

/// Smallest power of (1+eps) that is >= v.
inline Rational round_up_power(const Rational& v, const Epsilon& eps) {
  return eps.power(ceil_log(v, eps.base()));
}

using JobId = std::string;

/// One job. `proc` has one entry for identical/related machines and one
/// entry per machine (nullopt = infinite) for unrelated machines.
struct Job {
  JobId id;
  Rational release;
  std::vector<std::optional<Rational>> proc;
  Rational weight{1};

  const Rational& p() const {
    if (proc.empty() || !proc.front()) throw DomainError("job " + id + " has no finite processing time");
    return *proc.front();
  }
  std::optional<Rational> min_finite_proc() const {
    std::optional<Rational> best;
    for (const auto& v : proc)
      if (v && (!best || *v < *best)) best = *v;
    return best;
  }
  std::optional<Rational> max_finite_proc() const {
    std::optional<Rational> best;
    for (const auto& v : proc)
      if (v && (!best || *v > *best)) best = *v;
    return best;
  }
};

enum class MachineKind { identical, related, unrelated };

struct MachineEnv {
  MachineKind kind = MachineKind::identical;
  int m = 1;
  std::vector<Rational> speeds;  // related only

  static MachineEnv identical(int m) { return MachineEnv{MachineKind::identical, m, {}}; }
  static MachineEnv related(std::vector<Rational> speeds) {
    MachineEnv env{MachineKind::related, static_cast<int>(speeds.size()), std::move(speeds)};
    return env;
  }
  static MachineEnv unrelated(int m) { return MachineEnv{MachineKind::unrelated, m, {}}; }

  Rational speed(int i) const { return kind == MachineKind::related ? speeds.at(i) : Rational(1); }
  Rational max_speed() const {
    if (kind != MachineKind::related) return 1;
    return *std::max_element(speeds.begin(), speeds.end());
  }
};

enum class ObjectiveKind { weighted_completion, monomial, makespan };

struct Objective {
  ObjectiveKind kind = ObjectiveKind::weighted_completion;
  Rational k{1};
  Rational alpha{1};

  static Objective weighted_completion() { return {}; }
  static Objective makespan() { return {ObjectiveKind::makespan, 1, 1}; }
  static Objective monomial(Rational k, Rational alpha) {
    if (k <= 0 || alpha < 1) throw DomainError("monomial objective needs k > 0 and alpha >= 1");
    return {ObjectiveKind::monomial, std::move(k), std::move(alpha)};
  }
  /// Objective values are exact rationals (no irrational powers).
  bool exact() const {
    return kind != ObjectiveKind::monomial || denominator_of(alpha) == 1;
  }
  bool uses_weights() const { return kind != ObjectiveKind::makespan; }
};

struct Instance {
  Epsilon eps;
  MachineEnv env = MachineEnv::identical(1);
  std::vector<Job> jobs;
  bool preemptive = true;
  Objective objective;

  std::optional<std::size_t> find(const JobId& id) const {
    for (std::size_t j = 0; j < jobs.size(); ++j)
      if (jobs[j].id == id) return j;
    return std::nullopt;
  }

  /// Processing time of job j on machine i (nullopt = cannot run there).
  std::optional<Rational> proc_time(std::size_t j, int i) const {
    const Job& job = jobs[j];
    switch (env.kind) {
      case MachineKind::identical: return job.p();
      case MachineKind::related: return job.p() / env.speed(i);
      case MachineKind::unrelated: return job.proc.at(static_cast<std::size_t>(i));
    }
    return std::nullopt;
  }

  void validate() const {
    if (env.m < 1) throw DomainError("need at least one machine");
    if (env.kind == MachineKind::related) {
      if (static_cast<int>(env.speeds.size()) != env.m) throw DomainError("speed vector length != m");
      for (const auto& s : env.speeds)
        if (s <= 0) throw DomainError("speeds must be positive");
    }
    std::set<JobId> ids;
    for (const auto& job : jobs) {
      if (!ids.insert(job.id).second) throw DomainError("duplicate job id " + job.id);
      if (job.release <= 0) throw DomainError("job " + job.id + ": release must be positive");
      if (job.weight <= 0) throw DomainError("job " + job.id + ": weight must be positive");
      if (env.kind == MachineKind::unrelated) {
        if (static_cast<int>(job.proc.size()) != env.m)
          throw DomainError("job " + job.id + ": unrelated row needs one entry per machine");
        if (!job.min_finite_proc()) throw DomainError("job " + job.id + ": no finite processing time");
      } else if (job.proc.size() != 1 || !job.proc.front()) {
        throw DomainError("job " + job.id + ": expected a single finite processing time");
      }
      for (const auto& v : job.proc)
        if (v && *v <= 0) throw DomainError("job " + job.id + ": processing times must be positive");
    }
  }
};

/// Sum of r_j * w_j.
inline Rational release_weight(const std::vector<Job>& jobs) {
  Rational total(0);
  for (const auto& job : jobs) total += job.release * job.weight;
  return total;
}

// ---------------------------------------------------------------------------
// Schedules

struct Segment {
  int machine = 0;
  std::size_t job = 0;
  Rational start;
  Rational end;
};

/// One processing entry of an interval-schedule, in job atoms.
struct IntervalEntry {
  int machine = 0;
  std::size_t job = 0;
  int atoms = 0;
  Rational amount;
};

struct IntervalRecord {
  long long x = 0;
  std::vector<IntervalEntry> entries;
};

struct CompletionRecord {
  Rational raw;
  long long interval = 0;  // c(j): interval containing the completion
  Rational snapped;        // R_{c(j)+1}
};

struct Schedule {
  std::vector<Segment> segments;
  std::vector<IntervalRecord> intervals;  // optional interval view
  std::vector<std::optional<CompletionRecord>> completions;
};

/// Fraction of job j processed by a segment on machine i of given duration.
inline Rational processed_fraction(const Instance& inst, std::size_t j, int machine, const Rational& duration) {
  auto pt = inst.proc_time(j, machine);
  if (!pt) throw DomainError("job " + inst.jobs[j].id + " cannot run on machine " + std::to_string(machine));
  return duration / *pt;
}

inline CompletionRecord completion_record(const Rational& c, const Epsilon& eps) {
  CompletionRecord rec;
  rec.raw = c;
  long long x = interval_of(c, eps);
  if (eps.power(x) == c) {
    rec.interval = x - 1;
    rec.snapped = c;
  } else {
    rec.interval = x;
    rec.snapped = eps.power(x + 1);
  }
  return rec;
}

/// Recompute completion records from the segment list.
inline void finalize_completions(Schedule& sched, const Instance& inst) {
  std::vector<Rational> frac(inst.jobs.size(), Rational(0));
  std::vector<std::optional<Rational>> last_end(inst.jobs.size());
  for (const auto& seg : sched.segments) {
    frac[seg.job] += processed_fraction(inst, seg.job, seg.machine, seg.end - seg.start);
    if (!last_end[seg.job] || seg.end > *last_end[seg.job]) last_end[seg.job] = seg.end;
  }
  sched.completions.assign(inst.jobs.size(), std::nullopt);
  for (std::size_t j = 0; j < inst.jobs.size(); ++j)
    if (frac[j] == 1 && last_end[j]) sched.completions[j] = completion_record(*last_end[j], inst.eps);
}

/// Objective value as an enclosure [lo, hi]; lo == hi whenever it is exact.
struct ObjectiveValue {
  Rational lo;
  Rational hi;
  bool exact() const { return lo == hi; }
  const Rational& value() const {
    if (!exact()) throw PrecisionError("objective value only known within an interval");
    return lo;
  }
};

namespace detail {
using HighFloat = boost::multiprecision::mpfr_float_100;

/// Enclosure of c^alpha for rational c > 0 and rational alpha.
inline ObjectiveValue power_enclosure(const Rational& c, const Rational& alpha) {
  if (denominator_of(alpha) == 1) {
    Rational v = pow(c, to_ll(numerator_of(alpha)));
    return {v, v};
  }
  HighFloat base(numerator_of(c).str());
  base /= HighFloat(denominator_of(c).str());
  HighFloat e(numerator_of(alpha).str());
  e /= HighFloat(denominator_of(alpha).str());
  HighFloat v = boost::multiprecision::pow(base, e);
  // 100 decimal digits; a relative slack of 1e-80 encloses the rounding error.
  HighFloat slack = v * HighFloat("1e-80");
  auto to_rat = [](const HighFloat& f) {
    std::ostringstream os;
    os << std::setprecision(95) << std::scientific << f;
    return parse_rational(os.str());
  };
  return {to_rat(v - slack), to_rat(v + slack)};
}
}  // namespace detail

/// Weighted contribution w * f(C) of one completion time.
inline ObjectiveValue job_cost(const Objective& obj, const Rational& weight, const Rational& c) {
  switch (obj.kind) {
    case ObjectiveKind::weighted_completion: {
      Rational v = weight * c;
      return {v, v};
    }
    case ObjectiveKind::monomial: {
      auto p = detail::power_enclosure(c, obj.alpha);
      return {weight * obj.k * p.lo, weight * obj.k * p.hi};
    }
    case ObjectiveKind::makespan: return {c, c};
  }
  return {0, 0};
}

/// Combine per-job costs: sum for min-sum objectives, max for makespan.
inline ObjectiveValue combine_costs(const Objective& obj, const std::vector<ObjectiveValue>& costs) {
  ObjectiveValue total{0, 0};
  for (const auto& c : costs) {
    if (obj.kind == ObjectiveKind::makespan) {
      total.lo = std::max(total.lo, c.lo);
      total.hi = std::max(total.hi, c.hi);
    } else {
      total.lo += c.lo;
      total.hi += c.hi;
    }
  }
  return total;
}

inline ObjectiveValue evaluate_objective(const Schedule& sched, const Instance& inst, bool snapped) {
  std::vector<std::string> unfinished;
  for (std::size_t j = 0; j < inst.jobs.size(); ++j)
    if (j >= sched.completions.size() || !sched.completions[j]) unfinished.push_back(inst.jobs[j].id);
  if (!unfinished.empty()) throw IncompleteSchedule(unfinished);
  std::vector<ObjectiveValue> costs;
  for (std::size_t j = 0; j < inst.jobs.size(); ++j) {
    const auto& rec = *sched.completions[j];
    costs.push_back(job_cost(inst.objective, inst.jobs[j].weight, snapped ? rec.snapped : rec.raw));
  }
  return combine_costs(inst.objective, costs);
}

/// Strict comparison of two enclosures; overlapping enclosures raise.
inline bool definitely_less(const ObjectiveValue& a, const ObjectiveValue& b) {
  if (a.hi < b.lo) return true;
  if (a.lo >= b.hi) return false;
  if (a.exact() && b.exact()) return a.lo < b.lo;
  throw PrecisionError("objective values cannot be ordered at the configured precision");
}

// ---------------------------------------------------------------------------
// Feasibility

enum class ViolationKind { bad_segment, release, capacity, parallel, overwork, contiguity };

struct Violation {
  ViolationKind kind;
  std::string message;
  std::optional<long long> interval;
  std::optional<std::string> job;
};

inline const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::bad_segment: return "bad_segment";
    case ViolationKind::release: return "release";
    case ViolationKind::capacity: return "capacity";
    case ViolationKind::parallel: return "parallel";
    case ViolationKind::overwork: return "overwork";
    case ViolationKind::contiguity: return "contiguity";
  }
  return "?";
}

/// Returns the first violated constraint, or nullopt when the schedule is
/// feasible. Non-preemptive jobs may leave their machine idle between pieces
/// (reserved idle) but nothing else may run on it in between.
inline std::optional<Violation> check_schedule_feasibility(const Schedule& sched, const Instance& inst) {
  auto x_of = [&](const Rational& t) -> std::optional<long long> {
    if (t < 1) return std::nullopt;
    return interval_of(t, inst.eps);
  };
  for (const auto& seg : sched.segments) {
    if (seg.job >= inst.jobs.size() || seg.machine < 0 || seg.machine >= inst.env.m || !(seg.start < seg.end))
      return Violation{ViolationKind::bad_segment, "malformed segment", x_of(seg.start), std::nullopt};
    const Job& job = inst.jobs[seg.job];
    if (!inst.proc_time(seg.job, seg.machine))
      return Violation{ViolationKind::bad_segment, "job " + job.id + " placed on a machine it cannot use",
                       x_of(seg.start), job.id};
    if (seg.start < job.release)
      return Violation{ViolationKind::release, "job " + job.id + " processed before its release date",
                       x_of(seg.start), job.id};
  }

  std::vector<const Segment*> order;
  for (const auto& seg : sched.segments) order.push_back(&seg);

  std::sort(order.begin(), order.end(), [](const Segment* a, const Segment* b) {
    if (a->machine != b->machine) return a->machine < b->machine;
    return a->start < b->start;
  });
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (order[k]->machine == order[k - 1]->machine && order[k]->start < order[k - 1]->end)
      return Violation{ViolationKind::capacity,
                       "machine " + std::to_string(order[k]->machine) + " runs two jobs at once",
                       x_of(order[k]->start), inst.jobs[order[k]->job].id};
  }

  std::sort(order.begin(), order.end(), [](const Segment* a, const Segment* b) {
    if (a->job != b->job) return a->job < b->job;
    return a->start < b->start;
  });
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (order[k]->job == order[k - 1]->job && order[k]->start < order[k - 1]->end)
      return Violation{ViolationKind::parallel, "job " + inst.jobs[order[k]->job].id + " runs on two machines at once",
                       x_of(order[k]->start), inst.jobs[order[k]->job].id};
  }

  std::vector<Rational> frac(inst.jobs.size(), Rational(0));
  for (const auto& seg : sched.segments) {
    frac[seg.job] += processed_fraction(inst, seg.job, seg.machine, seg.end - seg.start);
    if (frac[seg.job] > 1)
      return Violation{ViolationKind::overwork, "job " + inst.jobs[seg.job].id + " receives more work than required",
                       x_of(seg.end), inst.jobs[seg.job].id};
  }

  if (!inst.preemptive) {
    for (std::size_t j = 0; j < inst.jobs.size(); ++j) {
      std::vector<const Segment*> mine;
      for (const auto& seg : sched.segments)
        if (seg.job == j) mine.push_back(&seg);
      if (mine.empty()) continue;
      int machine = mine.front()->machine;
      Rational first = mine.front()->start, last = mine.front()->end;
      for (const auto* seg : mine) {
        if (seg->machine != machine)
          return Violation{ViolationKind::contiguity, "job " + inst.jobs[j].id + " migrates between machines",
                           x_of(seg->start), inst.jobs[j].id};
        first = std::min(first, seg->start);
        last = std::max(last, seg->end);
      }
      for (const auto& seg : sched.segments)
        if (seg.job != j && seg.machine == machine && seg.start < last && seg.end > first)
          return Violation{ViolationKind::contiguity,
                           "job " + inst.jobs[j].id + " is interrupted by job " + inst.jobs[seg.job].id,
                           x_of(seg.start), inst.jobs[j].id};
    }
  }
  return std::nullopt;
}

}  // namespace crsched
