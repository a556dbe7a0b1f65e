#pragma once

// Algorithm maps: configurations, canonical keys, interval actions and the
// simulator that runs a map on a rounded instance.
//
// Model (identical machines):
//  * In interval x a job receives whole atoms (mu * p_j for large jobs, the
//    full p_j for small jobs, which complete in one interval and only when
//    untouched). At most |I_x| per job; preemptive: at most m |I_x| - V in
//    total, V being the safety-net volume of the interval.
//  * A job still unfinished in interval r_exp + s - 1 goes into the safety
//    net at the end of the host machine. Irrelevant jobs only run there.
//  * Non-preemptive: a started job keeps its machine until it completes
//    (it may receive zero atoms in an interval, leaving the machine idle).
//    A machine without such a job completes new jobs and starts at most one
//    carry-out, which runs until the end of the interval.

#include "crsched/config.hpp"
#include "crsched/core.hpp"
#include "crsched/oracle.hpp"
#include "crsched/simplify.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace crsched {

class MapIncomplete : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Configurations

enum class MachineStatus { free = 0, dedicated = 1, blocked = 2 };

struct ConfJob {
  std::size_t job = 0;  // index into the simulated instance
  long long r_exp = 0, p_exp = 0, w_exp = 0;
  int done = 0;         // atoms processed so far
  int total = 1;        // atoms of the job
  bool large = false;
  int machine = -1;     // non-preemptive: machine it is running on
  std::optional<long long> completed_x;
  std::vector<Rational> trace;  // amounts processed in intervals x-W .. x-1
};

struct MachineState {
  MachineStatus status = MachineStatus::free;
  int job = -1;  // index into Configuration::relevant when dedicated
  bool host = false;
};

/// The state an algorithm map sees at time R_x: relevant released jobs with
/// their progress and recent history, plus the capacity that the safety net
/// takes away in interval x.
struct Configuration {
  long long x = 0;
  bool preemptive = true;
  ObjectiveKind objective = ObjectiveKind::weighted_completion;
  int m = 1;
  std::vector<ConfJob> relevant;
  Rational net_volume;                 // V
  std::vector<MachineState> machines;  // non-preemptive only, by machine index

  bool has_unfinished() const {
    for (const auto& j : relevant)
      if (j.done < j.total) return true;
    return false;
  }
};

// ---------------------------------------------------------------------------
// Canonical keys

inline constexpr int kNotFinished = 1 << 20;

struct KeyJob {
  int r_off = 0, p_off = 0, w_off = 0;
  int done = 0, total = 1;
  bool dedicated = false;
  int c_off = kNotFinished;  // completion interval - x
  std::vector<int> trace;    // atoms per interval of the history window

  auto tie() const { return std::tie(r_off, p_off, w_off, done, total, dedicated, c_off, trace); }
  bool operator<(const KeyJob& o) const { return tie() < o.tie(); }
  bool operator==(const KeyJob& o) const { return tie() == o.tie(); }
};

struct KeyMachine {
  int status = 0;
  int job = -1;
  bool host = false;
  auto tie() const { return std::tie(status, job, host); }
  bool operator<(const KeyMachine& o) const { return tie() < o.tie(); }
  bool operator==(const KeyMachine& o) const { return tie() == o.tie(); }
};

/// Equivalence-class fingerprint of a configuration. Offsets are taken
/// relative to x (times) and to the heaviest relevant job (weights); jobs
/// and machines are sorted, so relabelings and machine permutations vanish.
struct CanonicalKey {
  bool preemptive = true;
  ObjectiveKind objective = ObjectiveKind::weighted_completion;
  int m = 1;
  std::vector<KeyJob> jobs;
  std::vector<KeyMachine> machines;
  Rational net_load;  // V / R_x
  std::string text;

  bool operator==(const CanonicalKey& o) const { return text == o.text; }
};

struct Canonicalized {
  CanonicalKey key;
  std::vector<std::size_t> job_order;  // canonical index -> index in Configuration::relevant
  std::vector<int> machine_order;      // digest position -> machine index
};

inline int history_window(const SchemeConfig& cfg, ObjectiveKind obj) {
  return obj == ObjectiveKind::makespan ? cfg.s : cfg.Gamma();
}

inline bool uses_history(ObjectiveKind obj) { return obj != ObjectiveKind::makespan; }

namespace detail {

inline Rational atom_size(const Epsilon& eps, const Rational& mu, long long p_exp, bool large) {
  Rational p = eps.power(p_exp);
  return large ? Rational(mu * p) : p;
}

inline std::string key_text(const CanonicalKey& k) {
  std::ostringstream os;
  os << (k.preemptive ? "P" : "N") << static_cast<int>(k.objective) << "|m" << k.m << "|J";
  for (const auto& j : k.jobs) {
    os << "(" << j.r_off << "," << j.p_off;
    if (uses_history(k.objective)) os << ",w" << j.w_off;
    os << "," << j.done << "/" << j.total;
    if (j.dedicated) os << ",D";
    if (j.c_off != kNotFinished) os << ",c" << j.c_off;
    if (!j.trace.empty()) {
      os << ",t";
      for (int a : j.trace) os << a;
    }
    os << ")";
  }
  if (!k.preemptive) {
    os << "|M";
    for (const auto& mm : k.machines) os << "(" << "FDB"[mm.status] << mm.job << (mm.host ? "h" : "") << ")";
  }
  if (k.net_load != 0) os << "|V" << to_string(k.net_load);
  return os.str();
}

}  // namespace detail

inline Canonicalized canonicalize_configuration(const Configuration& conf, const SchemeConfig& cfg) {
  Canonicalized out;
  CanonicalKey& key = out.key;
  key.preemptive = conf.preemptive;
  key.objective = conf.objective;
  key.m = conf.m;
  const Epsilon& eps = cfg.eps;
  const bool history = uses_history(conf.objective);
  long long wmax = 0;
  for (std::size_t i = 0; i < conf.relevant.size(); ++i)
    wmax = i == 0 ? conf.relevant[i].w_exp : std::max(wmax, conf.relevant[i].w_exp);

  std::vector<KeyJob> raw;
  for (const auto& j : conf.relevant) {
    KeyJob kj;
    kj.r_off = static_cast<int>(j.r_exp - conf.x);
    kj.p_off = static_cast<int>(j.p_exp - conf.x);
    kj.w_off = history ? static_cast<int>(j.w_exp - wmax) : 0;
    kj.done = j.done;
    kj.total = j.total;
    kj.dedicated = !conf.preemptive && j.machine >= 0 && j.done < j.total;
    if (j.completed_x) kj.c_off = static_cast<int>(*j.completed_x - conf.x);
    if (history) {
      Rational atom = detail::atom_size(eps, cfg.mu, j.p_exp, j.large);
      for (const auto& a : j.trace) kj.trace.push_back(static_cast<int>(to_ll(numerator_of(a / atom))));
    }
    raw.push_back(std::move(kj));
  }
  out.job_order.resize(raw.size());
  std::iota(out.job_order.begin(), out.job_order.end(), 0);
  std::stable_sort(out.job_order.begin(), out.job_order.end(),
                   [&](std::size_t a, std::size_t b) { return raw[a] < raw[b]; });
  std::vector<int> position(raw.size());
  for (std::size_t c = 0; c < out.job_order.size(); ++c) {
    key.jobs.push_back(raw[out.job_order[c]]);
    position[out.job_order[c]] = static_cast<int>(c);
  }

  if (!conf.preemptive) {
    std::vector<std::pair<KeyMachine, int>> ms;
    for (std::size_t i = 0; i < conf.machines.size(); ++i) {
      const auto& mstate = conf.machines[i];
      KeyMachine km{static_cast<int>(mstate.status), mstate.job >= 0 ? position[mstate.job] : -1, mstate.host};
      ms.emplace_back(km, static_cast<int>(i));
    }
    std::stable_sort(ms.begin(), ms.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [km, i] : ms) {
      key.machines.push_back(km);
      out.machine_order.push_back(i);
    }
  }
  key.net_load = conf.net_volume / eps.power(conf.x);
  key.text = detail::key_text(key);
  return out;
}

// ---------------------------------------------------------------------------
// Actions

/// One interval's decision, in canonical job order. Non-preemptive actions
/// also carry the machine plans (by digest position) that realize them.
struct ActionPlan {
  std::vector<int> atoms;
  std::vector<MachinePlan> plans;
};

inline std::string action_text(const std::vector<int>& atoms) {
  std::string t = "[";
  for (std::size_t i = 0; i < atoms.size(); ++i) t += (i ? "," : "") + std::to_string(atoms[i]);
  return t + "]";
}

/// Scaled view of a key (R_x = 1) used to enumerate and evaluate actions.
struct KeyView {
  const CanonicalKey* key;
  Rational len;                 // |I_x| / R_x = eps
  std::vector<Rational> p;      // scaled processing times
  std::vector<Rational> atom;   // scaled atom sizes
  std::vector<bool> large;
  std::vector<bool> net_due;    // unfinished and in its safety-net interval
  std::vector<bool> actionable; // released, unfinished, not netted
  std::vector<int> group;       // identical descriptors share a group

  KeyView(const CanonicalKey& k, const SchemeConfig& cfg) : key(&k) {
    const Epsilon& eps = cfg.eps;
    len = eps.value();
    const std::size_t n = k.jobs.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& j = k.jobs[i];
      Rational pj = eps.power(j.p_off);
      bool lg = j.total > 1 || (pj >= pow(eps.value(), 3) * eps.power(j.r_off));
      p.push_back(pj);
      large.push_back(lg);
      atom.push_back(lg ? Rational(cfg.mu * pj) : pj);
      bool unfinished = j.done < j.total;
      bool due = unfinished && j.r_off + cfg.s - 1 == 0;
      net_due.push_back(due);
      bool act = unfinished && j.r_off <= 0;
      if (due && !(j.dedicated && !k.preemptive)) act = false;
      actionable.push_back(act);
      group.push_back(i > 0 && k.jobs[i - 1] == j ? group.back() : static_cast<int>(i));
    }
  }

  Rational remaining(std::size_t i) const { return (key->jobs[i].total - key->jobs[i].done) * atom[i]; }
};

namespace detail {

/// Within each group of identical jobs atoms must be non-increasing.
inline bool canonical_atoms(const KeyView& v, const std::vector<int>& atoms) {
  for (std::size_t i = 1; i < atoms.size(); ++i)
    if (v.group[i] == v.group[i - 1] && atoms[i] > atoms[i - 1]) return false;
  return true;
}

inline void enumerate_preemptive(const KeyView& v, const std::function<void(const ActionPlan&)>& emit) {
  const auto& k = *v.key;
  const std::size_t n = k.jobs.size();
  const Rational cap = k.m * v.len - k.net_load;
  ActionPlan plan;
  plan.atoms.assign(n, 0);
  std::function<void(std::size_t, Rational)> rec = [&](std::size_t i, Rational used) {
    if (i == n) {
      if (canonical_atoms(v, plan.atoms)) emit(plan);
      return;
    }
    rec(i + 1, used);
    if (!v.actionable[i]) return;
    const int rem = k.jobs[i].total - k.jobs[i].done;
    if (!v.large[i] && k.jobs[i].done > 0) return;
    for (int a = 1; a <= rem; ++a) {
      Rational amt = a * v.atom[i];
      if (amt > v.len || used + amt > cap) break;
      plan.atoms[i] = a;
      rec(i + 1, used + amt);
    }
    plan.atoms[i] = 0;
  };
  rec(0, Rational(0));
}

inline void enumerate_nonpreemptive(const KeyView& v, const std::function<void(const ActionPlan&)>& emit) {
  const auto& k = *v.key;
  const std::size_t n = k.jobs.size();
  ActionPlan plan;
  plan.atoms.assign(n, 0);
  plan.plans.assign(k.machines.size(), MachinePlan{});
  std::vector<char> taken(n, 0);
  for (const auto& mm : k.machines)
    if (mm.job >= 0) taken[mm.job] = 1;

  std::function<void(std::size_t)> slot;
  auto fill = [&](std::size_t s, Rational cap, bool allow_carry) {
    MachinePlan& mp = plan.plans[s];
    std::vector<int> cand;
    for (std::size_t i = 0; i < n; ++i)
      if (!taken[i] && v.actionable[i] && k.jobs[i].done == 0) cand.push_back(static_cast<int>(i));
    std::function<void(std::size_t, Rational)> pick = [&](std::size_t c, Rational left) {
      if (c == cand.size()) {
        slot(s + 1);
        if (!allow_carry) return;
        for (int i : cand) {
          if (taken[i] || !v.large[i]) continue;
          for (int a = 1; a < k.jobs[i].total; ++a) {
            if (a * v.atom[i] > left) break;
            taken[i] = 1;
            mp.carry_out = i;
            mp.carry_out_atoms = a;
            plan.atoms[i] = a;
            slot(s + 1);
            plan.atoms[i] = 0;
            mp.carry_out = -1;
            mp.carry_out_atoms = 0;
            taken[i] = 0;
          }
        }
        return;
      }
      pick(c + 1, left);
      int i = cand[c];
      if (!taken[i] && v.p[i] <= left) {
        taken[i] = 1;
        mp.completes.push_back(i);
        plan.atoms[i] = k.jobs[i].total;
        pick(c + 1, left - v.p[i]);
        plan.atoms[i] = 0;
        mp.completes.pop_back();
        taken[i] = 0;
      }
    };
    pick(0, cap);
  };

  slot = [&](std::size_t s) {
    if (s == k.machines.size()) {
      if (canonical_atoms(v, plan.atoms)) emit(plan);
      return;
    }
    const KeyMachine& mm = k.machines[s];
    MachinePlan& mp = plan.plans[s];
    mp = MachinePlan{};
    const Rational reserve = mm.host ? k.net_load : Rational(0);
    if (mm.status == static_cast<int>(MachineStatus::blocked)) {
      slot(s + 1);
      return;
    }
    if (mm.status == static_cast<int>(MachineStatus::free)) {
      if (reserve > v.len) return;
      fill(s, v.len - reserve, !mm.host);
      return;
    }
    const int d = mm.job;
    mp.dedicated = d;
    const int rem = k.jobs[d].total - k.jobs[d].done;
    const bool forced = mm.host || v.net_due[d];
    for (int a = forced ? rem : 0; a <= rem; ++a) {
      Rational amt = a * v.atom[d];
      if (amt > v.len) break;
      mp.dedicated = d;
      mp.dedicated_atoms = a;
      plan.atoms[d] = a;
      if (a == rem) {
        if (amt + reserve <= v.len) fill(s, v.len - amt - reserve, !mm.host);
      } else {
        slot(s + 1);
      }
      mp = MachinePlan{};
      mp.dedicated = d;
    }
    plan.atoms[d] = 0;
  };
  slot(0);
}

}  // namespace detail

/// Every feasible canonical action of a key, sorted by atom vector.
inline std::vector<ActionPlan> enumerate_actions(const CanonicalKey& key, const SchemeConfig& cfg) {
  KeyView v(key, cfg);
  std::map<std::vector<int>, ActionPlan> seen;
  auto emit = [&](const ActionPlan& p) { seen.emplace(p.atoms, p); };
  if (key.preemptive)
    detail::enumerate_preemptive(v, emit);
  else
    detail::enumerate_nonpreemptive(v, emit);
  std::vector<ActionPlan> out;
  for (auto& [a, p] : seen) out.push_back(std::move(p));
  return out;
}

/// Caches enumerate_actions by key text.
class ActionCache {
public:
  explicit ActionCache(SchemeConfig cfg) : cfg_(std::move(cfg)) {}
  const std::vector<ActionPlan>& actions(const CanonicalKey& key) {
    auto it = cache_.find(key.text);
    if (it == cache_.end()) it = cache_.emplace(key.text, enumerate_actions(key, cfg_)).first;
    return it->second;
  }
  const ActionPlan* find(const CanonicalKey& key, const std::vector<int>& atoms) {
    for (const auto& p : actions(key))
      if (p.atoms == atoms) return &p;
    return nullptr;
  }

private:
  SchemeConfig cfg_;
  std::map<std::string, std::vector<ActionPlan>> cache_;
};

}  // namespace crsched

#include "crsched/simulator.hpp"
