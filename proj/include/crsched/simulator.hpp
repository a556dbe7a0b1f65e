#pragma once

// Interval-by-interval simulation of an algorithm map. Included from
// algmap.hpp.

#include "crsched/algmap.hpp"

namespace crsched {

/// Decides an action for every key. Keys with a single feasible action need
/// no entry; other keys are looked up in the table, then in the rule.
struct AlgorithmMap {
  using Rule = std::function<std::vector<int>(const CanonicalKey&, const std::vector<ActionPlan>&)>;

  std::string name;
  std::map<std::string, std::vector<int>> table;
  Rule rule;

  const ActionPlan& choose(const CanonicalKey& key, const std::vector<ActionPlan>& actions) const {
    if (actions.empty()) throw std::logic_error("no feasible action at key " + key.text);
    if (actions.size() == 1) return actions.front();
    std::optional<std::vector<int>> atoms;
    if (auto it = table.find(key.text); it != table.end())
      atoms = it->second;
    else if (rule)
      atoms = rule(key, actions);
    if (!atoms) throw MapIncomplete("map incomplete at key " + key.text);
    for (const auto& a : actions)
      if (a.atoms == *atoms) return a;
    throw MapIncomplete("map " + name + " chooses infeasible action " + action_text(*atoms) + " at key " + key.text);
  }
};

/// A configuration together with its canonical form.
struct StepView {
  Configuration conf;
  Canonicalized canon;
  const CanonicalKey& key() const { return canon.key; }
};

struct SimJob {
  long long r_exp = 0, p_exp = 0, w_exp = 0;
  GridJob g;
  int done = 0;
  int machine = -1;
  std::vector<Rational> hist;  // amount processed per interval since r_exp
  std::optional<long long> completed_x;

  bool finished() const { return done == g.atoms; }
  Rational remaining() const { return (g.atoms - done) * g.atom; }
};

namespace detail {

inline long long exact_exponent(const Rational& v, const Epsilon& eps, const std::string& what) {
  auto e = exact_log(v, eps.base());
  if (!e) throw DomainError(what + " " + to_string(v) + " is not an integer power of 1+eps");
  return *e;
}

}  // namespace detail

class Simulator {
public:
  Simulator(const Instance& shape, SchemeConfig cfg, bool record = true)
      : cfg_(std::move(cfg)), record_(record) {
    if (shape.env.kind != MachineKind::identical)
      throw DomainError("algorithm maps are defined for identical machines");
    inst_.eps = cfg_.eps;
    inst_.env = shape.env;
    inst_.preemptive = shape.preemptive;
    inst_.objective = shape.objective;
  }

  long long x() const { return x_; }
  void set_start(long long x) { x_ = x; }
  const Instance& instance() const { return inst_; }
  const std::vector<SimJob>& jobs() const { return jobs_; }
  const std::vector<bool>& irrelevant() const { return irrelevant_; }
  const std::vector<NetWindow>& nets() const { return nets_; }
  const SchemeConfig& config() const { return cfg_; }
  int machines() const { return inst_.env.m; }

  bool all_finished() const {
    for (const auto& j : jobs_)
      if (!j.finished()) return false;
    return true;
  }

  /// Adds the jobs released at R_x and updates relevance for interval x.
  void begin_interval(const std::vector<Job>& releases) {
    const Epsilon& eps = cfg_.eps;
    for (const auto& job : releases) {
      if (job.release != eps.power(x_))
        throw DomainError("job " + job.id + " is not released at R_" + std::to_string(x_));
      if (job.proc.size() != 1 || !job.proc[0]) throw DomainError("job " + job.id + " needs one processing time");
      SimJob sj;
      sj.r_exp = x_;
      sj.p_exp = detail::exact_exponent(job.p(), eps, "processing time");
      sj.w_exp = detail::exact_exponent(job.weight, eps, "weight");
      sj.g = grid_job(job, eps, cfg_.mu);
      inst_.jobs.push_back(job);
      jobs_.push_back(std::move(sj));
      rel_.push_back({x_, job.weight});
    }
    relevance_step(rel_, irrelevant_, x_, cfg_, inst_.objective);
  }

  /// The configuration at R_x. Throws SafetyNetInfeasible when the nets due
  /// in interval x do not fit.
  StepView view() const {
    const Epsilon& eps = cfg_.eps;
    const Rational len = eps.interval_length(x_);
    Configuration c;
    c.x = x_;
    c.preemptive = inst_.preemptive;
    c.objective = inst_.objective.kind;
    c.m = inst_.env.m;
    const int W = history_window(cfg_, c.objective);
    std::vector<int> conf_index(jobs_.size(), -1);
    for (std::size_t j = 0; j < jobs_.size(); ++j) {
      if (irrelevant_[j]) continue;
      const SimJob& sj = jobs_[j];
      ConfJob cj;
      cj.job = j;
      cj.r_exp = sj.r_exp;
      cj.p_exp = sj.p_exp;
      cj.w_exp = sj.w_exp;
      cj.done = sj.done;
      cj.total = sj.g.atoms;
      cj.large = sj.g.large;
      cj.machine = sj.finished() ? -1 : sj.machine;
      cj.completed_x = sj.completed_x;
      for (long long y = x_ - W; y < x_; ++y) {
        long long k = y - sj.r_exp;
        cj.trace.push_back(k >= 0 && k < static_cast<long long>(sj.hist.size()) ? sj.hist[k] : Rational(0));
      }
      conf_index[j] = static_cast<int>(c.relevant.size());
      c.relevant.push_back(std::move(cj));
    }

    for (std::size_t j = 0; j < jobs_.size(); ++j) {
      const SimJob& sj = jobs_[j];
      if (!net_due(sj)) continue;
      if (sj.machine >= 0 && !inst_.preemptive) {
        if (sj.remaining() > len)
          throw SafetyNetInfeasible("job " + inst_.jobs[j].id + " cannot finish on its machine in interval " +
                                        std::to_string(x_) + ": increase s",
                                    cfg_.s + 1);
        continue;
      }
      c.net_volume += sj.remaining();
    }
    if (c.net_volume > 0 && c.net_volume > net_capacity(x_, eps))
      throw SafetyNetInfeasible("safety net infeasible in interval " + std::to_string(x_) + ": increase s",
                                cfg_.s + 1);

    if (!inst_.preemptive) {
      c.machines.assign(c.m, MachineState{});
      std::vector<int> holder(c.m, -1);
      for (std::size_t j = 0; j < jobs_.size(); ++j) {
        const SimJob& sj = jobs_[j];
        if (sj.machine < 0 || sj.finished()) continue;
        holder[sj.machine] = static_cast<int>(j);
        auto& ms = c.machines[sj.machine];
        if (irrelevant_[j]) {
          ms.status = MachineStatus::blocked;
        } else {
          ms.status = MachineStatus::dedicated;
          ms.job = conf_index[j];
        }
      }
      if (c.net_volume > 0) {
        int host = -1;
        for (int i = 0; i < c.m && host < 0; ++i)
          if (holder[i] < 0) host = i;
        if (host < 0) {
          for (int i = 0; i < c.m; ++i)
            if (host < 0 || jobs_[holder[i]].remaining() < jobs_[holder[host]].remaining()) host = i;
          if (jobs_[holder[host]].remaining() + c.net_volume > len)
            throw SafetyNetInfeasible("no machine can host the safety net of interval " + std::to_string(x_),
                                      cfg_.s + 1);
        }
        c.machines[host].host = true;
      }
    }
    return {c, canonicalize_configuration(c, cfg_)};
  }

  /// Realizes `plan` (canonical, for `view`) in interval x and moves to x+1.
  void apply(const StepView& v, const ActionPlan& plan) {
    const Epsilon& eps = cfg_.eps;
    const Rational start = eps.power(x_), end = eps.power(x_ + 1), len = eps.interval_length(x_);
    const int m = inst_.env.m;
    auto sim_job = [&](int canonical) { return v.conf.relevant[v.canon.job_order[canonical]].job; };

    std::vector<Rational> amount(jobs_.size(), Rational(0));
    std::vector<int> atoms(jobs_.size(), 0);
    IntervalRecord rec;
    rec.x = x_;
    auto put = [&](int machine, std::size_t j, const Rational& a, const Rational& b) {
      if (a == b) return;
      if (record_) segments_.push_back({machine, j, a, b});
      amount[j] += b - a;
    };

    // net jobs, stacked at the end of the host machine
    std::vector<std::size_t> netted;
    Rational V;
    for (std::size_t j = 0; j < jobs_.size(); ++j)
      if (net_due(jobs_[j]) && (inst_.preemptive || jobs_[j].machine < 0)) {
        netted.push_back(j);
        V += jobs_[j].remaining();
      }
    int host = inst_.preemptive ? m - 1 : -1;
    if (!inst_.preemptive)
      for (std::size_t s = 0; s < v.conf.machines.size(); ++s)
        if (v.conf.machines[s].host) host = static_cast<int>(s);
    if (!netted.empty()) {
      Rational t = end - V;
      nets_.push_back({x_ - cfg_.s + 1, x_, t, end});
      for (auto j : netted) {
        Rational r = jobs_[j].remaining();
        put(host, j, t, t + r);
        atoms[j] += jobs_[j].g.atoms - jobs_[j].done;
        t += r;
      }
    }

    if (inst_.preemptive) {
      std::vector<std::size_t> order;
      for (std::size_t c = 0; c < plan.atoms.size(); ++c)
        if (plan.atoms[c] > 0) order.push_back(sim_job(static_cast<int>(c)));
      std::vector<int> give(jobs_.size(), 0);
      for (std::size_t c = 0; c < plan.atoms.size(); ++c)
        if (plan.atoms[c] > 0) give[sim_job(static_cast<int>(c))] = plan.atoms[c];
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        bool fa = jobs_[a].done + give[a] == jobs_[a].g.atoms, fb = jobs_[b].done + give[b] == jobs_[b].g.atoms;
        return fa && !fb;
      });
      int machine = 0;
      Rational t = start;
      auto cap_end = [&](int i) { return i == m - 1 ? Rational(end - V) : end; };
      for (auto j : order) {
        Rational amt = give[j] * jobs_[j].g.atom;
        atoms[j] += give[j];
        while (amt > 0) {
          if (machine >= m) throw std::logic_error("action exceeds machine capacity");
          Rational piece = std::min(amt, Rational(cap_end(machine) - t));
          put(machine, j, t, t + piece);
          amt -= piece;
          t += piece;
          if (t == cap_end(machine)) {
            ++machine;
            t = start;
          }
        }
      }
    } else {
      for (std::size_t s = 0; s < plan.plans.size(); ++s) {
        const int machine = v.canon.machine_order[s];
        const MachinePlan& mp = plan.plans[s];
        Rational t = start;
        if (v.conf.machines[machine].status == MachineStatus::blocked) {
          std::size_t j = 0;
          while (jobs_[j].machine != machine || jobs_[j].finished()) ++j;
          const SimJob& sj = jobs_[j];
          int a = sj.g.atoms - sj.done;
          if (!v.conf.machines[machine].host && !net_due(sj))
            a = std::min(a, static_cast<int>(to_ll(floor_div(len / sj.g.atom))));
          put(machine, j, t, t + a * sj.g.atom);
          atoms[j] += a;
          continue;
        }
        if (mp.dedicated >= 0 && mp.dedicated_atoms > 0) {
          auto j = sim_job(mp.dedicated);
          Rational amt = mp.dedicated_atoms * jobs_[j].g.atom;
          put(machine, j, t, t + amt);
          atoms[j] += mp.dedicated_atoms;
          t += amt;
        }
        std::vector<std::size_t> comp;
        for (int c : mp.completes) comp.push_back(sim_job(c));
        std::sort(comp.begin(), comp.end(), [&](auto a, auto b) { return jobs_[a].g.p < jobs_[b].g.p; });
        for (auto j : comp) {
          put(machine, j, t, t + jobs_[j].g.p);
          atoms[j] += jobs_[j].g.atoms;
          jobs_[j].machine = machine;
          t += jobs_[j].g.p;
        }
        if (mp.carry_out >= 0) {
          auto j = sim_job(mp.carry_out);
          Rational amt = mp.carry_out_atoms * jobs_[j].g.atom;
          put(machine, j, end - amt, end);
          atoms[j] += mp.carry_out_atoms;
          jobs_[j].machine = machine;
        }
      }
    }

    for (std::size_t j = 0; j < jobs_.size(); ++j) {
      SimJob& sj = jobs_[j];
      if (sj.finished()) continue;
      if (atoms[j] > 0 && record_) rec.entries.push_back({sj.machine < 0 ? host : sj.machine, j, atoms[j], amount[j]});
      sj.hist.push_back(amount[j]);
      sj.done += atoms[j];
      if (sj.done > sj.g.atoms) throw std::logic_error("job " + inst_.jobs[j].id + " over-processed");
      if (sj.finished()) {
        sj.completed_x = x_;
        sj.machine = -1;
      }
    }
    if (record_) intervals_.push_back(std::move(rec));
    ++x_;
  }

  /// Segments, interval records and completions collected so far.
  Schedule schedule() const {
    Schedule s;
    s.segments = segments_;
    s.intervals = intervals_;
    if (record_) finalize_completions(s, inst_);
    return s;
  }

  /// Snapped value over all jobs (or over `subset` when given); every
  /// counted job must be finished.
  ObjectiveValue snapped_value(const std::vector<std::size_t>* subset = nullptr) const {
    std::vector<ObjectiveValue> costs;
    auto add = [&](std::size_t j) {
      if (!jobs_[j].completed_x) throw IncompleteSchedule({inst_.jobs[j].id});
      costs.push_back(job_cost(inst_.objective, inst_.jobs[j].weight, cfg_.eps.power(*jobs_[j].completed_x + 1)));
    };
    if (subset)
      for (auto j : *subset) add(j);
    else
      for (std::size_t j = 0; j < jobs_.size(); ++j) add(j);
    return combine_costs(inst_.objective, costs);
  }

private:
  bool net_due(const SimJob& sj) const { return !sj.finished() && sj.r_exp + cfg_.s - 1 == x_; }

  SchemeConfig cfg_;
  bool record_;
  Instance inst_;
  long long x_ = 0;
  std::vector<SimJob> jobs_;
  std::vector<RelevanceJob> rel_;
  std::vector<bool> irrelevant_;
  std::vector<NetWindow> nets_;
  std::vector<Segment> segments_;
  std::vector<IntervalRecord> intervals_;
};

struct SimulationStep {
  long long x = 0;
  std::string key;
  std::string action;
};

struct SimulationResult {
  Instance instance;
  Schedule schedule;
  std::vector<NetWindow> nets;
  std::vector<SimulationStep> steps;
  ObjectiveValue raw;
  ObjectiveValue snapped;
};

/// Runs `map` on a rounded instance on identical machines.
inline SimulationResult simulate(const AlgorithmMap& map, const Instance& inst, const SchemeConfig& cfg,
                                 ActionCache* cache = nullptr) {
  inst.validate();
  if (inst.eps.value() != cfg.eps.value()) throw DomainError("instance and scheme disagree on eps");
  ActionCache local(cfg);
  ActionCache& actions = cache ? *cache : local;
  std::map<long long, std::vector<Job>> by_date;
  for (const auto& job : inst.jobs) {
    auto rx = detail::exact_exponent(job.release, cfg.eps, "release date");
    if (rx < 0) throw DomainError("release dates must be at least 1");
    by_date[rx].push_back(job);
  }
  Simulator sim(inst, cfg);
  SimulationResult out;
  if (by_date.empty()) {
    out.instance = sim.instance();
    return out;
  }
  sim.set_start(by_date.begin()->first);
  while (!by_date.empty() || !sim.all_finished()) {
    std::vector<Job> rel;
    if (!by_date.empty() && by_date.begin()->first == sim.x()) {
      rel = std::move(by_date.begin()->second);
      by_date.erase(by_date.begin());
    }
    sim.begin_interval(rel);
    StepView v = sim.view();
    const ActionPlan& plan = map.choose(v.key(), actions.actions(v.key()));
    out.steps.push_back({sim.x(), v.key().text, action_text(plan.atoms)});
    sim.apply(v, plan);
  }
  // report in the caller's job order
  std::map<JobId, std::size_t> original;
  for (std::size_t j = 0; j < inst.jobs.size(); ++j) original[inst.jobs[j].id] = j;
  std::vector<std::size_t> to_original;
  for (const auto& job : sim.instance().jobs) to_original.push_back(original.at(job.id));
  out.instance = inst;
  out.schedule = sim.schedule();
  for (auto& seg : out.schedule.segments) seg.job = to_original[seg.job];
  for (auto& rec : out.schedule.intervals)
    for (auto& e : rec.entries) e.job = to_original[e.job];
  finalize_completions(out.schedule, out.instance);
  out.nets = sim.nets();
  out.raw = evaluate_objective(out.schedule, out.instance, false);
  out.snapped = sim.snapped_value();
  return out;
}

}  // namespace crsched

#include "crsched/builtin_maps.hpp"
