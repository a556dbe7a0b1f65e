#pragma once

// Finite universes of simplified instances, reachable configuration classes,
// map evaluation and the search for the best map.

#include "crsched/algmap.hpp"
#include "crsched/oracle.hpp"

#include <atomic>
#include <mutex>
#include <set>
#include <thread>

namespace crsched {

class SearchRefusal : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Universes

/// A job released at R_x: p = R_{p_exp} (or R_{x + p_exp} when relative),
/// w = R_{w_exp}.
struct JobTemplate {
  long long p_exp = 0;
  long long w_exp = 0;
  bool relative = false;

  auto tie() const { return std::tie(p_exp, w_exp, relative); }
  bool operator<(const JobTemplate& o) const { return tie() < o.tie(); }
  bool operator==(const JobTemplate& o) const { return tie() == o.tie(); }
};

using ReleaseOption = std::vector<JobTemplate>;

/// The adversary picks one option per date up to X_max; an empty option
/// means no release, and picking it from some date on means stopping.
/// Catalogs repeat cyclically when fewer than X_max + 1 are given.
struct Universe {
  std::string name;
  Instance shape;  // eps, machines, preemption, objective; no jobs
  long long X_max = 0;
  std::vector<std::vector<ReleaseOption>> catalogs;

  const std::vector<ReleaseOption>& catalog(long long x) const {
    static const std::vector<ReleaseOption> none{ReleaseOption{}};
    if (x > X_max || catalogs.empty()) return none;
    return catalogs[static_cast<std::size_t>(x) % catalogs.size()];
  }

  std::vector<Job> instantiate(const ReleaseOption& opt, long long x, const std::string& tag) const {
    std::vector<Job> jobs;
    const Epsilon& eps = shape.eps;
    for (std::size_t k = 0; k < opt.size(); ++k) {
      const auto& t = opt[k];
      Job j;
      j.id = tag + "x" + std::to_string(x) + "_" + std::to_string(k);
      j.release = eps.power(x);
      j.proc = {eps.power(t.relative ? x + t.p_exp : t.p_exp)};
      j.weight = eps.power(t.w_exp);
      jobs.push_back(std::move(j));
    }
    return jobs;
  }

  /// Number of release sequences over dates 0..X_max.
  Integer instance_count() const {
    Integer n = 1;
    for (long long x = 0; x <= X_max; ++x) n *= catalog(x).size();
    return n;
  }
};

struct UniverseSpec {
  std::vector<long long> p_exps;      // processing-time exponents
  std::vector<long long> w_exps{0};   // weight exponents
  int Delta = 1;
  long long X_max = 0;
  bool relative = false;              // p exponents relative to the release date
};

/// Catalogs of all multisets of at most Delta jobs per date whose sizes lie
/// in [eps/(2d) |I_x|, R_x / eps].
inline Universe build_universe(const Instance& shape, const SchemeConfig& cfg, const UniverseSpec& spec,
                               std::string name = "universe") {
  if (spec.Delta < 0) throw DomainError("Delta must be non-negative");
  if (shape.env.kind != MachineKind::identical) throw DomainError("universes use identical machines");
  Universe u;
  u.name = std::move(name);
  u.shape = shape;
  u.shape.jobs.clear();
  u.shape.eps = cfg.eps;
  u.X_max = spec.X_max;
  const Epsilon& eps = cfg.eps;
  for (long long x = 0; x <= spec.X_max; ++x) {
    const Rational lo = eps.value() / (2 * cfg.d) * eps.interval_length(x), hi = eps.power(x) / eps.value();
    std::vector<JobTemplate> kinds;
    for (auto pe : spec.p_exps) {
      Rational p = eps.power(spec.relative ? x + pe : pe);
      if (p < lo || p > hi) continue;
      for (auto we : spec.w_exps) kinds.push_back({pe, we, spec.relative});
    }
    std::sort(kinds.begin(), kinds.end());
    kinds.erase(std::unique(kinds.begin(), kinds.end()), kinds.end());
    std::vector<ReleaseOption> options;
    ReleaseOption cur;
    std::function<void(std::size_t)> rec = [&](std::size_t from) {
      options.push_back(cur);
      if (options.size() > cfg.universe_cap)
        throw SearchRefusal("catalog at date " + std::to_string(x) + " exceeds universe_cap " +
                            std::to_string(cfg.universe_cap));
      if (static_cast<int>(cur.size()) == spec.Delta) return;
      for (std::size_t k = from; k < kinds.size(); ++k) {
        cur.push_back(kinds[k]);
        rec(k);
        cur.pop_back();
      }
    };
    rec(0);
    std::stable_sort(options.begin(), options.end(),
                     [](const auto& a, const auto& b) { return a.size() < b.size(); });
    u.catalogs.push_back(std::move(options));
  }
  if (u.instance_count() > cfg.universe_cap)
    throw SearchRefusal("universe has " + u.instance_count().str() + " instances, over universe_cap " +
                        std::to_string(cfg.universe_cap));
  return u;
}

// ---------------------------------------------------------------------------
// Level-synchronous exploration

enum class OptPolicy { grid, refined };

inline const char* to_string(OptPolicy p) { return p == OptPolicy::grid ? "grid" : "refined"; }

struct SearchNode {
  Simulator sim;
  bool busy = false;    // some job was unfinished at the previous date
  std::string witness;  // release choices so far, e.g. "0:1 1:0"
};

/// A node after the releases of its date, with the configuration it shows.
struct PostNode {
  SearchNode node;
  StepView view;
  bool end = false;  // end-configuration: everything done now, not one date earlier
};

namespace detail {

inline std::string irrelevant_digest(const Simulator& sim) {
  std::vector<std::string> parts;
  const auto& jobs = sim.jobs();
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (!sim.irrelevant()[j] || jobs[j].finished()) continue;
    parts.push_back(std::to_string(jobs[j].r_exp - sim.x()) + "," + std::to_string(jobs[j].p_exp - sim.x()) + "," +
                    std::to_string(jobs[j].done) + (jobs[j].machine >= 0 ? "D" : ""));
  }
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (auto& p : parts) out += "(" + p + ")";
  return out;
}

/// Adds the releases of date x to every node. Nodes with equal extended keys
/// behave identically from here on, so only the first one is kept. With
/// `drop_infeasible`, nodes whose safety nets overflow are skipped.
inline std::vector<PostNode> release_step(const std::vector<SearchNode>& nodes, const Universe& u, long long x,
                                          const SchemeConfig& cfg, bool drop_infeasible = false) {
  std::vector<PostNode> out;
  std::set<std::string> seen;
  const auto& options = u.catalog(x);
  for (const auto& n : nodes) {
    for (std::size_t o = 0; o < options.size(); ++o) {
      SearchNode next = n;
      next.sim.begin_interval(u.instantiate(options[o], x, "j"));
      std::optional<StepView> sv;
      try {
        sv.emplace(next.sim.view());
      } catch (const SafetyNetInfeasible&) {
        if (!drop_infeasible) throw;
        continue;
      }
      StepView& v = *sv;
      bool end = options[o].empty() && n.busy && next.sim.all_finished();
      std::string ext = v.key().text + "#" + irrelevant_digest(next.sim) + (n.busy ? "#b" : "#i");
      if (!seen.insert(ext).second) continue;
      if (out.size() >= cfg.class_cap)
        throw SearchRefusal("more than class_cap = " + std::to_string(cfg.class_cap) + " states at level " +
                            std::to_string(x));
      next.witness += (next.witness.empty() ? "" : " ") + std::to_string(x) + ":" + std::to_string(o);
      next.busy = !next.sim.all_finished();
      out.push_back({std::move(next), std::move(v), end});
    }
  }
  return out;
}

/// True when nothing can happen after this node any more.
inline bool finished_for_good(const SearchNode& n, const Universe& u) {
  return n.sim.x() > u.X_max && n.sim.all_finished();
}

inline SearchNode root_node(const Universe& u, const SchemeConfig& cfg) {
  SearchNode root{Simulator(u.shape, cfg, false), false, ""};
  root.sim.set_start(0);
  return root;
}

}  // namespace detail

struct EndHit {
  std::string key;
  long long x = 0;
  std::string witness;
};

struct ReachableSets {
  std::vector<std::set<std::string>> levels;  // keys seen at R_x, x = 0, 1, ...
  std::map<std::string, CanonicalKey> registry;
  std::vector<EndHit> ends;
  bool truncated = false;  // stopped at E_cap with states left
};

/// Breadth-first exploration. With a map each state follows the map's
/// action; without one every action is branched and branches that overflow
/// a safety net are dropped.
inline ReachableSets reachable_classes(const Universe& u, const SchemeConfig& cfg, const AlgorithmMap* map,
                                       ActionCache& cache) {
  ReachableSets rs;
  std::vector<SearchNode> nodes{detail::root_node(u, cfg)};
  for (long long x = 0; !nodes.empty(); ++x) {
    if (x > cfg.E_cap) {
      rs.truncated = true;
      break;
    }
    auto post = detail::release_step(nodes, u, x, cfg, map == nullptr);
    rs.levels.emplace_back();
    std::vector<SearchNode> next;
    for (auto& p : post) {
      const auto& key = p.view.key();
      rs.levels.back().insert(key.text);
      rs.registry.emplace(key.text, key);
      if (p.end) rs.ends.push_back({key.text, x, p.node.witness});
      if (detail::finished_for_good(p.node, u)) continue;
      const auto& actions = cache.actions(key);
      if (map) {
        SearchNode n = p.node;
        n.sim.apply(p.view, map->choose(key, actions));
        next.push_back(std::move(n));
      } else {
        for (const auto& a : actions) {
          SearchNode n = p.node;
          try {
            n.sim.apply(p.view, a);
          } catch (const SafetyNetInfeasible&) {
            continue;
          }
          next.push_back(std::move(n));
        }
      }
    }
    nodes = std::move(next);
  }
  return rs;
}

struct CycleInfo {
  long long first = 0;   // x-bar
  long long second = 0;  // x-bar'
  long long period = 0;
};

/// First pair of levels with equal key sets.
inline std::optional<CycleInfo> detect_cycle(const ReachableSets& rs) {
  for (std::size_t b = 1; b < rs.levels.size(); ++b)
    for (std::size_t a = 0; a < b; ++a)
      if (rs.levels[a] == rs.levels[b])
        return CycleInfo{static_cast<long long>(a), static_cast<long long>(b), static_cast<long long>(b - a)};
  return std::nullopt;
}

/// The levels repeat with the cycle's period from x-bar on, up to level
/// `last` (default: the last level explored).
inline bool cycle_holds(const ReachableSets& rs, const CycleInfo& c, long long last = -1) {
  const std::size_t end =
      last < 0 ? rs.levels.size() : std::min(rs.levels.size(), static_cast<std::size_t>(last) + 1);
  for (std::size_t k = 0; c.second + k < end; ++k)
    if (rs.levels[c.first + k] != rs.levels[c.second + k]) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Ratios of end-configurations

struct RelevantInstance {
  Instance instance;
  ObjectiveValue value;  // snapped value of the algorithm on these jobs
};

/// Rel(C) of an end-configuration key, shifted so that the earliest
/// relevant release is R_0, together with the algorithm's snapped value.
inline RelevantInstance relevant_instance(const CanonicalKey& key, const Instance& shape, const SchemeConfig& cfg) {
  RelevantInstance out;
  Instance& inst = out.instance;
  inst.eps = cfg.eps;
  inst.env = shape.env;
  inst.preemptive = shape.preemptive;
  inst.objective = shape.objective;
  if (key.jobs.empty()) throw DomainError("end-configuration without relevant jobs");
  int shift = key.jobs.front().r_off;
  for (const auto& j : key.jobs) shift = std::min(shift, j.r_off);
  const Epsilon& eps = cfg.eps;
  std::vector<ObjectiveValue> costs;
  for (std::size_t i = 0; i < key.jobs.size(); ++i) {
    const auto& kj = key.jobs[i];
    if (kj.c_off == kNotFinished) throw DomainError("end-configuration with an unfinished job");
    Job j;
    j.id = "c" + std::to_string(i);
    j.release = eps.power(kj.r_off - shift);
    j.proc = {eps.power(kj.p_off - shift)};
    j.weight = eps.power(kj.w_off);
    costs.push_back(job_cost(inst.objective, j.weight, eps.power(kj.c_off - shift + 1)));
    inst.jobs.push_back(std::move(j));
  }
  out.value = combine_costs(inst.objective, costs);
  return out;
}

struct EndRatio {
  std::string key;
  Rational value;
  Rational opt;
  Rational ratio;
  long long x = 0;
  std::string witness;
};

/// Computes r(C) for end-configuration keys, sharing an Opt cache.
class RatioTable {
public:
  RatioTable(const Instance& shape, SchemeConfig cfg, OptPolicy policy, OracleCache* cache = nullptr)
      : shape_(shape), cfg_(std::move(cfg)), policy_(policy), cache_(cache ? cache : &own_) {}

  OptPolicy policy() const { return policy_; }
  const SchemeConfig& config() const { return cfg_; }

  const EndRatio& ratio(const CanonicalKey& key) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (auto it = table_.find(key.text); it != table_.end()) return it->second;
    }
    EndRatio r = compute(key);
    std::lock_guard<std::mutex> lock(mu_);
    return table_.emplace(key.text, std::move(r)).first->second;
  }

  /// Fills the table for many keys with `threads` workers.
  void prefetch(const std::vector<CanonicalKey>& keys, unsigned threads) {
    std::vector<const CanonicalKey*> todo;
    for (const auto& k : keys)
      if (!table_.count(k.text)) todo.push_back(&k);
    if (threads <= 1 || todo.size() < 2) {
      for (auto* k : todo) ratio(*k);
      return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex fail_mu;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i; (i = next++) < todo.size();) {
          try {
            ratio(*todo[i]);
          } catch (...) {
            std::lock_guard<std::mutex> lock(fail_mu);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

private:
  EndRatio compute(const CanonicalKey& key) {
    auto rel = relevant_instance(key, shape_, cfg_);
    EndRatio r;
    r.key = key.text;
    r.value = rel.value.value();
    try {
      r.opt = cached_opt(rel.instance, cfg_, policy_ == OptPolicy::grid, *cache_);
    } catch (const OracleRefusal& e) {
      throw OracleRefusal(std::string(e.what()) + " (end-configuration " + key.text + ")");
    }
    if (r.opt <= 0) throw std::logic_error("non-positive optimum at " + key.text);
    r.ratio = r.value / r.opt;
    return r;
  }

  Instance shape_;
  SchemeConfig cfg_;
  OptPolicy policy_;
  OracleCache own_;
  OracleCache* cache_;
  std::mutex mu_;
  std::map<std::string, EndRatio> table_;
};

struct CompetitiveReport {
  std::string map_name;
  std::string universe;
  OptPolicy policy = OptPolicy::grid;
  Rational rho;
  EndRatio argmax;
  std::vector<EndRatio> ends;  // one per distinct end-configuration class
  std::size_t classes = 0;     // distinct keys reached
  bool exact = true;           // false for heuristic search results
  bool truncated = false;
  std::optional<CycleInfo> cycle;
  Rational certificate{1};     // composed simplification factor, if known
  std::string mode = "evaluate";
};

/// Product of the loss factors the simplification pipeline may certify for
/// instances of this shape: rounding, tiny-job packs, the small-volume cap
/// and, without preemption, part rescaling.
inline Rational worst_case_certificate(const Instance& shape, const SchemeConfig& cfg) {
  const Rational b = cfg.eps.base();
  Rational f = pow(b, 3) * pow(b, 2) * b;
  if (!shape.preemptive) f *= b;
  return f;
}

namespace detail {

inline CompetitiveReport make_report(const ReachableSets& rs, RatioTable& ratios, const std::string& map_name,
                                     const Universe& u, unsigned threads) {
  CompetitiveReport rep;
  rep.map_name = map_name;
  rep.universe = u.name;
  rep.policy = ratios.policy();
  rep.truncated = rs.truncated;
  rep.cycle = detect_cycle(rs);
  rep.certificate = worst_case_certificate(u.shape, ratios.config());
  for (const auto& lvl : rs.levels) rep.classes += lvl.size();
  std::map<std::string, const EndHit*> first;
  for (const auto& e : rs.ends) first.emplace(e.key, &e);
  if (first.empty()) throw SearchRefusal("no end-configurations");
  std::vector<CanonicalKey> keys;
  for (const auto& [k, hit] : first) keys.push_back(rs.registry.at(k));
  ratios.prefetch(keys, threads);
  for (const auto& [k, hit] : first) {
    EndRatio r = ratios.ratio(rs.registry.at(k));
    r.x = hit->x;
    r.witness = hit->witness;
    if (rep.ends.empty() || r.ratio > rep.rho) {
      rep.rho = r.ratio;
      rep.argmax = r;
    }
    rep.ends.push_back(std::move(r));
  }
  return rep;
}

}  // namespace detail

/// rho' of a map on a universe: the largest r(C) over reachable
/// end-configurations.
inline CompetitiveReport evaluate_map(const AlgorithmMap& map, const Universe& u, const SchemeConfig& cfg,
                                      OptPolicy policy = OptPolicy::grid, unsigned threads = 1,
                                      OracleCache* oracle_cache = nullptr) {
  ActionCache cache(cfg);
  auto rs = reachable_classes(u, cfg, &map, cache);
  RatioTable ratios(u.shape, cfg, policy, oracle_cache);
  return detail::make_report(rs, ratios, map.name, u, threads);
}

// ---------------------------------------------------------------------------
// Search for the best map

enum class SearchMode { exhaustive, branch_and_bound, heuristic };

inline const char* to_string(SearchMode m) {
  switch (m) {
    case SearchMode::exhaustive: return "exhaustive";
    case SearchMode::branch_and_bound: return "branch_and_bound";
    case SearchMode::heuristic: return "heuristic";
  }
  return "?";
}

struct SearchStats {
  std::size_t complete_maps = 0;  // leaves reached (maps fully evaluated)
  std::size_t pruned = 0;
  std::size_t decisions = 0;
  std::size_t infeasible = 0;     // partial maps dropped for overfull safety nets
};

struct SearchResult {
  AlgorithmMap map;
  CompetitiveReport report;
  SearchStats stats;
};

namespace detail {

class MapSearch {
public:
  MapSearch(const Universe& u, const SchemeConfig& cfg, OptPolicy policy, SearchMode mode, OracleCache* oc)
      : u_(u), cfg_(cfg), mode_(mode), actions_(cfg), ratios_(u.shape, cfg, policy, oc),
        guide_(builtin_map(u.shape.preemptive ? "wspt_pmtn" : "smith_list_nonpmtn", cfg)) {}

  SearchResult run() {
    std::map<std::string, std::vector<int>> assign;
    level({root_node(u_, cfg_)}, 0, Rational(0), false, assign);
    if (!best_) throw SearchRefusal("no end-configurations");
    SearchResult res;
    res.map.name = std::string("best_") + to_string(mode_);
    res.map.table = *best_;
    res.stats = stats_;
    return res;
  }

private:
  bool prune(const Rational& cur, bool any_end) const {
    return mode_ == SearchMode::branch_and_bound && best_ && any_end && cur >= best_rho_;
  }

  void level(const std::vector<SearchNode>& nodes, long long x, Rational cur, bool any_end,
             std::map<std::string, std::vector<int>>& assign) {
    if (nodes.empty()) {
      ++stats_.complete_maps;
      if (any_end && (!best_ || cur < best_rho_)) {
        best_rho_ = cur;
        best_ = assign;
      }
      return;
    }
    if (x > cfg_.E_cap) throw SearchRefusal("search exceeded E_cap = " + std::to_string(cfg_.E_cap));
    std::vector<PostNode> post;
    try {
      post = release_step(nodes, u_, x, cfg_);
    } catch (const SafetyNetInfeasible&) {
      ++stats_.infeasible;
      return;
    }
    for (const auto& p : post)
      if (p.end) {
        Rational r = ratios_.ratio(p.view.key()).ratio;
        if (!any_end || r > cur) cur = r;
        any_end = true;
      }
    if (prune(cur, any_end)) {
      ++stats_.pruned;
      return;
    }
    std::vector<const CanonicalKey*> open;
    std::set<std::string> listed;
    for (const auto& p : post) {
      if (finished_for_good(p.node, u_)) continue;
      const auto& key = p.view.key();
      if (assign.count(key.text) || actions_.actions(key).size() < 2) continue;
      if (listed.insert(key.text).second) open.push_back(&key);
    }
    decide(post, open, 0, x, cur, any_end, assign);
  }

  void decide(const std::vector<PostNode>& post, const std::vector<const CanonicalKey*>& open, std::size_t i,
              long long x, const Rational& cur, bool any_end, std::map<std::string, std::vector<int>>& assign) {
    if (i == open.size()) {
      std::vector<SearchNode> next;
      for (const auto& p : post) {
        if (finished_for_good(p.node, u_)) continue;
        const auto& key = p.view.key();
        const auto& actions = actions_.actions(key);
        const ActionPlan* plan = &actions.front();
        if (actions.size() > 1) plan = actions_.find(key, assign.at(key.text));
        SearchNode n = p.node;
        try {
          n.sim.apply(p.view, *plan);
        } catch (const SafetyNetInfeasible&) {
          ++stats_.infeasible;
          return;
        }
        next.push_back(std::move(n));
      }
      level(next, x + 1, cur, any_end, assign);
      return;
    }
    const auto& key = *open[i];
    // the greedy rule's choice first, so that a good incumbent appears early
    const auto& actions = actions_.actions(key);
    std::vector<const ActionPlan*> order;
    const ActionPlan* greedy = &guide_.choose(key, actions);
    order.push_back(greedy);
    for (const auto& a : actions)
      if (&a != greedy) order.push_back(&a);
    for (const ActionPlan* ap : order) {
      const ActionPlan& a = *ap;
      ++stats_.decisions;
      assign[key.text] = a.atoms;
      decide(post, open, i + 1, x, cur, any_end, assign);
      assign.erase(key.text);
      if (prune(cur, any_end)) return;
    }
  }

  const Universe& u_;
  SchemeConfig cfg_;
  SearchMode mode_;
  ActionCache actions_;
  RatioTable ratios_;
  AlgorithmMap guide_;
  SearchStats stats_;
  std::optional<std::map<std::string, std::vector<int>>> best_;
  Rational best_rho_;
};

}  // namespace detail

/// Greedy rollout search: keys are decided in order of first appearance;
/// each candidate action is scored by evaluating the map completed with
/// `fallback`, looking at most `lookahead` levels past the decision.
inline SearchResult heuristic_search(const Universe& u, const SchemeConfig& cfg, const AlgorithmMap& fallback,
                                     int lookahead, OptPolicy policy = OptPolicy::grid,
                                     OracleCache* oc = nullptr) {
  ActionCache cache(cfg);
  RatioTable ratios(u.shape, cfg, policy, oc);
  AlgorithmMap current;
  current.name = "heuristic";
  current.rule = [&](const CanonicalKey& k, const std::vector<ActionPlan>& acts) { return fallback.choose(k, acts).atoms; };

  // score of a map: worst r(C) among end-configurations up to `horizon`
  auto score = [&](const AlgorithmMap& map, long long horizon) {
    SchemeConfig c = cfg;
    c.E_cap = static_cast<int>(std::min<long long>(cfg.E_cap, horizon));
    auto rs = reachable_classes(u, c, &map, cache);
    std::optional<Rational> worst;
    for (const auto& e : rs.ends) {
      Rational r = ratios.ratio(rs.registry.at(e.key)).ratio;
      if (!worst || r > *worst) worst = r;
    }
    return worst.value_or(Rational(0));
  };

  SearchStats stats;
  std::set<std::string> decided;
  for (bool changed = true; changed;) {
    changed = false;
    auto rs = reachable_classes(u, cfg, &current, cache);
    for (std::size_t x = 0; x < rs.levels.size() && !changed; ++x)
      for (const auto& text : rs.levels[x]) {
        if (decided.count(text)) continue;
        const auto& key = rs.registry.at(text);
        const auto& actions = cache.actions(key);
        decided.insert(text);
        if (actions.size() < 2) continue;
        std::optional<Rational> best;
        std::vector<int> pick;
        for (const auto& a : actions) {
          ++stats.decisions;
          AlgorithmMap trial = current;
          trial.table[text] = a.atoms;
          Rational s;
          try {
            s = score(trial, static_cast<long long>(x) + lookahead);
          } catch (const SafetyNetInfeasible&) {
            continue;
          }
          if (!best || s < *best) {
            best = s;
            pick = a.atoms;
          }
        }
        current.table[text] = pick;
        changed = true;
        break;
      }
  }
  SearchResult res;
  res.map.name = "heuristic";
  res.map.table = current.table;
  res.map.rule = current.rule;
  res.report = evaluate_map(res.map, u, cfg, policy, 1, oc);
  res.report.exact = false;
  res.report.mode = "heuristic";
  res.stats = stats;
  return res;
}

/// Exact search over key -> action assignments on the reachable classes.
/// Branch-and-bound drops a partial map once an end-configuration it has
/// already closed is no better than the incumbent.
inline SearchResult search_best_map(const Universe& u, const SchemeConfig& cfg,
                                    SearchMode mode = SearchMode::branch_and_bound,
                                    OptPolicy policy = OptPolicy::grid, OracleCache* oc = nullptr) {
  if (mode == SearchMode::heuristic)
    throw DomainError("use heuristic_search for the heuristic mode");
  detail::MapSearch search(u, cfg, policy, mode, oc);
  SearchResult res = search.run();
  res.report = evaluate_map(res.map, u, cfg, policy, 1, oc);
  res.report.mode = to_string(mode);
  res.map.name = res.report.map_name = std::string("best_") + to_string(mode);
  return res;
}

}  // namespace crsched
