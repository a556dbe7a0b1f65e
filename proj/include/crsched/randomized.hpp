#pragma once

// Randomized maps with delta-discretized probabilities, their exact
// evaluation, and the random offset split of periods.

#include "crsched/search.hpp"

#include <random>

namespace crsched {

struct WeightedAction {
  std::vector<int> atoms;
  Rational prob;
};

/// Key -> distribution over action classes. Keys without an entry use
/// `fallback` (or their only action).
struct RandomizedMap {
  std::string name = "randomized";
  std::map<std::string, std::vector<WeightedAction>> table;
  std::optional<AlgorithmMap> fallback;

  static RandomizedMap from_deterministic(const AlgorithmMap& map) {
    RandomizedMap out;
    out.name = map.name;
    out.fallback = map;
    return out;
  }

  /// Probabilities are multiples of delta and sum to 1 in every entry.
  bool discretized(const Rational& delta) const {
    for (const auto& [key, dist] : table) {
      Rational sum(0);
      for (const auto& a : dist) {
        if (a.prob < 0 || denominator_of(a.prob / delta) != 1) return false;
        sum += a.prob;
      }
      if (sum != 1) return false;
    }
    return true;
  }
};

inline void check_quantum(const Rational& delta) {
  if (delta <= 0 || delta > 1 || numerator_of(1 / delta) <= 0 || denominator_of(1 / delta) != 1)
    throw DomainError("1/delta must be a positive integer, got delta = " + to_string(delta));
}

/// Rounds a distribution to multiples of delta: floor everything, then hand
/// out the missing delta chunks by largest remainder, lower index first on ties.
inline std::vector<Rational> discretize(const std::vector<Rational>& probs, const Rational& delta) {
  check_quantum(delta);
  Rational sum(0);
  for (const auto& p : probs) {
    if (p < 0) throw DomainError("negative probability");
    sum += p;
  }
  if (sum != 1) throw DomainError("probabilities sum to " + to_string(sum) + ", not 1");
  std::vector<Rational> out(probs.size()), rest(probs.size());
  Rational given(0);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    out[i] = floor_div(probs[i] / delta) * delta;
    rest[i] = probs[i] - out[i];
    given += out[i];
  }
  auto chunks = to_ll(numerator_of(Rational((1 - given) / delta)));
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return rest[a] > rest[b]; });
  for (long long c = 0; c < chunks; ++c) out[order[static_cast<std::size_t>(c)]] += delta;
  return out;
}

inline RandomizedMap discretize_map(const RandomizedMap& f, const Rational& delta) {
  RandomizedMap g = f;
  g.name = f.name + "_d";
  for (auto& [key, dist] : g.table) {
    std::vector<Rational> p;
    for (const auto& a : dist) p.push_back(a.prob);
    p = discretize(p, delta);
    for (std::size_t i = 0; i < dist.size(); ++i) dist[i].prob = p[i];
  }
  return g;
}

/// A random distribution over the actions of every key with a choice.
/// Weights are integers in [0, grain], so the probabilities have small
/// denominators.
inline RandomizedMap random_map(const std::map<std::string, CanonicalKey>& keys, ActionCache& cache,
                                std::mt19937_64& rng, int grain = 20) {
  RandomizedMap f;
  std::uniform_int_distribution<int> pick(0, grain);
  for (const auto& [text, key] : keys) {
    const auto& actions = cache.actions(key);
    if (actions.size() < 2) continue;
    std::vector<int> w(actions.size());
    int total = 0;
    while (total == 0) {
      total = 0;
      for (auto& v : w) total += v = pick(rng);
    }
    auto& dist = f.table[text];
    for (std::size_t i = 0; i < actions.size(); ++i) dist.push_back({actions[i].atoms, Rational(w[i], total)});
  }
  return f;
}

namespace detail {

struct Branch {
  Simulator sim;
  Rational prob;
};

class RandomizedEvaluator {
public:
  RandomizedEvaluator(const RandomizedMap& g, const Universe& u, const SchemeConfig& cfg, OptPolicy policy,
                      OracleCache& oc)
      : g_(g), u_(u), cfg_(cfg), policy_(policy), oc_(oc), actions_(cfg) {}

  CompetitiveReport run() {
    rep_.map_name = g_.name;
    rep_.universe = u_.name;
    rep_.policy = policy_;
    rep_.mode = "randomized";
    rep_.certificate = worst_case_certificate(u_.shape, cfg_);
    std::vector<Branch> cloud{{Simulator(u_.shape, cfg_, false), Rational(1)}};
    cloud.front().sim.set_start(0);
    walk(cloud, 0, "");
    if (rep_.ends.empty()) throw SearchRefusal("no non-empty instances");
    return std::move(rep_);
  }

  std::size_t tree_nodes() const { return nodes_; }

private:
  const ActionPlan& plan_for(const StepView& v, const std::vector<ActionPlan>& actions) const {
    if (g_.fallback) return g_.fallback->choose(v.key(), actions);
    if (actions.size() == 1) return actions.front();
    throw MapIncomplete("map incomplete at key " + v.key().text);
  }

  // one date of one instance prefix: releases, then every random branch
  std::vector<Branch> advance(const std::vector<Branch>& cloud, const ReleaseOption& opt, long long x) {
    std::vector<Branch> next;
    for (const auto& b : cloud) {
      Simulator sim = b.sim;
      sim.begin_interval(u_.instantiate(opt, x, "j"));
      if (x > u_.X_max && sim.all_finished()) {
        next.push_back({std::move(sim), b.prob});
        continue;
      }
      StepView v = sim.view();
      const auto& actions = actions_.actions(v.key());
      auto it = g_.table.find(v.key().text);
      if (it == g_.table.end() || actions.size() < 2) {
        sim.apply(v, plan_for(v, actions));
        next.push_back({std::move(sim), b.prob});
        continue;
      }
      for (const auto& a : it->second) {
        if (a.prob == 0) continue;
        const ActionPlan* plan = actions_.find(v.key(), a.atoms);
        if (!plan) throw MapIncomplete("action " + action_text(a.atoms) + " is infeasible at key " + v.key().text);
        Simulator s2 = sim;
        s2.apply(v, *plan);
        next.push_back({std::move(s2), b.prob * a.prob});
      }
    }
    nodes_ += next.size();
    if (nodes_ > cfg_.rand_tree_cap)
      throw SearchRefusal("probability tree exceeds rand_tree_cap = " + std::to_string(cfg_.rand_tree_cap));
    return next;
  }

  void walk(const std::vector<Branch>& cloud, long long x, const std::string& witness) {
    if (x > cfg_.E_cap) throw SearchRefusal("evaluation exceeded E_cap = " + std::to_string(cfg_.E_cap));
    if (x > u_.X_max) {
      auto next = advance(cloud, ReleaseOption{}, x);
      bool done = true;
      for (const auto& b : next) done = done && b.sim.all_finished();
      if (done) return leaf(next, x, witness);
      return walk(next, x + 1, witness);
    }
    const auto& options = u_.catalog(x);
    for (std::size_t o = 0; o < options.size(); ++o)
      walk(advance(cloud, options[o], x), x + 1,
           witness + (witness.empty() ? "" : " ") + std::to_string(x) + ":" + std::to_string(o));
  }

  void leaf(const std::vector<Branch>& cloud, long long x, const std::string& witness) {
    const Instance& inst = cloud.front().sim.instance();
    if (inst.jobs.empty()) return;
    EndRatio r;
    r.key = witness;
    r.witness = witness;
    r.x = x;
    r.value = 0;
    for (const auto& b : cloud) r.value += b.prob * b.sim.snapped_value().value();
    r.opt = cached_opt(inst, cfg_, policy_ == OptPolicy::grid, oc_);
    if (r.opt <= 0) throw std::logic_error("non-positive optimum for instance " + witness);
    r.ratio = r.value / r.opt;
    if (rep_.ends.empty() || r.ratio > rep_.rho) {
      rep_.rho = r.ratio;
      rep_.argmax = r;
    }
    rep_.ends.push_back(std::move(r));
  }

  const RandomizedMap& g_;
  const Universe& u_;
  SchemeConfig cfg_;
  OptPolicy policy_;
  OracleCache& oc_;
  ActionCache actions_;
  CompetitiveReport rep_;
  std::size_t nodes_ = 0;
};

}  // namespace detail

/// Exact rho' of a randomized map: for every instance of the universe the
/// whole probability tree is walked, and E[val] / Opt is taken over the full
/// instance.
inline CompetitiveReport evaluate_randomized_map(const RandomizedMap& g, const Universe& u, const SchemeConfig& cfg,
                                                 OptPolicy policy = OptPolicy::grid, OracleCache* oc = nullptr) {
  OracleCache own;
  detail::RandomizedEvaluator ev(g, u, cfg, policy, oc ? *oc : own);
  auto rep = ev.run();
  rep.classes = ev.tree_nodes();
  return rep;
}

/// Exhaustive search over delta-discretized maps on the keys reachable under
/// any action. Refused unless there are at most rand_enum_cap keys with a
/// choice and at most rand_tree_cap candidate maps.
inline std::pair<RandomizedMap, CompetitiveReport> search_randomized_map(const Universe& u, const SchemeConfig& cfg,
                                                                         OptPolicy policy = OptPolicy::grid,
                                                                         OracleCache* oc = nullptr) {
  check_quantum(cfg.delta);
  ActionCache cache(cfg);
  auto rs = reachable_classes(u, cfg, nullptr, cache);
  if (rs.truncated) throw SearchRefusal("reachable classes truncated at E_cap");
  const long long q = to_ll(numerator_of(Rational(1 / cfg.delta)));
  // all compositions of q into n parts
  auto compositions = [q](std::size_t n) {
    std::vector<std::vector<long long>> out;
    std::vector<long long> cur(n, 0);
    std::function<void(std::size_t, long long)> rec = [&](std::size_t i, long long left) {
      if (i + 1 == n) {
        cur[i] = left;
        out.push_back(cur);
        return;
      }
      for (long long v = left; v >= 0; --v) {
        cur[i] = v;
        rec(i + 1, left - v);
      }
    };
    rec(0, q);
    return out;
  };
  std::vector<std::string> keys;
  std::vector<std::vector<std::vector<long long>>> choices;
  Integer total = 1;
  for (const auto& [text, key] : rs.registry) {
    const auto& actions = cache.actions(key);
    if (actions.size() < 2) continue;
    keys.push_back(text);
    choices.push_back(compositions(actions.size()));
    total *= choices.back().size();
  }
  if (keys.size() > cfg.rand_enum_cap || total > cfg.rand_tree_cap)
    throw SearchRefusal("randomized search over " + std::to_string(keys.size()) + " keys and " + total.str() +
                        " maps exceeds the caps");
  OracleCache own;
  OracleCache& cache_ref = oc ? *oc : own;
  std::optional<std::pair<RandomizedMap, CompetitiveReport>> best;
  RandomizedMap g;
  g.name = "best_randomized";
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == keys.size()) {
      auto rep = evaluate_randomized_map(g, u, cfg, policy, &cache_ref);
      if (!best || rep.rho < best->second.rho) best.emplace(g, std::move(rep));
      return;
    }
    const auto& actions = cache.actions(rs.registry.at(keys[i]));
    for (const auto& c : choices[i]) {
      auto& dist = g.table[keys[i]];
      dist.clear();
      for (std::size_t a = 0; a < actions.size(); ++a) dist.push_back({actions[a].atoms, c[a] * cfg.delta});
      rec(i + 1);
    }
  };
  rec(0);
  if (!best) throw SearchRefusal("no non-empty instances");
  best->second.mode = "randomized_exhaustive";
  return *best;
}

// ---------------------------------------------------------------------------
// Offset split

struct OffsetVariant {
  int offset = 0;
  std::vector<int> moved_periods;          // periods k = offset (mod M) that hold jobs
  std::set<std::string> net_only_jobs;
  std::vector<std::pair<int, int>> parts;  // [first, last] period, cut after moved periods
  Rational moved_rw;
};

struct OffsetSplit {
  int M = 0;
  std::vector<Rational> period_rw;
  std::vector<OffsetVariant> variants;  // one, or all M for the average
  Rational total_rw;
  Rational average_moved;               // (1/M) sum over all offsets
  bool identity_holds = false;          // sum over offsets of moved rw == rw(I)
  std::set<int> last_window_offsets;    // offsets whose moved periods meet the last s intervals
};

inline int offset_modulus(const SchemeConfig& cfg) {
  if (cfg.offset_modulus > 0) return cfg.offset_modulus;
  return static_cast<int>(to_ll(ceil_div(pow(cfg.eps.base(), cfg.s) / cfg.eps.value())));
}

/// Jobs of the periods congruent to the offset go to their safety nets and
/// the instance is cut into parts of at most M periods. Without an offset
/// every variant is produced.
inline OffsetSplit offset_split(const Instance& inst, const SchemeConfig& cfg, std::optional<int> offset = {}) {
  OffsetSplit out;
  out.M = offset_modulus(cfg);
  if (out.M < 2) throw DomainError("offset modulus must be at least 2");
  if (offset && (*offset < 0 || *offset >= out.M))
    throw DomainError("offset " + std::to_string(*offset) + " outside 0.." + std::to_string(out.M - 1));
  for (const auto& j : inst.jobs)
    if (release_interval(j, inst.eps) < 0) throw DomainError("offset_split needs releases at R_0 or later");
  auto ps = partition_periods(inst, cfg);
  out.period_rw = ps.period_rw;
  for (const auto& rw : out.period_rw) out.total_rw += rw;
  const int periods = static_cast<int>(out.period_rw.size());

  auto variant = [&](int o) {
    OffsetVariant v;
    v.offset = o;
    int start = 0;
    for (int k = o; k < periods; k += out.M) {
      if (out.period_rw[k] > 0 || std::any_of(inst.jobs.begin(), inst.jobs.end(), [&](const Job& j) {
            return period_of(release_interval(j, inst.eps), cfg.s) == k;
          }))
        v.moved_periods.push_back(k);
      v.moved_rw += out.period_rw[k];
      v.parts.emplace_back(start, k);
      start = k + 1;
    }
    if (start < periods) v.parts.emplace_back(start, periods - 1);
    for (const auto& j : inst.jobs)
      if (period_of(release_interval(j, inst.eps), cfg.s) % out.M == o) v.net_only_jobs.insert(j.id);
    return v;
  };

  Rational sum(0);
  for (int o = 0; o < out.M; ++o) {
    auto v = variant(o);
    sum += v.moved_rw;
    if (!offset || *offset == o) out.variants.push_back(std::move(v));
  }
  out.average_moved = sum / out.M;
  out.identity_holds = sum == out.total_rw;

  if (!inst.jobs.empty()) {
    long long last = 0;
    for (const auto& j : inst.jobs) last = std::max(last, release_interval(j, inst.eps));
    for (long long y = std::max<long long>(0, last - cfg.s + 1); y <= last; ++y)
      out.last_window_offsets.insert(period_of(y, cfg.s) % out.M);
  }
  return out;
}

}  // namespace crsched
