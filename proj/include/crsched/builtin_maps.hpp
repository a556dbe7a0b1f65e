#pragma once

// Built-in rule maps, interval-schedule canonicalization and map files.

#include "crsched/simulator.hpp"

#include <json.hpp>

#include <fstream>
#include <numeric>

namespace crsched {

namespace detail {

inline int fit_atoms(const Rational& atom, const Rational& room) {
  if (room <= 0) return 0;
  return static_cast<int>(to_ll(floor_div(room / atom)));
}

/// Greedy preemptive rule: jobs in `order` receive as many atoms as fit.
inline std::vector<int> greedy_preemptive(const KeyView& v, const std::vector<std::size_t>& order) {
  const auto& k = *v.key;
  std::vector<int> atoms(k.jobs.size(), 0);
  Rational left = k.m * v.len - k.net_load;
  for (auto i : order) {
    const int rem = k.jobs[i].total - k.jobs[i].done;
    int a = std::min({rem, fit_atoms(v.atom[i], v.len), fit_atoms(v.atom[i], left)});
    if (!v.large[i] && a < rem) a = 0;
    atoms[i] = a;
    left -= a * v.atom[i];
  }
  return atoms;
}

inline std::vector<std::size_t> actionable_jobs(const KeyView& v) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.actionable.size(); ++i)
    if (v.actionable[i]) out.push_back(i);
  return out;
}

inline Rational smith_ratio(const KeyView& v, const Epsilon& eps, std::size_t i) {
  return eps.power(v.key->jobs[i].w_off) / v.p[i];
}

inline std::vector<int> smith_nonpreemptive(const KeyView& v, const SchemeConfig& cfg) {
  const auto& k = *v.key;
  std::vector<int> atoms(k.jobs.size(), 0);
  std::vector<Rational> room(k.machines.size());
  std::vector<bool> open(k.machines.size(), false);
  for (std::size_t s = 0; s < k.machines.size(); ++s) {
    const auto& mm = k.machines[s];
    const Rational reserve = mm.host ? k.net_load : Rational(0);
    if (mm.status == static_cast<int>(MachineStatus::blocked)) continue;
    if (mm.status == static_cast<int>(MachineStatus::free)) {
      room[s] = v.len - reserve;
      open[s] = true;
      continue;
    }
    const int d = mm.job;
    const int rem = k.jobs[d].total - k.jobs[d].done;
    const int a = std::min(rem, fit_atoms(v.atom[d], v.len));
    atoms[d] = a;
    if (a == rem) {
      room[s] = v.len - a * v.atom[d] - reserve;
      open[s] = true;
    }
  }
  std::vector<std::size_t> order;
  for (auto i : actionable_jobs(v))
    if (k.jobs[i].done == 0 && !k.jobs[i].dedicated) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return smith_ratio(v, cfg.eps, a) > smith_ratio(v, cfg.eps, b);
  });
  std::vector<std::size_t> waiting;
  for (auto i : order) {
    bool placed = false;
    for (std::size_t s = 0; s < room.size() && !placed; ++s)
      if (open[s] && v.p[i] <= room[s]) {
        room[s] -= v.p[i];
        atoms[i] = k.jobs[i].total;
        placed = true;
      }
    if (!placed) waiting.push_back(i);
  }
  for (std::size_t s = 0; s < room.size(); ++s) {
    if (!open[s] || k.machines[s].host) continue;
    for (auto it = waiting.begin(); it != waiting.end(); ++it) {
      if (!v.large[*it]) continue;
      int a = std::min(k.jobs[*it].total - 1, fit_atoms(v.atom[*it], room[s]));
      if (a < 1) continue;
      atoms[*it] = a;
      waiting.erase(it);
      break;
    }
  }
  return atoms;
}

}  // namespace detail

inline const std::vector<std::string>& builtin_map_names() {
  static const std::vector<std::string> names{"srpt", "wspt_pmtn", "smith_list_nonpmtn", "idle_safety"};
  return names;
}

/// A named rule map. The rule runs on demand for every key it meets.
inline AlgorithmMap builtin_map(const std::string& name, const SchemeConfig& cfg) {
  AlgorithmMap map;
  map.name = name;
  if (name == "srpt" || name == "wspt_pmtn") {
    const bool by_weight = name == "wspt_pmtn";
    map.rule = [cfg, by_weight, name](const CanonicalKey& key, const std::vector<ActionPlan>&) {
      if (!key.preemptive) throw DomainError(name + " is a preemptive rule");
      KeyView v(key, cfg);
      auto order = detail::actionable_jobs(v);
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
        if (by_weight) return detail::smith_ratio(v, cfg.eps, a) > detail::smith_ratio(v, cfg.eps, b);
        return v.remaining(a) < v.remaining(b);
      });
      return detail::greedy_preemptive(v, order);
    };
  } else if (name == "smith_list_nonpmtn") {
    map.rule = [cfg](const CanonicalKey& key, const std::vector<ActionPlan>&) {
      if (key.preemptive) throw DomainError("smith_list_nonpmtn is a non-preemptive rule");
      KeyView v(key, cfg);
      return detail::smith_nonpreemptive(v, cfg);
    };
  } else if (name == "idle_safety") {
    map.rule = [](const CanonicalKey&, const std::vector<ActionPlan>& actions) { return actions.front().atoms; };
  } else {
    throw DomainError("unknown built-in map '" + name + "'");
  }
  return map;
}

/// Tabulates a map on the given keys, resolving every entry now.
inline AlgorithmMap tabulate_map(const AlgorithmMap& map, const std::vector<CanonicalKey>& keys,
                                 ActionCache& cache) {
  AlgorithmMap out;
  out.name = map.name;
  for (const auto& key : keys) {
    const auto& actions = cache.actions(key);
    if (actions.size() > 1) out.table[key.text] = map.choose(key, actions).atoms;
  }
  return out;
}

/// Canonical action class of a realized interval-schedule: atoms per job in
/// canonical order, identical jobs normalized to non-increasing atoms.
/// Machine labels and absolute times do not matter.
inline std::vector<int> canonical_action(const StepView& v, const IntervalRecord& rec, const SchemeConfig& cfg) {
  const auto& order = v.canon.job_order;
  std::vector<int> atoms(order.size(), 0);
  for (std::size_t c = 0; c < order.size(); ++c)
    for (const auto& e : rec.entries)
      if (e.job == v.conf.relevant[order[c]].job) atoms[c] += e.atoms;
  KeyView kv(v.key(), cfg);
  std::size_t i = 0;
  while (i < atoms.size()) {
    std::size_t j = i;
    while (j < atoms.size() && kv.group[j] == kv.group[i]) ++j;
    std::sort(atoms.begin() + i, atoms.begin() + j, std::greater<>());
    i = j;
  }
  return atoms;
}

// ---------------------------------------------------------------------------
// Map files: one JSON object per line, {"key": ..., "action": [...]}.

inline void save_map(const AlgorithmMap& map, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write map file " + path);
  for (const auto& [key, atoms] : map.table) out << nlohmann::json{{"key", key}, {"action", atoms}}.dump() << "\n";
}

inline AlgorithmMap load_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read map file " + path);
  AlgorithmMap map;
  map.name = path;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      map.table[j.at("key").get<std::string>()] = j.at("action").get<std::vector<int>>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return map;
}

}  // namespace crsched
