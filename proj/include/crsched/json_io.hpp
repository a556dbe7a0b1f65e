#pragma once

// JSON forms of instances, schedules, scheme configurations and reports.
// Every number crosses the interface as an exact rational string.

#include "crsched/config.hpp"
#include "crsched/constants.hpp"
#include "crsched/core.hpp"
#include "crsched/simplify.hpp"

#include <json.hpp>

#include <set>
#include <string>

namespace crsched {

using Json = nlohmann::ordered_json;

namespace detail {

inline Rational rational_field(const Json& v, const std::string& where) {
  try {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.get<long long>());
    if (v.is_number_float()) return parse_rational(v.dump());
  } catch (const ParseError& e) {
    throw ParseError(where + ": " + e.what());
  }
  throw ParseError(where + ": expected a rational");
}

inline std::optional<Rational> rational_or_inf_field(const Json& v, const std::string& where) {
  try {
    if (v.is_string()) return parse_rational_or_inf(v.get<std::string>());
  } catch (const ParseError& e) {
    throw ParseError(where + ": " + e.what());
  }
  return rational_field(v, where);
}

inline long long integer_field(const Json& v, const std::string& where) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_string()) {
    Rational q = rational_field(v, where);
    if (denominator_of(q) == 1) return to_ll(numerator_of(q));
  }
  throw ParseError(where + ": expected an integer");
}

inline const Json& require(const Json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw ParseError(where + ": missing field \"" + key + "\"");
  return obj.at(key);
}

inline void reject_unknown(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw ParseError(where + ": unknown key \"" + it.key() + "\"");
}

}  // namespace detail

inline std::string rat(const Rational& q) { return to_string(q); }

// ---------------------------------------------------------------------------
// Instances

inline Objective objective_from_json(const Json& j) {
  const std::string kind = detail::require(j, "kind", "objective").get<std::string>();
  if (kind == "weighted_completion") return Objective::weighted_completion();
  if (kind == "makespan") return Objective::makespan();
  if (kind == "monomial")
    return Objective::monomial(detail::rational_field(detail::require(j, "k", "objective"), "objective.k"),
                               detail::rational_field(detail::require(j, "alpha", "objective"), "objective.alpha"));
  throw ParseError("objective.kind: unknown objective \"" + kind + "\"");
}

inline Json objective_to_json(const Objective& o) {
  switch (o.kind) {
    case ObjectiveKind::weighted_completion: return {{"kind", "weighted_completion"}};
    case ObjectiveKind::makespan: return {{"kind", "makespan"}};
    case ObjectiveKind::monomial: return {{"kind", "monomial"}, {"k", rat(o.k)}, {"alpha", rat(o.alpha)}};
  }
  return {};
}

inline Instance instance_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("instance: expected an object");
  Instance inst;
  if (j.contains("epsilon")) {
    Rational e = detail::rational_field(j.at("epsilon"), "epsilon");
    try {
      inst.eps = Epsilon(e);
    } catch (const DomainError& err) {
      throw ParseError(std::string("epsilon: ") + err.what());
    }
  }
  const Json& mach = detail::require(j, "machines", "instance");
  const std::string kind = detail::require(mach, "kind", "machines").get<std::string>();
  if (kind == "identical") {
    inst.env = MachineEnv::identical(static_cast<int>(detail::integer_field(detail::require(mach, "m", "machines"), "machines.m")));
  } else if (kind == "unrelated") {
    inst.env = MachineEnv::unrelated(static_cast<int>(detail::integer_field(detail::require(mach, "m", "machines"), "machines.m")));
  } else if (kind == "related") {
    std::vector<Rational> speeds;
    const Json& sp = detail::require(mach, "speeds", "machines");
    for (std::size_t i = 0; i < sp.size(); ++i)
      speeds.push_back(detail::rational_field(sp[i], "machines.speeds[" + std::to_string(i) + "]"));
    inst.env = MachineEnv::related(speeds);
  } else {
    throw ParseError("machines.kind: unknown machine environment \"" + kind + "\"");
  }
  inst.preemptive = j.value("preemptive", true);
  if (j.contains("objective")) inst.objective = objective_from_json(j.at("objective"));
  const Json& jobs = detail::require(j, "jobs", "instance");
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const std::string where = "jobs[" + std::to_string(k) + "]";
    const Json& jj = jobs[k];
    Job job;
    job.id = jj.contains("id") ? jj.at("id").get<std::string>() : "j" + std::to_string(k + 1);
    job.release = detail::rational_field(detail::require(jj, "r", where), where + ".r");
    const Json& p = detail::require(jj, "p", where);
    if (p.is_array()) {
      for (std::size_t i = 0; i < p.size(); ++i)
        job.proc.push_back(detail::rational_or_inf_field(p[i], where + ".p[" + std::to_string(i) + "]"));
    } else {
      job.proc.push_back(detail::rational_field(p, where + ".p"));
    }
    job.weight = jj.contains("w") ? detail::rational_field(jj.at("w"), where + ".w") : Rational(1);
    inst.jobs.push_back(std::move(job));
  }
  try {
    inst.validate();
  } catch (const DomainError& e) {
    throw ParseError(std::string("instance: ") + e.what());
  }
  return inst;
}

inline Json instance_to_json(const Instance& inst) {
  Json mach;
  switch (inst.env.kind) {
    case MachineKind::identical: mach = {{"kind", "identical"}, {"m", inst.env.m}}; break;
    case MachineKind::unrelated: mach = {{"kind", "unrelated"}, {"m", inst.env.m}}; break;
    case MachineKind::related: {
      Json sp = Json::array();
      for (const auto& s : inst.env.speeds) sp.push_back(rat(s));
      mach = {{"kind", "related"}, {"speeds", sp}};
      break;
    }
  }
  Json jobs = Json::array();
  for (const auto& job : inst.jobs) {
    Json jj{{"id", job.id}, {"r", rat(job.release)}};
    if (inst.env.kind == MachineKind::unrelated) {
      Json row = Json::array();
      for (const auto& p : job.proc) row.push_back(p ? rat(*p) : std::string("inf"));
      jj["p"] = row;
    } else {
      jj["p"] = rat(job.p());
    }
    jj["w"] = rat(job.weight);
    jobs.push_back(jj);
  }
  return {{"epsilon", rat(inst.eps.value())},
          {"machines", mach},
          {"preemptive", inst.preemptive},
          {"objective", objective_to_json(inst.objective)},
          {"jobs", jobs}};
}

// ---------------------------------------------------------------------------
// Schedules

inline Json schedule_to_json(const Schedule& sched, const Instance& inst) {
  Json intervals = Json::array();
  for (const auto& rec : sched.intervals) {
    Json machines = Json::object();
    for (const auto& e : rec.entries)
      machines[std::to_string(e.machine)].push_back(Json::array({inst.jobs[e.job].id, e.atoms, rat(e.amount)}));
    intervals.push_back({{"x", rec.x}, {"machines", machines}});
  }
  Json segs = Json::array();
  for (const auto& s : sched.segments)
    segs.push_back({{"machine", s.machine}, {"job", inst.jobs[s.job].id}, {"start", rat(s.start)}, {"end", rat(s.end)}});
  Json comp = Json::object();
  for (std::size_t j = 0; j < sched.completions.size(); ++j)
    if (sched.completions[j])
      comp[inst.jobs[j].id] = {{"raw", rat(sched.completions[j]->raw)},
                               {"interval", sched.completions[j]->interval},
                               {"snapped", rat(sched.completions[j]->snapped)}};
  return {{"intervals", intervals}, {"segments", segs}, {"completions", comp}};
}

// ---------------------------------------------------------------------------
// Scheme configuration

inline SchemeConfig scheme_from_json(const Json& j, SchemeConfig cfg = {}) {
  static const std::set<std::string> allowed = {
      "epsilon", "s", "Delta", "K", "Gamma", "mu", "d", "delta", "G", "X_max", "E_cap", "mode", "large_per_type", "M",
      "oracle_job_cap", "oracle_state_cap", "universe_cap", "class_cap", "rand_enum_cap", "rand_tree_cap"};
  if (!j.is_object()) throw ParseError("scheme: expected an object");
  detail::reject_unknown(j, allowed, "scheme");
  auto integer = [&](const char* key, auto& field) {
    if (j.contains(key)) field = static_cast<std::remove_reference_t<decltype(field)>>(
                             detail::integer_field(j.at(key), std::string("scheme.") + key));
  };
  if (j.contains("epsilon")) {
    try {
      cfg.eps = Epsilon(detail::rational_field(j.at("epsilon"), "scheme.epsilon"));
    } catch (const DomainError& e) {
      throw ParseError(std::string("scheme.epsilon: ") + e.what());
    }
  }
  integer("s", cfg.s);
  integer("Delta", cfg.Delta);
  integer("K", cfg.K);
  integer("d", cfg.d);
  integer("G", cfg.G);
  integer("X_max", cfg.X_max);
  integer("E_cap", cfg.E_cap);
  integer("large_per_type", cfg.large_per_type);
  integer("M", cfg.offset_modulus);
  integer("oracle_job_cap", cfg.oracle_job_cap);
  integer("oracle_state_cap", cfg.oracle_state_cap);
  integer("universe_cap", cfg.universe_cap);
  integer("class_cap", cfg.class_cap);
  integer("rand_enum_cap", cfg.rand_enum_cap);
  integer("rand_tree_cap", cfg.rand_tree_cap);
  if (j.contains("mu")) cfg.mu = detail::rational_field(j.at("mu"), "scheme.mu");
  if (j.contains("delta")) cfg.delta = detail::rational_field(j.at("delta"), "scheme.delta");
  if (j.contains("mode")) {
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "desk")
      cfg.mode = SchemeMode::desk;
    else if (mode == "theoretical")
      cfg.mode = SchemeMode::theoretical;
    else
      throw ParseError("scheme.mode: expected \"desk\" or \"theoretical\"");
  }
  if (j.contains("Gamma") && detail::integer_field(j.at("Gamma"), "scheme.Gamma") != cfg.Gamma())
    throw ParseError("scheme.Gamma: must equal K * s = " + std::to_string(cfg.Gamma()));
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw ParseError(e.what());
  }
  return cfg;
}

inline Json scheme_to_json(const SchemeConfig& cfg) {
  return {{"epsilon", rat(cfg.eps.value())},
          {"s", cfg.s},
          {"Delta", cfg.Delta},
          {"K", cfg.K},
          {"Gamma", cfg.Gamma()},
          {"mu", rat(cfg.mu)},
          {"d", cfg.d},
          {"delta", rat(cfg.delta)},
          {"G", cfg.G},
          {"X_max", cfg.X_max},
          {"E_cap", cfg.E_cap},
          {"mode", cfg.mode == SchemeMode::desk ? "desk" : "theoretical"}};
}

// ---------------------------------------------------------------------------
// Reports

inline Json ledger_to_json(const std::vector<LossCertificate>& ledger) {
  Json out = Json::array();
  for (const auto& c : ledger) out.push_back({{"lemma", c.step}, {"factor", rat(c.factor)}});
  return out;
}

inline Json constants_to_json(const ConstantsReport& r) {
  Json warnings = Json::array();
  for (const auto& w : r.warnings) warnings.push_back(w);
  return {{"epsilon", rat(r.eps)},
          {"m", r.m},
          {"d", r.d},
          {"distinct_large_sizes", r.distinct_large},
          {"large_per_type", r.large_per_type},
          {"max_large_per_type", r.max_large_per_type},
          {"distinct_small_sizes", r.distinct_small},
          {"small_per_date", r.small_per_date},
          {"Delta", r.Delta},
          {"s", r.s},
          {"K", r.K},
          {"Gamma", r.Gamma},
          {"M", r.M},
          {"pack_lower", rat(r.pack_lower)},
          {"pack_upper", rat(r.pack_upper)},
          {"domination_factor_log10", r.domination_log10},
          {"warnings", warnings}};
}

}  // namespace crsched
