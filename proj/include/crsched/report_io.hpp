#pragma once

// JSON forms of universes and competitive reports, and the comparison table
// that merges several reports.

#include "crsched/json_io.hpp"
#include "crsched/randomized.hpp"

#include <fstream>
#include <iomanip>

namespace crsched {

// ---------------------------------------------------------------------------
// Universes
//
// {"name": ..., "shape": <instance without jobs>,
//  "catalogs": [[[{"p_exp": -3, "w_exp": 0, "relative": true}, ...], ...], ...],
//  "X_max": 3}
// or, instead of "catalogs", "generate": {"p_exps": [...], "w_exps": [...],
//  "Delta": 1, "X_max": 3, "relative": false}.

inline JobTemplate job_template_from_json(const Json& j, const std::string& where) {
  detail::reject_unknown(j, {"p_exp", "w_exp", "relative"}, where);
  JobTemplate t;
  t.p_exp = detail::integer_field(detail::require(j, "p_exp", where), where + ".p_exp");
  if (j.contains("w_exp")) t.w_exp = detail::integer_field(j.at("w_exp"), where + ".w_exp");
  t.relative = j.value("relative", false);
  return t;
}

inline Universe universe_from_json(const Json& j, const SchemeConfig& cfg) {
  if (!j.is_object()) throw ParseError("universe: expected an object");
  detail::reject_unknown(j, {"name", "shape", "catalogs", "generate", "X_max"}, "universe");
  Json shape_json = detail::require(j, "shape", "universe");
  if (!shape_json.contains("jobs")) shape_json["jobs"] = Json::array();
  Instance shape = instance_from_json(shape_json);
  shape.eps = cfg.eps;
  const std::string name = j.value("name", std::string("universe"));
  if (j.contains("generate") == j.contains("catalogs"))
    throw ParseError("universe: give exactly one of \"catalogs\" and \"generate\"");
  if (j.contains("generate")) {
    const Json& g = j.at("generate");
    detail::reject_unknown(g, {"p_exps", "w_exps", "Delta", "X_max", "relative"}, "universe.generate");
    UniverseSpec spec;
    spec.p_exps.clear();
    for (std::size_t k = 0; k < detail::require(g, "p_exps", "universe.generate").size(); ++k)
      spec.p_exps.push_back(detail::integer_field(g.at("p_exps")[k], "universe.generate.p_exps"));
    if (g.contains("w_exps")) {
      spec.w_exps.clear();
      for (const auto& w : g.at("w_exps")) spec.w_exps.push_back(detail::integer_field(w, "universe.generate.w_exps"));
    }
    spec.Delta = static_cast<int>(detail::integer_field(detail::require(g, "Delta", "universe.generate"),
                                                        "universe.generate.Delta"));
    spec.X_max = detail::integer_field(detail::require(g, "X_max", "universe.generate"), "universe.generate.X_max");
    spec.relative = g.value("relative", false);
    return build_universe(shape, cfg, spec, name);
  }
  Universe u;
  u.name = name;
  u.shape = shape;
  u.shape.jobs.clear();
  const Json& cats = j.at("catalogs");
  if (!cats.is_array() || cats.empty()) throw ParseError("universe.catalogs: expected a non-empty array");
  for (std::size_t c = 0; c < cats.size(); ++c) {
    std::vector<ReleaseOption> catalog;
    for (std::size_t o = 0; o < cats[c].size(); ++o) {
      ReleaseOption opt;
      for (std::size_t k = 0; k < cats[c][o].size(); ++k)
        opt.push_back(job_template_from_json(cats[c][o][k], "universe.catalogs[" + std::to_string(c) + "][" +
                                                                std::to_string(o) + "][" + std::to_string(k) + "]"));
      if (static_cast<int>(opt.size()) > cfg.Delta)
        throw ParseError("universe.catalogs[" + std::to_string(c) + "][" + std::to_string(o) +
                         "]: more than Delta jobs");
      catalog.push_back(std::move(opt));
    }
    if (catalog.empty()) throw ParseError("universe.catalogs[" + std::to_string(c) + "]: empty catalog");
    u.catalogs.push_back(std::move(catalog));
  }
  u.X_max = j.contains("X_max") ? detail::integer_field(j.at("X_max"), "universe.X_max")
                                : static_cast<long long>(u.catalogs.size()) - 1;
  if (u.instance_count() > cfg.universe_cap)
    throw SearchRefusal("universe has " + u.instance_count().str() + " instances, over universe_cap");
  return u;
}

inline Json universe_to_json(const Universe& u) {
  Json shape = instance_to_json(u.shape);
  shape.erase("jobs");
  Json cats = Json::array();
  for (const auto& cat : u.catalogs) {
    Json c = Json::array();
    for (const auto& opt : cat) {
      Json o = Json::array();
      for (const auto& t : opt) o.push_back({{"p_exp", t.p_exp}, {"w_exp", t.w_exp}, {"relative", t.relative}});
      c.push_back(o);
    }
    cats.push_back(c);
  }
  return {{"name", u.name}, {"shape", shape}, {"catalogs", cats}, {"X_max", u.X_max}};
}

// ---------------------------------------------------------------------------
// Randomized map files: one JSON object per line,
// {"key": ..., "actions": [{"atoms": [...], "p": "1/2"}, ...]}.

inline void save_randomized_map(const RandomizedMap& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write map file " + path);
  for (const auto& [key, dist] : g.table) {
    Json acts = Json::array();
    for (const auto& a : dist) acts.push_back({{"atoms", a.atoms}, {"p", rat(a.prob)}});
    out << Json{{"key", key}, {"actions", acts}}.dump() << "\n";
  }
}

inline RandomizedMap load_randomized_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read map file " + path);
  RandomizedMap g;
  g.name = path;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    try {
      auto j = Json::parse(line);
      auto& dist = g.table[j.at("key").get<std::string>()];
      Rational sum(0);
      for (const auto& a : j.at("actions")) {
        dist.push_back({a.at("atoms").get<std::vector<int>>(), detail::rational_field(a.at("p"), where + ".p")});
        sum += dist.back().prob;
      }
      if (sum != 1) throw ParseError(where + ": probabilities sum to " + rat(sum));
    } catch (const Json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Reports

inline Json end_ratio_to_json(const EndRatio& r) {
  return {{"key", r.key},   {"value", rat(r.value)}, {"opt", rat(r.opt)},
          {"ratio", rat(r.ratio)}, {"x", r.x},      {"witness", r.witness}};
}

inline Json report_to_json(const CompetitiveReport& rep) {
  Json ends = Json::array();
  for (const auto& e : rep.ends) ends.push_back(end_ratio_to_json(e));
  Json cycle = nullptr;
  if (rep.cycle) cycle = {{"first", rep.cycle->first}, {"second", rep.cycle->second}, {"period", rep.cycle->period}};
  return {{"map", rep.map_name},
          {"universe", rep.universe},
          {"quantification", "over the finite universe only"},
          {"mode", rep.mode},
          {"policy", to_string(rep.policy)},
          {"exact", rep.exact},
          {"rho", rat(rep.rho)},
          {"certificate", rat(rep.certificate)},
          {"argmax", end_ratio_to_json(rep.argmax)},
          {"classes", rep.classes},
          {"truncated", rep.truncated},
          {"cycle", cycle},
          {"ends", ends}};
}

/// One row of the comparison table.
struct ReportRow {
  std::string map, universe, mode, policy;
  Rational rho, certificate;
  bool exact = true;
  std::size_t ends = 0;
};

inline ReportRow report_row_from_json(const Json& j, const std::string& where) {
  ReportRow r;
  try {
    r.map = j.at("map").get<std::string>();
    r.universe = j.at("universe").get<std::string>();
    r.mode = j.at("mode").get<std::string>();
    r.policy = j.at("policy").get<std::string>();
    r.exact = j.at("exact").get<bool>();
    r.ends = j.at("ends").size();
  } catch (const Json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
  r.rho = detail::rational_field(detail::require(j, "rho", where), where + ".rho");
  r.certificate = detail::rational_field(detail::require(j, "certificate", where), where + ".certificate");
  return r;
}

/// Rows sorted by universe, then rho, then map name.
inline std::string comparison_table(std::vector<ReportRow> rows, bool csv) {
  std::sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    return std::tie(a.universe, a.rho, a.map) < std::tie(b.universe, b.rho, b.map);
  });
  std::ostringstream os;
  if (csv) {
    os << "universe,map,mode,policy,exact,rho,certificate,ends\n";
    for (const auto& r : rows)
      os << r.universe << "," << r.map << "," << r.mode << "," << r.policy << "," << (r.exact ? "yes" : "no") << ","
         << rat(r.rho) << "," << rat(r.certificate) << "," << r.ends << "\n";
    return os.str();
  }
  os << std::left << std::setw(24) << "universe" << std::setw(24) << "map" << std::setw(22) << "mode"
     << std::setw(8) << "exact" << std::setw(14) << "rho'" << std::setw(10) << "cert." << "ends\n";
  for (const auto& r : rows)
    os << std::left << std::setw(24) << r.universe << std::setw(24) << r.map << std::setw(22) << r.mode
       << std::setw(8) << (r.exact ? "yes" : "no") << std::setw(14) << rat(r.rho) << std::setw(10)
       << rat(r.certificate) << r.ends << "\n";
  return os.str();
}

}  // namespace crsched
