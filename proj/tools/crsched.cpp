// crsched: command-line front end.
//
// Exit codes: 0 exact result, 1 error, 2 refusal (a cap was hit),
// 3 heuristic (non-exact) result.

#include "crsched/crsched.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace crsched;

namespace {

constexpr int kExact = 0, kError = 1, kRefusal = 2, kHeuristic = 3;

struct RunConfig {
  SchemeConfig scheme;
  std::string config_path, instance, universe, map, randomized, cache, output, csv, log;
  std::vector<std::string> overrides;  // key=value for the scheme section
  unsigned jobs = 1;
  std::uint64_t seed = 1;
};

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void write_json(const std::string& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

/// Defaults, then the config file, then command-line flags.
void resolve(RunConfig& rc) {
  Json scheme = Json::object();
  if (!rc.config_path.empty()) {
    Json file = read_json(rc.config_path);
    if (!file.is_object()) throw ParseError(rc.config_path + ": expected an object");
    detail::reject_unknown(file, {"scheme", "instance", "universe", "map", "cache", "output", "jobs", "seed"},
                           rc.config_path);
    if (file.contains("scheme")) scheme = file.at("scheme");
    auto path = [&](const char* key, std::string& field) {
      if (file.contains(key) && field.empty()) field = file.at(key).get<std::string>();
    };
    path("instance", rc.instance);
    path("universe", rc.universe);
    path("map", rc.map);
    path("cache", rc.cache);
    path("output", rc.output);
    if (file.contains("jobs") && rc.jobs == 1)
      rc.jobs = static_cast<unsigned>(detail::integer_field(file.at("jobs"), "jobs"));
    if (file.contains("seed") && rc.seed == 1)
      rc.seed = static_cast<std::uint64_t>(detail::integer_field(file.at("seed"), "seed"));
  }
  for (const auto& kv : rc.overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw ParseError("--set " + kv + ": expected key=value");
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    scheme[key] = value;  // numbers are parsed from their string form
  }
  rc.scheme = scheme_from_json(scheme);
  if (rc.jobs == 0) throw ParseError("jobs must be positive");
}

void require_path(const std::string& value, const char* what) {
  if (value.empty()) throw ParseError(std::string("missing ") + what);
}

AlgorithmMap resolve_map(const std::string& spec, const SchemeConfig& cfg) {
  const auto& names = builtin_map_names();
  if (std::find(names.begin(), names.end(), spec) != names.end()) return builtin_map(spec, cfg);
  return load_map(spec);
}

OptPolicy parse_policy(const std::string& s) {
  if (s == "grid") return OptPolicy::grid;
  if (s == "refined") return OptPolicy::refined;
  throw ParseError("--policy: expected grid or refined");
}

// ---------------------------------------------------------------------------
// Commands

int cmd_simplify(const RunConfig& rc, bool rescale, const std::string& ledger_path) {
  require_path(rc.instance, "--instance");
  Instance inst = instance_from_json(read_json(rc.instance));
  SchemeConfig cfg = rc.scheme;
  inst.eps = cfg.eps;
  auto res = simplify_pipeline(inst, cfg, PipelineOptions{rescale});
  Json parts = Json::array();
  for (const auto& [a, b] : res.parts.parts) parts.push_back({a, b});
  Json out{{"instance", instance_to_json(res.instance)},
           {"ledger", ledger_to_json(res.ledger)},
           {"factor", rat(res.factor())},
           {"parts", parts},
           {"safety_nets_fit", res.nets.has_value()}};
  if (!ledger_path.empty()) write_json(ledger_path, ledger_to_json(res.ledger));
  write_json(rc.output, out);
  return kExact;
}

int cmd_constants(const RunConfig& rc, int m, bool table) {
  auto r = theoretical_constants(rc.scheme.eps.value(), m, rc.scheme.d);
  Json j = constants_to_json(r);
  if (!table) {
    write_json(rc.output, j);
    return kExact;
  }
  std::ostringstream os;
  for (auto it = j.begin(); it != j.end(); ++it)
    os << std::left << std::setw(28) << it.key() << (it->is_string() ? it->get<std::string>() : it->dump()) << "\n";
  write_text(rc.output, os.str());
  return kExact;
}

int cmd_oracle(const RunConfig& rc, bool grid, bool witness) {
  require_path(rc.instance, "--instance");
  Instance inst = instance_from_json(read_json(rc.instance));
  OracleCache cache;
  if (!rc.cache.empty()) cache.load(rc.cache);
  Json out{{"grid", grid}};
  if (witness) {
    auto r = opt_value(inst, rc.scheme, grid);
    out["value"] = rat(r.value);
    out["exact"] = r.exact;
    out["nodes"] = r.stats.nodes;
    out["witness"] = schedule_to_json(r.witness, inst);
  } else {
    out["value"] = rat(cached_opt(inst, rc.scheme, grid, cache));
  }
  if (!rc.cache.empty()) cache.save(rc.cache);
  write_json(rc.output, out);
  return kExact;
}

int cmd_simulate(const RunConfig& rc) {
  require_path(rc.instance, "--instance");
  require_path(rc.map, "--map");
  Instance inst = instance_from_json(read_json(rc.instance));
  auto map = resolve_map(rc.map, rc.scheme);
  auto res = simulate(map, inst, rc.scheme);
  Json steps = Json::array();
  for (const auto& s : res.steps) steps.push_back({{"x", s.x}, {"key", s.key}, {"action", s.action}});
  write_json(rc.output, {{"map", map.name},
                         {"raw", rat(res.raw.value())},
                         {"snapped", rat(res.snapped.value())},
                         {"schedule", schedule_to_json(res.schedule, res.instance)},
                         {"steps", steps}});
  return kExact;
}

void emit_report(const RunConfig& rc, const CompetitiveReport& rep) {
  write_json(rc.output, report_to_json(rep));
  if (!rc.csv.empty()) {
    std::ostringstream os;
    os << "key,x,value,opt,ratio,witness\n";
    for (const auto& e : rep.ends)
      os << '"' << e.key << "\"," << e.x << "," << rat(e.value) << "," << rat(e.opt) << "," << rat(e.ratio) << ",\""
         << e.witness << "\"\n";
    write_text(rc.csv, os.str());
  }
}

int cmd_evaluate(const RunConfig& rc, const std::string& policy_name) {
  require_path(rc.universe, "--universe");
  if (rc.map.empty() == rc.randomized.empty()) throw ParseError("give exactly one of --map and --randomized");
  auto u = universe_from_json(read_json(rc.universe), rc.scheme);
  const OptPolicy policy = parse_policy(policy_name);
  OracleCache cache;
  if (!rc.cache.empty()) cache.load(rc.cache);
  CompetitiveReport rep;
  if (!rc.map.empty()) {
    rep = evaluate_map(resolve_map(rc.map, rc.scheme), u, rc.scheme, policy, rc.jobs, &cache);
  } else {
    auto g = load_randomized_map(rc.randomized);
    if (!g.discretized(rc.scheme.delta)) std::cerr << "note: probabilities are not multiples of delta\n";
    rep = evaluate_randomized_map(g, u, rc.scheme, policy, &cache);
  }
  if (!rc.cache.empty()) cache.save(rc.cache);
  emit_report(rc, rep);
  return rep.exact ? kExact : kHeuristic;
}

int cmd_search(const RunConfig& rc, const std::string& mode, int lookahead, const std::string& fallback,
               const std::string& map_out, const std::string& policy_name) {
  require_path(rc.universe, "--universe");
  auto u = universe_from_json(read_json(rc.universe), rc.scheme);
  const OptPolicy policy = parse_policy(policy_name);
  OracleCache cache;
  if (!rc.cache.empty()) cache.load(rc.cache);
  CompetitiveReport rep;
  if (mode == "randomized") {
    auto [g, r] = search_randomized_map(u, rc.scheme, policy, &cache);
    if (!map_out.empty()) save_randomized_map(g, map_out);
    rep = std::move(r);
  } else {
    SearchResult res;
    if (mode == "heuristic")
      res = heuristic_search(u, rc.scheme, builtin_map(fallback, rc.scheme), lookahead, policy, &cache);
    else if (mode == "bb")
      res = search_best_map(u, rc.scheme, SearchMode::branch_and_bound, policy, &cache);
    else if (mode == "exhaustive")
      res = search_best_map(u, rc.scheme, SearchMode::exhaustive, policy, &cache);
    else
      throw ParseError("--mode: expected bb, exhaustive, heuristic or randomized");
    if (!map_out.empty()) save_map(res.map, map_out);
    rep = std::move(res.report);
  }
  if (!rc.cache.empty()) cache.save(rc.cache);
  emit_report(rc, rep);
  return rep.exact ? kExact : kHeuristic;
}

int cmd_report(const RunConfig& rc, const std::vector<std::string>& files, bool csv) {
  std::vector<ReportRow> rows;
  for (const auto& f : files) rows.push_back(report_row_from_json(read_json(f), f));
  write_text(rc.output, comparison_table(rows, csv));
  bool exact = std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.exact; });
  return exact ? kExact : kHeuristic;
}

void log_run(const RunConfig& rc, const std::string& command, int code, double secs) {
  if (rc.log.empty()) return;
  std::ofstream out(rc.log, std::ios::app);
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%S", std::localtime(&now));
  out << stamp << " " << command << " exit=" << code << " seconds=" << secs << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Competitive-ratio schemes for online scheduling: simplify, evaluate and search algorithm maps"};
  app.require_subcommand(1);
  RunConfig rc;
  app.add_option("--config", rc.config_path, "JSON config file (scheme section and paths)");
  app.add_option("--set", rc.overrides, "Scheme override key=value, applied after the config file");
  app.add_option("--jobs", rc.jobs, "Worker threads for oracle fan-out");
  app.add_option("--log", rc.log, "Append a timestamped line per run to this file");
  app.add_option("-o,--out", rc.output, "Output file (default: stdout)");

  auto* simplify_cmd = app.add_subcommand("simplify", "Run the simplification pipeline on an instance");
  bool rescale = false;
  std::string ledger_path;
  simplify_cmd->add_option("--instance", rc.instance, "Instance JSON");
  simplify_cmd->add_flag("--rescale-parts", rescale, "Rescale part weights (non-preemptive)");
  simplify_cmd->add_option("--ledger", ledger_path, "Also write the certificate ledger here");

  auto* constants_cmd = app.add_subcommand("constants", "Theoretical constants for eps and m");
  int machines = 1;
  bool table = false;
  constants_cmd->add_option("-m,--machines", machines, "Number of machines");
  constants_cmd->add_flag("--table", table, "Print a table instead of JSON");

  auto* oracle_cmd = app.add_subcommand("oracle", "Optimal offline value of an instance");
  bool grid = false, witness = false;
  oracle_cmd->add_option("--instance", rc.instance, "Instance JSON");
  oracle_cmd->add_flag("--grid", grid, "Restrict to the interval grid shared with algorithm maps");
  oracle_cmd->add_flag("--witness", witness, "Print an optimal schedule (bypasses the cache)");
  oracle_cmd->add_option("--cache", rc.cache, "Oracle cache file (JSON lines)");

  auto* simulate_cmd = app.add_subcommand("simulate", "Run an algorithm map on an instance");
  simulate_cmd->add_option("--instance", rc.instance, "Rounded instance JSON");
  simulate_cmd->add_option("--map", rc.map, "Built-in map name or map file");

  std::string policy = "grid";
  auto* evaluate_cmd = app.add_subcommand("evaluate", "rho' of a map over a universe");
  evaluate_cmd->add_option("--universe", rc.universe, "Universe JSON");
  evaluate_cmd->add_option("--map", rc.map, "Built-in map name or map file");
  evaluate_cmd->add_option("--randomized", rc.randomized, "Randomized map file");
  evaluate_cmd->add_option("--policy", policy, "grid or refined");
  evaluate_cmd->add_option("--cache", rc.cache, "Oracle cache file");
  evaluate_cmd->add_option("--csv", rc.csv, "Also write per-end-configuration ratios as CSV");

  auto* search_cmd = app.add_subcommand("search", "Best map over a universe");
  std::string mode = "bb", fallback = "srpt", map_out;
  int lookahead = 4;
  search_cmd->add_option("--universe", rc.universe, "Universe JSON");
  search_cmd->add_option("--mode", mode, "bb, exhaustive, heuristic or randomized");
  search_cmd->add_option("--heuristic", lookahead, "Lookahead in intervals for the heuristic mode");
  search_cmd->add_option("--fallback", fallback, "Built-in map completing partial maps in the heuristic mode");
  search_cmd->add_option("--map-out", map_out, "Write the best map here");
  search_cmd->add_option("--policy", policy, "grid or refined");
  search_cmd->add_option("--cache", rc.cache, "Oracle cache file");
  search_cmd->add_option("--csv", rc.csv, "Also write per-end-configuration ratios as CSV");

  auto* report_cmd = app.add_subcommand("report", "Merge reports into one comparison table");
  std::vector<std::string> report_files;
  bool csv = false;
  report_cmd->add_option("reports", report_files, "Report JSON files")->required();
  report_cmd->add_flag("--csv", csv, "CSV instead of a text table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kError;
  }

  const auto t0 = std::chrono::steady_clock::now();
  const std::string command = app.get_subcommands().front()->get_name();
  int code = kError;
  try {
    resolve(rc);
    if (simplify_cmd->parsed()) code = cmd_simplify(rc, rescale, ledger_path);
    else if (constants_cmd->parsed()) code = cmd_constants(rc, machines, table);
    else if (oracle_cmd->parsed()) code = cmd_oracle(rc, grid, witness);
    else if (simulate_cmd->parsed()) code = cmd_simulate(rc);
    else if (evaluate_cmd->parsed()) code = cmd_evaluate(rc, policy);
    else if (search_cmd->parsed()) code = cmd_search(rc, mode, lookahead, fallback, map_out, policy);
    else if (report_cmd->parsed()) code = cmd_report(rc, report_files, csv);
  } catch (const SearchRefusal& e) {
    std::cerr << "refused: " << e.what() << "\n";
    code = kRefusal;
  } catch (const OracleRefusal& e) {
    std::cerr << "refused: " << e.what() << "\n";
    code = kRefusal;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = kError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = kError;
  }
  log_run(rc, command, code, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return code;
}
