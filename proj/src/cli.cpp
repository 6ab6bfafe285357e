#include "ehrelay/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "ehrelay/oracle.hpp"
#include "ehrelay/sgp.hpp"

namespace ehrelay::cli {

namespace {

// Order of keys in the echo and in --help.
const std::vector<std::string> kKeys = {
    "command", "out", "format", "p_db", "budget", "eta", "n0", "gains", "eps", "known",
    "eps_grid", "csi_cases", "seed", "restarts", "delta", "trials", "grid", "refinements", "timing"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) parts.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(x)) {
    throw ContractError(key + ": expected a number, got '" + v + "'");
  }
  return x;
}

template <class Int>
Int to_int(const std::string& key, const std::string& v) {
  Int x = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ContractError(key + ": expected an integer, got '" + v + "'");
  }
  return x;
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& p : split(v, ',')) out.push_back(to_double(key, p));
  if (out.empty()) throw ContractError(key + ": empty list");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw ContractError(key + ": expected true/false, got '" + v + "'");
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v[i]);
  return s;
}

void set_key(CliConfig& cfg, const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "command") {
    if (std::find(kSubcommands.begin(), kSubcommands.end(), v) == kSubcommands.end()) {
      throw ContractError("unknown command '" + v + "'");
    }
    cfg.command = v;
  } else if (key == "out") {
    cfg.out = v;
  } else if (key == "format") {
    cfg.format = output_format_from_string(v);
  } else if (key == "p_db") {
    cfg.p_db = to_doubles(key, v);
    cfg.budget.reset();
  } else if (key == "budget") {
    cfg.budget = to_double(key, v);
    cfg.p_db.clear();
  } else if (key == "eta") {
    cfg.eta = to_double(key, v);
  } else if (key == "n0") {
    cfg.n0 = to_double(key, v);
  } else if (key == "gains") {
    const auto g = to_doubles(key, v);
    if (g.size() != 3) throw ContractError("gains: expected g1,g2,gJ");
    cfg.gains = ChannelRealization{g[0], g[1], g[2]};
  } else if (key == "eps") {
    const auto e = to_doubles(key, v);
    if (e.size() == 1) {
      cfg.eps = std::array<double, 3>{e[0], e[0], e[0]};
    } else if (e.size() == 3) {
      cfg.eps = std::array<double, 3>{e[0], e[1], e[2]};
    } else {
      throw ContractError("eps: expected e or e1,e2,eJ");
    }
  } else if (key == "known") {
    cfg.known = parse_known_mask(v);
  } else if (key == "eps_grid") {
    cfg.eps_grid = to_doubles(key, v);
  } else if (key == "csi_cases") {
    cfg.csi_cases.clear();
    for (const auto& item : split(v, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw ContractError("csi_cases: expected label:mask, got '" + item + "'");
      cfg.csi_cases.push_back({trim(item.substr(0, colon)), parse_known_mask(trim(item.substr(colon + 1)))});
    }
  } else if (key == "seed") {
    cfg.seed = to_int<std::uint64_t>(key, v);
  } else if (key == "restarts") {
    cfg.restarts = to_int<int>(key, v);
  } else if (key == "delta") {
    cfg.delta = to_double(key, v);
  } else if (key == "trials") {
    cfg.trials = to_int<int>(key, v);
  } else if (key == "grid") {
    cfg.grid = to_int<int>(key, v);
  } else if (key == "refinements") {
    cfg.refinements = to_int<int>(key, v);
  } else if (key == "timing") {
    cfg.timing = to_bool(key, v);
  } else {
    throw ContractError("unknown setting '" + key + "'");
  }
}

void check_conflicts(const std::set<std::string>& keys, const std::string& where) {
  if (keys.count("p_db") && keys.count("budget")) {
    throw ContractError(where + ": p_db and budget are mutually exclusive");
  }
}

void validate(const CliConfig& cfg) {
  if (cfg.command.empty()) throw ContractError("no command given");
  const bool single = cfg.command == "solve" || cfg.command == "verify";
  if (single && cfg.p_db.size() > 1) throw ContractError(cfg.command + " takes a single --p-db");
  if (!single && cfg.budget) throw ContractError("--budget applies to solve and verify only");
  if (!single && cfg.eps) throw ContractError("--eps applies to solve and verify; use --eps-grid");
  if (cfg.command != "sweep-epsilon" && !cfg.csi_cases.empty()) {
    throw ContractError("--csi-cases applies to sweep-epsilon only");
  }
  if (cfg.budget && !(*cfg.budget >= 0.0)) throw ContractError("budget must be nonnegative");
  if (cfg.trials < 1) throw ContractError("trials must be at least 1");
  if (cfg.grid < 2) throw ContractError("grid needs at least 2 points per axis");
  if (cfg.refinements < 1) throw ContractError("refinements must be at least 1");
  if (cfg.eps) CsiErrorBounds{(*cfg.eps)[0], (*cfg.eps)[1], (*cfg.eps)[2], cfg.known}.validate();
}

SgpConfig sgp_config(const CliConfig& cfg, SgpConfig s = {}) {
  s.seed = cfg.seed;
  s.restarts = cfg.restarts;
  if (cfg.delta) s.delta = *cfg.delta;
  s.validate();
  return s;
}

SystemParams single_system(const CliConfig& cfg) {
  SystemParams sys;
  sys.eta = cfg.eta;
  sys.N0 = cfg.n0;
  if (cfg.budget) {
    sys.P = *cfg.budget;
  } else {
    sys.P = budget_from_db(cfg.p_db.empty() ? 20.0 : cfg.p_db.front(), cfg.n0);
  }
  sys.validate();
  return sys;
}

std::optional<CsiErrorBounds> single_bounds(const CliConfig& cfg) {
  if (!cfg.eps) return std::nullopt;
  CsiErrorBounds e{(*cfg.eps)[0], (*cfg.eps)[1], (*cfg.eps)[2], cfg.known};
  if (e.all_zero()) return std::nullopt;
  return e;
}

double p_db_of(const CliConfig& cfg, const SystemParams& sys) {
  if (!cfg.budget) return cfg.p_db.empty() ? 20.0 : cfg.p_db.front();
  return sys.P > 0.0 ? 10.0 * std::log10(sys.P / sys.N0) : -INFINITY;
}

ResultRow row_of(const CliConfig& cfg, const SystemParams& sys, const ChannelRealization& ch,
                 const std::optional<CsiErrorBounds>& err, const std::string& policy, const SgpResult& r) {
  ResultRow row;
  row.policy = policy;
  row.p_db = p_db_of(cfg, sys);
  row.P = sys.P;
  row.eps = err ? std::max({err->eps1, err->eps2, err->epsJ}) : 0.0;
  row.csi_case = "-";
  row.known = cfg.known;
  row.channel = ch;
  row.c_sum = r.c_sum;
  row.P1 = r.best_alloc.P1;
  row.P2 = r.best_alloc.P2;
  row.PJ = r.best_alloc.PJ;
  row.beta = r.best_alloc.beta;
  row.harvested_energy = harvested_energy(r.best_alloc, err ? worst_case_channel(ch, *err) : ch, sys);
  row.case_id = r.best_case;
  row.iterations = r.total_iterations;
  row.converged = r.converged;
  return row;
}

class Writer {
 public:
  Writer(const CliConfig& cfg, std::ostream& fallback) : fallback_(fallback) {
    if (!cfg.out.empty()) {
      file_.open(cfg.out, std::ios::binary);
      if (!file_) throw std::ios_base::failure("cannot open '" + cfg.out + "' for writing");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : fallback_; }
  void finish() {
    stream().flush();
    if (!stream()) throw std::ios_base::failure("write failed");
  }

 private:
  std::ofstream file_;
  std::ostream& fallback_;
};

OutputMetadata metadata(const CliConfig& cfg) {
  OutputMetadata m;
  m.git_describe = build_describe();
  m.seed = cfg.seed;
  m.config = config_echo(cfg);
  return m;
}

void emit_rows(const CliConfig& cfg, const std::vector<ResultRow>& rows,
               const std::vector<SummaryRow>& summary, std::ostream& out) {
  Writer w(cfg, out);
  if (cfg.format.value_or(OutputFormat::Csv) == OutputFormat::Json) {
    write_json(w.stream(), rows, summary, metadata(cfg), cfg.timing);
  } else {
    write_csv(w.stream(), rows, cfg.timing);
  }
  w.finish();
}

void print_result(std::ostream& os, const std::string& label, const SgpResult& r, double P) {
  const auto n = format_number;
  os << label << "case: " << to_string(r.best_case) << '\n'
     << label << "c_sum: " << n(r.c_sum) << '\n'
     << label << "P1: " << n(r.best_alloc.P1) << '\n'
     << label << "P2: " << n(r.best_alloc.P2) << '\n'
     << label << "PJ: " << n(r.best_alloc.PJ) << '\n'
     << label << "beta: " << n(r.best_alloc.beta) << '\n'
     << label << "beta_tilde: " << n(r.best_alloc.beta_tilde) << '\n'
     << label << "total_power: " << n(r.best_alloc.total_power()) << '\n'
     << label << "budget: " << n(P) << '\n'
     << label << "iterations: " << r.iterations << '\n'
     << label << "converged: " << (r.converged ? "true" : "false") << '\n';
}

// Anything the optimizer returns must be a feasible allocation.
void check_feasible(const SgpResult& r, const SystemParams& sys) {
  try {
    r.best_alloc.validate(sys.P, 1e-8 * std::max(1.0, sys.P));
  } catch (const ContractError& e) {
    throw std::runtime_error(std::string("optimizer returned an infeasible allocation: ") + e.what());
  }
  if (!std::isfinite(r.c_sum)) throw std::runtime_error("optimizer returned a non-finite rate");
}

ChannelRealization single_channel(const CliConfig& cfg) {
  return cfg.gains.value_or(kBetaSweepChannel);
}

int cmd_solve(const CliConfig& cfg, std::ostream& out) {
  const SystemParams sys = single_system(cfg);
  const ChannelRealization ch = single_channel(cfg);
  ch.validate();
  const auto err = single_bounds(cfg);
  const SgpResult r = optimize(ch, sys, err, sgp_config(cfg));
  check_feasible(r, sys);
  if (!cfg.format && cfg.out.empty()) {
    print_result(out, "", r, sys.P);
    return kExitOk;
  }
  emit_rows(cfg, {row_of(cfg, sys, ch, err, "optimal", r)}, {}, out);
  return kExitOk;
}

int cmd_verify(const CliConfig& cfg, std::ostream& out) {
  const SystemParams sys = single_system(cfg);
  const ChannelRealization ch = single_channel(cfg);
  ch.validate();
  const auto err = single_bounds(cfg);
  const SgpResult s = optimize(ch, sys, err, sgp_config(cfg));
  check_feasible(s, sys);
  GridSpec grid;
  grid.n_beta = cfg.grid;
  grid.n_power = cfg.grid;
  grid.refinement_levels = cfg.refinements;
  const SgpResult o = grid_search(ch, sys, err, grid);
  const double gap = std::abs(s.c_sum - o.c_sum);
  const double tol = std::max(0.02 * o.c_sum, 5e-3);
  const bool pass = gap <= tol;

  if (!cfg.format && cfg.out.empty()) {
    print_result(out, "sgp.", s, sys.P);
    print_result(out, "oracle.", o, sys.P);
    out << "gap: " << format_number(gap) << '\n'
        << "tolerance: " << format_number(tol) << '\n'
        << "result: " << (pass ? "pass" : "fail") << '\n';
  } else {
    emit_rows(cfg, {row_of(cfg, sys, ch, err, "optimal", s), row_of(cfg, sys, ch, err, "oracle", o)}, {}, out);
  }
  return pass ? kExitOk : kExitGap;
}

ExperimentPlan study_plan(const CliConfig& cfg, ExperimentPlan plan) {
  if (!cfg.p_db.empty()) plan.power_grid_db = cfg.p_db;
  if (!cfg.eps_grid.empty()) plan.epsilon_grid = cfg.eps_grid;
  if (!cfg.csi_cases.empty()) plan.csi_cases = cfg.csi_cases;
  if (cfg.gains) plan.channels = cfg.gains;
  if (plan.kind != ExperimentKind::EpsilonSweep) plan.csi_cases = {{"-", cfg.known}};
  plan.eta = cfg.eta;
  plan.N0 = cfg.n0;
  plan.seed = cfg.seed;
  plan.sgp = sgp_config(cfg, plan.sgp);
  plan.validate();
  return plan;
}

int cmd_study(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  ExperimentPlan plan;
  if (cfg.command == "sweep-beta") {
    plan = ExperimentPlan::beta_sweep();
  } else if (cfg.command == "compare-alloc") {
    plan = ExperimentPlan::alloc_compare();
  } else if (cfg.command == "sweep-epsilon") {
    plan = ExperimentPlan::epsilon_sweep();
  } else {
    plan = ExperimentPlan::monte_carlo(cfg.trials, cfg.seed);
  }
  plan = study_plan(cfg, plan);
  const std::vector<ResultRow> rows = run_experiment(plan);
  std::vector<SummaryRow> summary;
  if (plan.kind == ExperimentKind::MonteCarlo) {
    summary = summarize(rows);
    for (const SummaryRow& s : summary) {
      err << "P_dB=" << format_number(s.p_db) << " eps=" << format_number(s.eps)
          << " mean=" << format_number(s.mean) << " stderr=" << format_number(s.stderr_mean)
          << " failures=" << s.failures << '/' << s.trials << '\n';
    }
  }
  if (plan.kind == ExperimentKind::EpsilonSweep && plan.power_grid_db.size() == 1) {
    const std::string ref = plan.csi_cases.back().label;
    const auto x = jammer_crossover(rows, ref);
    err << "jammer crossover (" << ref << "): " << (x ? format_number(*x) : "none") << '\n';
  }
  emit_rows(cfg, rows, summary, out);
  for (const ResultRow& r : rows) {
    if (!r.ok && plan.kind != ExperimentKind::MonteCarlo) return kExitSolver;
  }
  return kExitOk;
}

struct FlagSpec {
  std::string name;
  std::string key;
  std::string help;
};

const std::vector<FlagSpec>& flag_specs() {
  static const std::vector<FlagSpec> specs = {
      {"--out", "out", "output file (default stdout)"},
      {"--format", "format", "csv|json"},
      {"--p-db", "p_db", "budget(s) in dB relative to N0, comma separated"},
      {"--budget", "budget", "linear budget (solve/verify)"},
      {"--eta", "eta", "energy conversion efficiency"},
      {"--n0", "n0", "noise power"},
      {"--gains", "gains", "g1,g2,gJ"},
      {"--eps", "eps", "e1,e2,eJ or a single value (solve/verify)"},
      {"--known", "known", "known-link mask, three 0/1 characters for links 1,2,J"},
      {"--eps-grid", "eps_grid", "epsilon values for studies"},
      {"--csi-cases", "csi_cases", "label:mask list for sweep-epsilon"},
      {"--seed", "seed", "random seed"},
      {"--restarts", "restarts", "random SGP starts besides the equal split"},
      {"--delta", "delta", "relative convergence tolerance (default 1e-4, 1e-8 for sweep-epsilon)"},
      {"--trials", "trials", "Monte-Carlo trials"},
      {"--grid", "grid", "oracle points per axis (verify)"},
      {"--refinements", "refinements", "oracle zoom passes (verify)"},
      {"--timing", "timing", "include wall-clock seconds in result files (true/false)"},
  };
  return specs;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContractError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliConfig parse_impl(CLI::App& app, int argc, const char* const* argv) {
  std::string config_path;
  std::map<std::string, std::string> flags;
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", config_path, "key=value settings file");
  for (const auto& f : flag_specs()) {
    app.add_option_function<std::string>(
        f.name, [&flags, key = f.key](const std::string& v) { flags[key] = v; }, f.help);
  }
  const std::map<std::string, std::string> about = {
      {"solve", "optimize one instance and print the allocation"},
      {"sweep-beta", "optimal beta against fixed beta values over the budget grid"},
      {"compare-alloc", "optimal against equal power allocation over budgets and epsilon"},
      {"sweep-epsilon", "rate and jammer power over epsilon for several known-link masks"},
      {"monte-carlo", "average over Rayleigh-faded channel draws"},
      {"verify", "compare the optimizer with the grid-search oracle on one instance"}};
  for (const auto& name : kSubcommands) app.add_subcommand(name, about.at(name));
  app.parse(argc, argv);

  CliConfig cfg;
  if (!config_path.empty()) {
    apply_config_text(cfg, read_file(config_path));
    cfg.config_path = config_path;
  }
  std::set<std::string> keys;
  for (const auto& [k, v] : flags) keys.insert(k);
  check_conflicts(keys, "flags");
  for (const auto& key : kKeys) {
    auto it = flags.find(key);
    if (it != flags.end()) set_key(cfg, key, it->second);
  }
  cfg.command = app.get_subcommands().front()->get_name();
  validate(cfg);
  return cfg;
}

}  // namespace

void apply_config_text(CliConfig& cfg, const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::set<std::string> seen;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ContractError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (!seen.insert(key).second) throw ContractError("config key '" + key + "' given twice");
    set_key(cfg, key, line.substr(eq + 1));
  }
  check_conflicts(seen, "config");
}

std::map<std::string, std::string> config_echo(const CliConfig& cfg) {
  std::map<std::string, std::string> m;
  if (!cfg.command.empty()) m["command"] = cfg.command;
  if (!cfg.out.empty()) m["out"] = cfg.out;
  if (cfg.format) m["format"] = *cfg.format == OutputFormat::Json ? "json" : "csv";
  if (!cfg.p_db.empty()) m["p_db"] = join(cfg.p_db);
  if (cfg.budget) m["budget"] = format_number(*cfg.budget);
  m["eta"] = format_number(cfg.eta);
  m["n0"] = format_number(cfg.n0);
  if (cfg.gains) m["gains"] = join({cfg.gains->g1, cfg.gains->g2, cfg.gains->gJ});
  if (cfg.eps) m["eps"] = join({(*cfg.eps)[0], (*cfg.eps)[1], (*cfg.eps)[2]});
  m["known"] = format_known_mask(cfg.known);
  if (!cfg.eps_grid.empty()) m["eps_grid"] = join(cfg.eps_grid);
  if (!cfg.csi_cases.empty()) {
    std::string s;
    for (std::size_t i = 0; i < cfg.csi_cases.size(); ++i) {
      s += (i ? "," : "") + cfg.csi_cases[i].label + ":" + format_known_mask(cfg.csi_cases[i].known);
    }
    m["csi_cases"] = s;
  }
  m["seed"] = std::to_string(cfg.seed);
  m["restarts"] = std::to_string(cfg.restarts);
  if (cfg.delta) m["delta"] = format_number(*cfg.delta);
  m["trials"] = std::to_string(cfg.trials);
  m["grid"] = std::to_string(cfg.grid);
  m["refinements"] = std::to_string(cfg.refinements);
  m["timing"] = cfg.timing ? "true" : "false";
  return m;
}

std::string config_text(const CliConfig& cfg) {
  const auto m = config_echo(cfg);
  std::string s;
  for (const auto& key : kKeys) {
    auto it = m.find(key);
    if (it != m.end()) s += key + "=" + it->second + "\n";
  }
  return s;
}

CliConfig parse_args(int argc, const char* const* argv) {
  CLI::App app{"Secrecy-rate optimization for an energy-harvesting untrusted relay", "ehrelay"};
  return parse_impl(app, argc, argv);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Secrecy-rate optimization for an energy-harvesting untrusted relay", "ehrelay"};
  CliConfig cfg;
  try {
    cfg = parse_impl(app, argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (cfg.command == "solve") return cmd_solve(cfg, out);
    if (cfg.command == "verify") return cmd_verify(cfg, out);
    return cmd_study(cfg, out, err);
  } catch (const ContractError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  }
}

}  // namespace ehrelay::cli
