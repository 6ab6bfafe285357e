#include "ehrelay/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <random>
#include <thread>

#include "json.hpp"

#ifndef EHRELAY_GIT_DESCRIBE
#define EHRELAY_GIT_DESCRIBE "unknown"
#endif

namespace ehrelay {

namespace {

constexpr double kBetaLo = 1e-3;
constexpr double kBetaHi = 1.0 - 1e-3;
constexpr int kBetaScan = 100;

using Task = std::function<ResultRow()>;

// Runs every task and returns the rows in task order, whatever the thread count.
std::vector<ResultRow> run_tasks(const std::vector<Task>& tasks, unsigned threads) {
  std::vector<ResultRow> rows(tasks.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, tasks.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) rows[i] = tasks[i]();
  };
  if (threads <= 1) {
    worker();
    return rows;
  }
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  pool.clear();
  return rows;
}

SystemParams system_at(const ExperimentPlan& plan, double p_db) {
  return {budget_from_db(p_db, plan.N0), plan.eta, plan.N0, plan.T};
}

std::optional<CsiErrorBounds> bounds(double eps, const std::array<bool, 3>& known) {
  if (eps == 0.0) return std::nullopt;
  return CsiErrorBounds::uniform(eps, known);
}

std::string beta_label(double beta) { return "beta=" + format_number(beta); }

ResultRow base_row(const std::string& policy, double p_db, const SystemParams& sys, double eps,
                   const CsiCase& cc, int trial, const ChannelRealization& ch) {
  ResultRow r;
  r.policy = policy;
  r.p_db = p_db;
  r.P = sys.P;
  r.eps = eps;
  r.csi_case = cc.label;
  r.known = cc.known;
  r.trial = trial;
  r.channel = ch;
  return r;
}

void fill(ResultRow& r, const Allocation& a, const SecrecyOutcome& out, const ChannelRealization& ch,
          const SystemParams& sys, const std::optional<CsiErrorBounds>& err) {
  r.P1 = a.P1;
  r.P2 = a.P2;
  r.PJ = a.PJ;
  r.beta = a.beta;
  r.c_sum = out.c_sum;
  r.case_id = out.case_id;
  // The relay harvests from the true (worst-case) channel.
  const ChannelRealization truth = err ? worst_case_channel(ch, *err) : ch;
  r.harvested_energy = harvested_energy(a, truth, sys);
}

template <class F>
ResultRow timed(ResultRow row, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(row);
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
    row.c_sum = std::numeric_limits<double>::quiet_NaN();
  }
  row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

Task optimal_task(const ExperimentPlan& plan, const std::string& policy, double p_db, double eps,
                  const CsiCase& cc, int trial, const ChannelRealization& ch,
                  std::optional<double> fixed_beta) {
  return [=, &plan] {
    const SystemParams sys = system_at(plan, p_db);
    return timed(base_row(policy, p_db, sys, eps, cc, trial, ch), [&](ResultRow& r) {
      SgpConfig cfg = plan.sgp;
      cfg.fixed_beta = fixed_beta;
      const auto err = bounds(eps, cc.known);
      const SgpResult res = optimize(ch, sys, err, cfg);
      fill(r, res.best_alloc, res.outcome, ch, sys, err);
      r.iterations = res.total_iterations;
      r.converged = res.converged;
    });
  };
}

Task equal_task(const ExperimentPlan& plan, double p_db, double eps, const CsiCase& cc,
                const ChannelRealization& ch) {
  return [=, &plan] {
    const SystemParams sys = system_at(plan, p_db);
    return timed(base_row("equal", p_db, sys, eps, cc, 0, ch), [&](ResultRow& r) {
      const auto err = bounds(eps, cc.known);
      const Allocation a = plan.equal_optimize_beta
                               ? best_equal_split(ch, sys, err)
                               : Allocation::equal_split(sys.P, plan.equal_beta);
      fill(r, a, secrecy_outcome(a, ch, sys, err), ch, sys, err);
    });
  };
}

void require_kind(const ExperimentPlan& plan, ExperimentKind kind) {
  plan.validate();
  if (plan.kind != kind) {
    throw ContractError("plan is for " + to_string(plan.kind) + ", not " + to_string(kind));
  }
}

ChannelRealization fixed_or(const ExperimentPlan& plan, const ChannelRealization& fallback) {
  return plan.channels.value_or(fallback);
}

}  // namespace

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::BetaSweep: return "sweep-beta";
    case ExperimentKind::AllocCompare: return "compare-alloc";
    case ExperimentKind::EpsilonSweep: return "sweep-epsilon";
    case ExperimentKind::MonteCarlo: return "monte-carlo";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  for (auto k : {ExperimentKind::BetaSweep, ExperimentKind::AllocCompare,
                 ExperimentKind::EpsilonSweep, ExperimentKind::MonteCarlo}) {
    if (to_string(k) == s) return k;
  }
  throw ContractError("unknown experiment '" + s + "'");
}

std::array<bool, 3> parse_known_mask(const std::string& s) {
  if (s.size() != 3) throw ContractError("known mask needs three 0/1 characters: '" + s + "'");
  std::array<bool, 3> m{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (s[i] != '0' && s[i] != '1') throw ContractError("known mask needs 0/1 characters: '" + s + "'");
    m[i] = s[i] == '1';
  }
  return m;
}

std::string format_known_mask(const std::array<bool, 3>& m) {
  std::string s;
  for (bool b : m) s += b ? '1' : '0';
  return s;
}

std::vector<CsiCase> default_csi_cases() {
  return {{"I", {false, false, false}}, {"II", {false, false, true}}, {"III", {true, true, false}}};
}

void FadingSpec::validate() const {
  for (double m : {mean1, mean2, meanJ}) {
    if (!(m > 0.0) || !std::isfinite(m)) throw ContractError("fading means must be positive");
  }
}

void ExperimentPlan::validate() const {
  if (power_grid_db.empty()) throw ContractError("power grid is empty");
  if (epsilon_grid.empty()) throw ContractError("epsilon grid is empty");
  if (csi_cases.empty()) throw ContractError("no CSI cases given");
  if (trials < 1) throw ContractError("trials must be at least 1");
  for (double p : power_grid_db) {
    if (!std::isfinite(p)) throw ContractError("power grid entries must be finite");
  }
  for (double e : epsilon_grid) {
    if (!(e >= 0.0) || !std::isfinite(e)) throw ContractError("epsilon grid entries must be >= 0");
  }
  for (double b : fixed_betas) {
    if (!(b > 0.0 && b < 1.0)) throw ContractError("fixed betas must lie in (0,1)");
  }
  if (channels) channels->validate();
  fading.validate();
  system_at(*this, power_grid_db.front()).validate();
  sgp.validate();
}

ExperimentPlan ExperimentPlan::beta_sweep() {
  ExperimentPlan p;
  p.kind = ExperimentKind::BetaSweep;
  p.channels = kBetaSweepChannel;
  return p;
}

ExperimentPlan ExperimentPlan::alloc_compare() {
  ExperimentPlan p;
  p.kind = ExperimentKind::AllocCompare;
  p.channels = kBetaSweepChannel;
  p.epsilon_grid = {0.0, 0.05, 0.1};
  return p;
}

ExperimentPlan ExperimentPlan::epsilon_sweep() {
  ExperimentPlan p;
  p.kind = ExperimentKind::EpsilonSweep;
  p.channels = kEpsilonSweepChannel;
  p.power_grid_db = {30.0};
  p.epsilon_grid.clear();
  for (int i = 0; i <= 10; ++i) p.epsilon_grid.push_back(i / 100.0);
  p.csi_cases = default_csi_cases();
  // Jammer power is reported, and the rate is flat in it near the optimum.
  p.sgp.delta = 1e-8;
  return p;
}

ExperimentPlan ExperimentPlan::monte_carlo(int trials, std::uint64_t seed) {
  ExperimentPlan p;
  p.kind = ExperimentKind::MonteCarlo;
  p.power_grid_db = {20.0};
  p.trials = trials;
  p.seed = seed;
  p.sgp.seed = seed;
  return p;
}

Allocation best_equal_split(const ChannelRealization& ch, const SystemParams& sys,
                            const std::optional<CsiErrorBounds>& err) {
  auto rate = [&](double b) { return secrecy_outcome(Allocation::equal_split(sys.P, b), ch, sys, err).c_sum; };
  // Coarse scan first: the rate in beta need not be unimodal.
  int best_i = 0;
  double best = -1.0;
  const double step = (kBetaHi - kBetaLo) / kBetaScan;
  for (int i = 0; i <= kBetaScan; ++i) {
    const double v = rate(kBetaLo + i * step);
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  double lo = kBetaLo + std::max(best_i - 1, 0) * step;
  double hi = kBetaLo + std::min(best_i + 1, kBetaScan) * step;
  double best_beta = kBetaLo + best_i * step;

  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - invphi * (hi - lo);
  double d = lo + invphi * (hi - lo);
  double fc = rate(c);
  double fd = rate(d);
  while (hi - lo > 1e-9) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - invphi * (hi - lo);
      fc = rate(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + invphi * (hi - lo);
      fd = rate(d);
    }
  }
  const double mid = 0.5 * (lo + hi);
  if (rate(mid) > best) best_beta = mid;
  return Allocation::equal_split(sys.P, best_beta);
}

std::vector<ResultRow> run_beta_sweep(const ExperimentPlan& plan) {
  require_kind(plan, ExperimentKind::BetaSweep);
  const ChannelRealization ch = fixed_or(plan, kBetaSweepChannel);
  const CsiCase& cc = plan.csi_cases.front();
  std::vector<double> betas = plan.fixed_betas;
  std::sort(betas.begin(), betas.end());
  std::vector<Task> tasks;
  for (double p_db : plan.power_grid_db) {
    for (double eps : plan.epsilon_grid) {
      tasks.push_back(optimal_task(plan, "optimal", p_db, eps, cc, 0, ch, std::nullopt));
      for (double b : betas) tasks.push_back(optimal_task(plan, beta_label(b), p_db, eps, cc, 0, ch, b));
    }
  }
  return run_tasks(tasks, plan.threads);
}

std::vector<ResultRow> run_alloc_compare(const ExperimentPlan& plan) {
  require_kind(plan, ExperimentKind::AllocCompare);
  const ChannelRealization ch = fixed_or(plan, kBetaSweepChannel);
  const CsiCase& cc = plan.csi_cases.front();
  std::vector<Task> tasks;
  for (double p_db : plan.power_grid_db) {
    for (double eps : plan.epsilon_grid) {
      tasks.push_back(optimal_task(plan, "optimal", p_db, eps, cc, 0, ch, std::nullopt));
      tasks.push_back(equal_task(plan, p_db, eps, cc, ch));
    }
  }
  return run_tasks(tasks, plan.threads);
}

std::vector<ResultRow> run_epsilon_sweep(const ExperimentPlan& plan) {
  require_kind(plan, ExperimentKind::EpsilonSweep);
  const ChannelRealization ch = fixed_or(plan, kEpsilonSweepChannel);
  std::vector<Task> tasks;
  for (double p_db : plan.power_grid_db) {
    for (double eps : plan.epsilon_grid) {
      for (const CsiCase& cc : plan.csi_cases) {
        tasks.push_back(optimal_task(plan, "optimal", p_db, eps, cc, 0, ch, std::nullopt));
      }
    }
  }
  return run_tasks(tasks, plan.threads);
}

std::vector<ResultRow> run_monte_carlo(const ExperimentPlan& plan) {
  require_kind(plan, ExperimentKind::MonteCarlo);
  // Channels are drawn up front so they depend only on the seed.
  std::vector<ChannelRealization> draws;
  std::mt19937_64 rng(plan.seed);
  std::exponential_distribution<double> unit(1.0);
  for (int t = 0; t < plan.trials; ++t) {
    if (plan.channels) {
      draws.push_back(*plan.channels);
      continue;
    }
    const double g1 = plan.fading.mean1 * unit(rng);
    const double g2 = plan.fading.mean2 * unit(rng);
    const double gJ = plan.fading.meanJ * unit(rng);
    draws.push_back({g1, g2, gJ});
  }
  std::vector<Task> tasks;
  for (double p_db : plan.power_grid_db) {
    for (double eps : plan.epsilon_grid) {
      for (const CsiCase& cc : plan.csi_cases) {
        for (int t = 0; t < plan.trials; ++t) {
          tasks.push_back(optimal_task(plan, "optimal", p_db, eps, cc, t,
                                       draws[static_cast<std::size_t>(t)], std::nullopt));
        }
      }
    }
  }
  return run_tasks(tasks, plan.threads);
}

std::vector<ResultRow> run_experiment(const ExperimentPlan& plan) {
  switch (plan.kind) {
    case ExperimentKind::BetaSweep: return run_beta_sweep(plan);
    case ExperimentKind::AllocCompare: return run_alloc_compare(plan);
    case ExperimentKind::EpsilonSweep: return run_epsilon_sweep(plan);
    case ExperimentKind::MonteCarlo: return run_monte_carlo(plan);
  }
  throw ContractError("unknown experiment kind");
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  std::vector<SummaryRow> out;
  std::vector<std::vector<double>> samples;
  for (const ResultRow& r : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const SummaryRow& s) {
      return s.policy == r.policy && s.p_db == r.p_db && s.eps == r.eps && s.csi_case == r.csi_case;
    });
    if (it == out.end()) {
      out.push_back({r.policy, r.p_db, r.eps, r.csi_case});
      samples.emplace_back();
      it = out.end() - 1;
    }
    const auto k = static_cast<std::size_t>(it - out.begin());
    ++it->trials;
    if (r.ok && std::isfinite(r.c_sum)) {
      samples[k].push_back(r.c_sum);
    } else {
      ++it->failures;
    }
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto& v = samples[k];
    if (v.empty()) {
      out[k].mean = std::numeric_limits<double>::quiet_NaN();
      out[k].stderr_mean = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const auto n = static_cast<double>(v.size());
    out[k].mean = mean;
    out[k].stderr_mean = v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  }
  return out;
}

std::optional<double> jammer_crossover(const std::vector<ResultRow>& rows, const std::string& reference) {
  std::vector<double> eps;
  for (const ResultRow& r : rows) {
    if (std::find(eps.begin(), eps.end(), r.eps) == eps.end()) eps.push_back(r.eps);
  }
  std::sort(eps.begin(), eps.end());
  std::vector<double> diff;
  for (double e : eps) {
    double ref = std::numeric_limits<double>::quiet_NaN();
    double others = -std::numeric_limits<double>::infinity();
    for (const ResultRow& r : rows) {
      if (r.eps != e) continue;
      if (r.csi_case == reference) {
        ref = r.PJ;
      } else {
        others = std::max(others, r.PJ);
      }
    }
    diff.push_back(ref - others);
  }
  for (std::size_t i = 1; i < diff.size(); ++i) {
    if (diff[i - 1] > 0.0 && diff[i] <= 0.0) {
      const double w = diff[i - 1] / (diff[i - 1] - diff[i]);
      return eps[i - 1] + w * (eps[i] - eps[i - 1]);
    }
  }
  return std::nullopt;
}

OutputFormat output_format_from_string(const std::string& s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  throw ContractError("unknown output format '" + s + "'");
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

void csv_line(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << csv_field(fields[i]);
  }
  os << "\r\n";
}

const std::vector<std::string>& row_columns() {
  static const std::vector<std::string> cols = {
      "policy", "p_db", "P", "eps", "csi_case", "known", "trial", "g1", "g2", "gJ",
      "c_sum", "P1", "P2", "PJ", "beta", "harvested_energy", "case", "iterations",
      "converged", "ok", "error"};
  return cols;
}

std::vector<std::string> row_fields(const ResultRow& r) {
  const auto n = format_number;
  return {r.policy, n(r.p_db), n(r.P), n(r.eps), r.csi_case, format_known_mask(r.known),
          std::to_string(r.trial), n(r.channel.g1), n(r.channel.g2), n(r.channel.gJ),
          n(r.c_sum), n(r.P1), n(r.P2), n(r.PJ), n(r.beta), n(r.harvested_energy),
          to_string(r.case_id), std::to_string(r.iterations), r.converged ? "1" : "0",
          r.ok ? "1" : "0", r.error};
}

nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows, bool with_timing) {
  auto header = row_columns();
  if (with_timing) header.push_back("wall_seconds");
  csv_line(os, header);
  for (const ResultRow& r : rows) {
    auto f = row_fields(r);
    if (with_timing) f.push_back(format_number(r.wall_seconds));
    csv_line(os, f);
  }
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  csv_line(os, {"policy", "p_db", "eps", "csi_case", "trials", "failures", "mean", "stderr"});
  for (const SummaryRow& s : rows) {
    csv_line(os, {s.policy, format_number(s.p_db), format_number(s.eps), s.csi_case,
                  std::to_string(s.trials), std::to_string(s.failures), format_number(s.mean),
                  format_number(s.stderr_mean)});
  }
}

void write_json(std::ostream& os, const std::vector<ResultRow>& rows,
                const std::vector<SummaryRow>& summary, const OutputMetadata& meta, bool with_timing) {
  nlohmann::json doc;
  doc["metadata"] = {{"git_describe", meta.git_describe},
                     {"seed", meta.seed},
                     {"db_convention", meta.db_convention},
                     {"config", meta.config}};
  nlohmann::json arr = nlohmann::json::array();
  for (const ResultRow& r : rows) {
    nlohmann::json j = {{"policy", r.policy},
                        {"p_db", json_number(r.p_db)},
                        {"P", json_number(r.P)},
                        {"eps", json_number(r.eps)},
                        {"csi_case", r.csi_case},
                        {"known", format_known_mask(r.known)},
                        {"trial", r.trial},
                        {"g1", json_number(r.channel.g1)},
                        {"g2", json_number(r.channel.g2)},
                        {"gJ", json_number(r.channel.gJ)},
                        {"c_sum", json_number(r.c_sum)},
                        {"P1", json_number(r.P1)},
                        {"P2", json_number(r.P2)},
                        {"PJ", json_number(r.PJ)},
                        {"beta", json_number(r.beta)},
                        {"harvested_energy", json_number(r.harvested_energy)},
                        {"case", to_string(r.case_id)},
                        {"iterations", r.iterations},
                        {"converged", r.converged},
                        {"ok", r.ok},
                        {"error", r.error}};
    if (with_timing) j["wall_seconds"] = r.wall_seconds;
    arr.push_back(std::move(j));
  }
  doc["rows"] = std::move(arr);
  nlohmann::json sum = nlohmann::json::array();
  for (const SummaryRow& s : summary) {
    sum.push_back({{"policy", s.policy},
                   {"p_db", json_number(s.p_db)},
                   {"eps", json_number(s.eps)},
                   {"csi_case", s.csi_case},
                   {"trials", s.trials},
                   {"failures", s.failures},
                   {"mean", json_number(s.mean)},
                   {"stderr", json_number(s.stderr_mean)}});
  }
  doc["summary"] = std::move(sum);
  os << doc.dump(2) << '\n';
}

std::string build_describe() { return EHRELAY_GIT_DESCRIBE; }

}  // namespace ehrelay
