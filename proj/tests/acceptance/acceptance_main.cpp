// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "ehrelay/experiments.hpp"
#include "ehrelay/gp_solver.hpp"
#include "ehrelay/oracle.hpp"
#include "ehrelay/secrecy_objective.hpp"
#include "ehrelay/sgp.hpp"
#include "test_support.hpp"

using namespace ehrelay;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

// Every optimizer result produced by the suite, for the termination check.
std::vector<SgpResult> g_results;
std::mutex g_results_mutex;

void record(const SgpResult& r) {
  std::lock_guard lock(g_results_mutex);
  g_results.push_back(r);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  std::atomic<std::size_t> next{0};
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < std::min<std::size_t>(hw, n); ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  }
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Verdict oracle_agreement() {
  testing::Sampler s(2024);
  std::vector<ChannelRealization> channels;
  for (int i = 0; i < 50; ++i) channels.push_back(s.fading());
  const std::vector<double> powers{10.0, 20.0, 30.0};
  const std::size_t n = channels.size() * powers.size();
  std::vector<double> gap(n), tol(n);
  parallel_for(n, [&](std::size_t k) {
    const ChannelRealization& ch = channels[k / powers.size()];
    const SystemParams sys = testing::system_db(powers[k % powers.size()]);
    const SgpResult r = optimize(ch, sys, std::nullopt);
    record(r);
    const SgpResult o = grid_search(ch, sys, std::nullopt);
    gap[k] = std::abs(r.c_sum - o.c_sum);
    tol[k] = std::max(0.02 * o.c_sum, 5e-3);
  });
  Verdict v;
  int bad = 0;
  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (gap[k] > tol[k]) ++bad;
    worst = std::max(worst, gap[k] / tol[k]);
  }
  v.pass = bad == 0;
  v.detail = fmt("%.0f/%.0f instances outside tolerance, worst gap/tolerance %.3g", bad, double(n), worst);
  return v;
}

// Re-solves each optimized row under the default tolerance for criterion 8.
void record_plan(const ExperimentPlan& plan, const std::vector<ResultRow>& rows) {
  for (const ResultRow& r : rows) {
    SgpConfig cfg = plan.sgp;
    cfg.delta = SgpConfig{}.delta;
    if (r.policy.rfind("beta=", 0) == 0) cfg.fixed_beta = r.beta;
    if (r.policy != "optimal" && !cfg.fixed_beta) continue;
    const SystemParams sys{r.P, plan.eta, plan.N0, plan.T};
    std::optional<CsiErrorBounds> err;
    if (r.eps != 0.0) err = CsiErrorBounds::uniform(r.eps, r.known);
    record(optimize(r.channel, sys, err, cfg));
  }
}

Verdict beta_sweep() {
  ExperimentPlan plan = ExperimentPlan::beta_sweep();
  plan.power_grid_db = {10, 12.5, 15, 17.5, 20, 22.5, 25, 27.5, 30};
  const auto rows = run_beta_sweep(plan);
  record_plan(plan, rows);
  Verdict v;
  int bad = 0;
  for (std::size_t i = 0; i + 2 < rows.size(); i += 3) {
    if (!rows[i].ok || !rows[i + 1].ok || !rows[i + 2].ok) ++bad;
    if (!(rows[i].c_sum >= rows[i + 1].c_sum && rows[i].c_sum >= rows[i + 2].c_sum)) ++bad;
  }
  int energy_bad = 0;
  for (double p_db : plan.power_grid_db) {
    const SystemParams sys = testing::system_db(p_db);
    for (const Allocation& a : {Allocation::equal_split(sys.P, 0.5), Allocation::with_beta(0.2 * sys.P, 0.3 * sys.P, 0.5 * sys.P, 0.5)}) {
      const Allocation lo = Allocation::with_beta(a.P1, a.P2, a.PJ, 0.15);
      const Allocation hi = Allocation::with_beta(a.P1, a.P2, a.PJ, 0.85);
      if (!(harvested_energy(hi, plan.channels.value(), sys) > harvested_energy(lo, plan.channels.value(), sys))) {
        ++energy_bad;
      }
    }
  }
  v.pass = bad == 0 && energy_bad == 0;
  v.detail = fmt("%.0f budgets, %.0f ordering violations, %.0f energy violations", double(plan.power_grid_db.size()), bad, energy_bad);
  return v;
}

Verdict alloc_compare() {
  ExperimentPlan plan = ExperimentPlan::alloc_compare();
  const auto rows = run_alloc_compare(plan);
  record_plan(plan, rows);
  std::map<std::pair<std::string, double>, std::vector<const ResultRow*>> by_policy;  // (policy, p_db) -> eps order
  int order_bad = 0, failed = 0;
  for (std::size_t i = 0; i + 1 < rows.size(); i += 2) {
    if (!rows[i].ok || !rows[i + 1].ok) ++failed;
    if (!(rows[i].c_sum >= rows[i + 1].c_sum)) ++order_bad;
  }
  for (const ResultRow& r : rows) by_policy[{r.policy, r.p_db}].push_back(&r);
  int mono_bad = 0;
  for (const auto& [key, seq] : by_policy) {
    for (std::size_t k = 1; k < seq.size(); ++k) {
      if (seq[k]->c_sum > seq[k - 1]->c_sum) ++mono_bad;
    }
  }
  int exact_bad = 0;
  for (const ResultRow& r : rows) {
    if (r.eps != 0.0 || r.policy != "optimal") continue;
    const SystemParams sys{r.P, plan.eta, plan.N0, plan.T};
    const SgpResult perfect = optimize(r.channel, sys, std::nullopt, plan.sgp);
    const SgpResult zero = optimize(r.channel, sys, CsiErrorBounds::uniform(0.0), plan.sgp);
    if (!(perfect.c_sum == r.c_sum && zero.c_sum == r.c_sum && perfect.best_alloc.P1 == zero.best_alloc.P1 &&
          perfect.best_alloc.PJ == zero.best_alloc.PJ && perfect.best_alloc.beta == zero.best_alloc.beta)) {
      ++exact_bad;
    }
  }
  Verdict v;
  v.pass = failed == 0 && order_bad == 0 && mono_bad == 0 && exact_bad == 0;
  v.detail = fmt("optimal<equal at %.0f points, eps increases at %.0f, eps=0 mismatches %.0f", order_bad, mono_bad, exact_bad);
  return v;
}

Verdict epsilon_sweep() {
  ExperimentPlan plan = ExperimentPlan::epsilon_sweep();
  const auto rows = run_epsilon_sweep(plan);
  record_plan(plan, rows);
  const double P = rows.front().P;
  std::map<std::string, std::vector<const ResultRow*>> by_case;
  std::map<double, std::map<std::string, double>> rate_at;
  int failed = 0;
  for (const ResultRow& r : rows) {
    by_case[r.csi_case].push_back(&r);
    rate_at[r.eps][r.csi_case] = r.c_sum;
    if (!r.ok) ++failed;
  }
  bool a = true;
  for (const ResultRow& r : rows) {
    if (r.eps == 0.0 && !(r.PJ > 0.0)) a = false;
  }
  int b_bad = 0;
  double b_worst = 0.0;
  for (const auto& [label, seq] : by_case) {
    for (std::size_t k = 1; k < seq.size(); ++k) {
      if (seq[k - 1]->eps < 0.02 - 1e-12) continue;
      const double rise = seq[k]->PJ - seq[k - 1]->PJ;
      b_worst = std::max(b_worst, rise / P);
      if (rise > 0.0) ++b_bad;
    }
  }
  int c_bad = 0;
  for (const auto& [eps, rates] : rate_at) {
    const double ref = rates.at("III");
    for (const auto& [label, c] : rates) {
      if (c > ref) ++c_bad;
    }
  }
  const auto x = jammer_crossover(rows, "III");
  const bool d = x && *x >= 0.03 && *x <= 0.09;
  Verdict v;
  v.pass = failed == 0 && a && b_bad == 0 && c_bad == 0 && d;
  v.detail = std::string("(a) ") + (a ? "ok" : "PJ=0 at eps=0") + fmt(", (b) %.0f increases (largest %.3g of P)", b_bad, b_worst) +
             fmt(", (c) %.0f points above case III", c_bad) +
             (x ? fmt(", (d) crossover at eps=%.4f", *x) : std::string(", (d) no crossover"));
  return v;
}

Posynomial random_posynomial(testing::Sampler& s, std::size_t nvars, int terms) {
  Posynomial p(nvars);
  std::vector<double> e(nvars);
  for (int k = 0; k < terms; ++k) {
    for (auto& x : e) x = s.uniform(-2.0, 2.0);
    p.add_term(s.log_uniform(0.1, 10.0), e);
  }
  return p;
}

Verdict condensation() {
  testing::Sampler s(5);
  int bad_value = 0, bad_grad = 0, bad_bound = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + static_cast<std::size_t>(i % 6);
    const Posynomial g = random_posynomial(s, n, 1 + i % 9);
    std::vector<double> x0(n), y0(n);
    for (std::size_t j = 0; j < n; ++j) {
      x0[j] = s.log_uniform(0.1, 10.0);
      y0[j] = std::log(x0[j]);
    }
    const MonomialApprox m = condense(g, x0);
    if (std::abs(m.evaluate(x0) - g.evaluate(x0)) > 1e-10 * g.evaluate(x0)) ++bad_value;
    for (std::size_t j = 0; j < n; ++j) {
      auto yp = y0, ym = y0;
      yp[j] += 1e-6;
      ym[j] -= 1e-6;
      const double fd = (g.log_value(yp) - g.log_value(ym)) / 2e-6;
      if (std::abs(m.exponents[j] - fd) > 1e-5) ++bad_grad;
    }
    for (int k = 0; k < 100; ++k) {
      std::vector<double> x(n);
      for (auto& v : x) v = s.log_uniform(0.01, 100.0);
      if (m.evaluate(x) > g.evaluate(x) * (1.0 + 1e-12)) ++bad_bound;
    }
  }
  Verdict v;
  v.pass = bad_value == 0 && bad_grad == 0 && bad_bound == 0;
  v.detail = fmt("value %.0f, gradient %.0f, lower bound %.0f violations", bad_value, bad_grad, bad_bound);
  return v;
}

Verdict ratio_identity() {
  testing::Sampler s(6);
  const CaseId cases[] = {CaseId::I, CaseId::II, CaseId::III};
  double worst_perfect = 0.0, worst_wc = 0.0;
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 1000; ++i) {
      const bool wc = i % 2 == 1;
      const ChannelRealization ch = s.channel();
      const SystemParams sys{s.log_uniform(1.0, 1e4), s.uniform(0.1, 0.9), s.log_uniform(0.5, 2.0), 1.0};
      const Allocation a = s.allocation(sys.P);
      std::optional<CsiErrorBounds> err;
      if (wc) err = s.bounds(0.2);
      const double direct = case_rate(cases[c], secrecy_outcome(a, ch, sys, err));
      const double ratio = build_case_ratio(cases[c], ch, sys, err).rate(to_design_point(a, ch, sys));
      double& w = wc ? worst_wc : worst_perfect;
      w = std::max(w, std::abs(direct - ratio));
    }
  }
  Verdict v;
  v.pass = worst_perfect <= 1e-9 && worst_wc <= 1e-7;
  v.detail = fmt("max error %.3g perfect CSI, %.3g worst case", worst_perfect, worst_wc);
  return v;
}

Verdict degeneration() {
  testing::Sampler s(7);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const ChannelRealization ch = s.channel();
    const SystemParams sys{s.log_uniform(1.0, 1e4), s.uniform(0.1, 0.9), s.log_uniform(0.5, 2.0), 1.0};
    const Allocation a = s.allocation(sys.P);
    CsiErrorBounds zero;
    for (auto& k : zero.known) k = s.uniform(0.0, 1.0) < 0.5;
    const SnrPair p = node_snrs(a, ch, sys);
    const SnrPair w = worst_case_node_snrs(a, ch, zero, sys);
    worst = std::max({worst, std::abs(p.first - w.first) / std::max(1.0, p.first),
                      std::abs(p.second - w.second) / std::max(1.0, p.second)});
  }
  Verdict v;
  v.pass = worst <= 1e-12;
  v.detail = fmt("max relative difference %.3g", worst);
  return v;
}

Verdict termination() {
  std::size_t runs = 0;
  int nonmono = 0, too_long = 0, unconverged = 0;
  int max_iters = 0;
  for (const SgpResult& r : g_results) {
    for (const CaseRun& run : r.runs) {
      if (!run.feasible) continue;
      ++runs;
      max_iters = std::max(max_iters, run.iterations);
      if (run.iterations > 100) ++too_long;
      if (!run.converged) ++unconverged;
      for (std::size_t k = 1; k < run.trace.size(); ++k) {
        if (run.trace[k] < run.trace[k - 1] - 1e-10) ++nonmono;
      }
    }
  }
  Verdict v;
  v.pass = runs > 0 && nonmono == 0 && too_long == 0 && unconverged == 0;
  v.detail = fmt("%.0f case runs, max %.0f outer iterations, ", double(runs), max_iters) +
             fmt("%.0f trace decreases, %.0f over the limit, %.0f unconverged", nonmono, too_long, unconverged);
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Verdict (*check)();
  };
  const Criterion criteria[] = {
      {"1 oracle agreement", oracle_agreement},
      {"2 beta sweep ordering and harvested energy", beta_sweep},
      {"3 optimal versus equal allocation under CSI error", alloc_compare},
      {"4 jammer power over epsilon", epsilon_sweep},
      {"5 condensation", condensation},
      {"6 ratio identity", ratio_identity},
      {"7 zero-error degeneration", degeneration},
      {"8 SGP monotonicity and termination", termination},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s  %s: %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", c.name, v.detail.c_str(), secs);
    std::fflush(stdout);
    if (!v.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
