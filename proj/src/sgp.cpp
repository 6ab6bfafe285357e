#include "ehrelay/sgp.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace ehrelay {

namespace {

// Fraction by which the previous iterate is pulled into the interior so the
// barrier method starts strictly feasible.
constexpr double kInteriorShrink = 1e-7;
// Log-space half-width of the box pinning beta and beta_tilde when beta is fixed.
constexpr double kPinnedHalfWidth = 1e-3;
// Doublings tried when stretching an accepted step.
constexpr int kMaxStretch = 10;

Posynomial var6(std::size_t index, double coeff = 1.0) {
  return Posynomial::variable(kLogDim, index, coeff);
}

struct CaseProblem {
  FactoredPosynomial f;  // over the five design variables
  FactoredPosynomial g;
  FactoredPosynomial objective;  // f / t over the six log variables
  std::vector<Posynomial> fixed_constraints;
};

CaseProblem make_case_problem(const PosyRatio& ratio, const ChannelRealization& ch,
                              const SystemParams& sys, const SgpConfig& cfg) {
  CaseProblem p;
  p.f = ratio.f;
  p.g = ratio.g;
  if (cfg.fixed_beta) {
    const double b = *cfg.fixed_beta;
    p.f = p.f.substitute(kBeta, b).substitute(kBetaTilde, 1.0 - b);
    p.g = p.g.substitute(kBeta, b).substitute(kBetaTilde, 1.0 - b);
  }
  p.objective = p.f.extend(kLogDim);
  std::array<double, kLogDim> inv_t{};
  inv_t[kAuxT] = -1.0;
  p.objective.times(Posynomial::monomial(kLogDim, 1.0, inv_t));

  // gamma1 N0/g1 + gamma2 N0/g2 + gammaJ N0/gJ <= P
  p.fixed_constraints.push_back(var6(kGamma1, sys.N0 / (ch.g1 * sys.P)) +
                                var6(kGamma2, sys.N0 / (ch.g2 * sys.P)) +
                                var6(kGammaJ, sys.N0 / (ch.gJ * sys.P)));
  if (!cfg.fixed_beta) {
    p.fixed_constraints.push_back(var6(kBeta) + var6(kBetaTilde));
    p.fixed_constraints.push_back(var6(kBeta));
    p.fixed_constraints.push_back(var6(kBetaTilde));
  }
  return p;
}

double rate_of(const CaseProblem& p, const DesignPoint& x) {
  DesignPoint y;
  for (std::size_t i = 0; i < kNumVars; ++i) y[i] = std::log(x[i]);
  return 0.5 * (p.g.log_value(y) - p.f.log_value(y)) / std::numbers::ln2;
}

bool converged_step(double prev, double next, const SgpConfig& cfg) {
  const double diff = std::abs(next - prev);
  // A rate indistinguishable from zero gives the relative test no scale.
  if (std::abs(prev) <= cfg.delta_abs) return std::abs(next) <= cfg.delta_abs;
  return diff <= cfg.delta * std::abs(prev);
}

bool satisfies(const CaseProblem& p, const DesignPoint& x) {
  std::array<double, kLogDim> y{};
  for (std::size_t i = 0; i < kNumVars; ++i) y[i] = std::log(x[i]);
  for (const Posynomial& c : p.fixed_constraints) {
    if (!(c.log_value(y) <= 0.0)) return false;
  }
  return true;
}

// Pulls a point back onto the budget and splitting constraints by scaling,
// which both are homogeneous of degree one in their variables.
void project(const CaseProblem& p, DesignPoint& x, const SgpConfig& cfg) {
  std::array<double, kLogDim> y{};
  for (std::size_t i = 0; i < kNumVars; ++i) y[i] = std::log(x[i]);
  const double budget = std::exp(p.fixed_constraints[0].log_value(y));
  if (budget > 1.0) {
    for (std::size_t i : {kGamma1, kGamma2, kGammaJ}) x[i] /= budget;
  }
  if (cfg.fixed_beta) return;
  const double split = x[kBeta] + x[kBetaTilde];
  if (split > 1.0) {
    x[kBeta] /= split;
    x[kBetaTilde] /= split;
  }
}

// Doubles the step from x to x_new in log space while the point stays feasible
// and the case objective keeps rising. Convergence toward a face of the
// feasible set is otherwise linear with a small rate.
DesignPoint stretch(const CaseProblem& p, const DesignPoint& x, const DesignPoint& x_new, double& rate,
                    const SgpConfig& cfg) {
  std::array<double, kNumVars> d{};
  for (std::size_t i = 0; i < kNumVars; ++i) d[i] = std::log(x_new[i] / x[i]);
  if (cfg.fixed_beta) d[kBeta] = d[kBetaTilde] = 0.0;
  DesignPoint best = x_new;
  double s = 1.0;
  for (int k = 0; k < kMaxStretch; ++k) {
    s *= 2.0;
    DesignPoint c;
    for (std::size_t i = 0; i < kNumVars; ++i) c[i] = x[i] * std::exp(s * d[i]);
    project(p, c, cfg);
    if (!satisfies(p, c)) break;
    const double r = rate_of(p, c);
    if (!(r > rate)) break;
    best = c;
    rate = r;
  }
  return best;
}

// Squared extrapolation from two successive steps x0 -> x1 -> x2 in log
// space, backtracking toward x2. Returns true when a better feasible point
// was found.
bool squarem(const CaseProblem& p, const DesignPoint& x0, const DesignPoint& x1, const DesignPoint& x2,
             DesignPoint& out, double& rate, const SgpConfig& cfg) {
  std::array<double, kNumVars> r{}, v{};
  double nr = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < kNumVars; ++i) {
    if (cfg.fixed_beta && (i == kBeta || i == kBetaTilde)) continue;
    r[i] = std::log(x1[i] / x0[i]);
    v[i] = std::log(x2[i] / x1[i]) - r[i];
    nr += r[i] * r[i];
    nv += v[i] * v[i];
  }
  if (!(nv > 0.0)) return false;
  double alpha = -std::sqrt(nr / nv);
  for (int k = 0; k < kMaxStretch && alpha < -1.0; ++k, alpha = 0.5 * (alpha - 1.0)) {
    DesignPoint c;
    for (std::size_t i = 0; i < kNumVars; ++i) {
      c[i] = x0[i] * std::exp(-2.0 * alpha * r[i] + alpha * alpha * v[i]);
    }
    project(p, c, cfg);
    if (!satisfies(p, c)) continue;
    const double rc = rate_of(p, c);
    if (rc > rate) {
      out = c;
      rate = rc;
      return true;
    }
  }
  return false;
}

Allocation renormalized(const DesignPoint& x, const ChannelRealization& ch,
                        const SystemParams& sys, const SgpConfig& cfg) {
  Allocation a = from_design_point(x, ch, sys);
  if (cfg.fixed_beta) {
    a.beta = *cfg.fixed_beta;
    a.beta_tilde = 1.0 - a.beta;
  } else {
    // Raising beta to 1 - beta_tilde only adds harvested power.
    a.beta = 1.0 - a.beta_tilde;
  }
  return a;
}

}  // namespace

LogPoint LogPoint::from(const DesignPoint& x, double t) {
  LogPoint p;
  for (std::size_t i = 0; i < kNumVars; ++i) p.y[i] = std::log(x[i]);
  p.y[kAuxT] = std::log(t);
  return p;
}

DesignPoint LogPoint::design() const {
  DesignPoint x;
  for (std::size_t i = 0; i < kNumVars; ++i) x[i] = std::exp(y[i]);
  return x;
}

double LogPoint::t() const { return std::exp(y[kAuxT]); }

bool LogPoint::finite() const {
  for (double v : y) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void SgpConfig::validate() const {
  if (!(delta > 0.0)) throw ContractError("delta must be positive");
  if (!(trust_factor > 1.0)) throw ContractError("trust factor must exceed 1");
  if (max_outer_iters < 1) throw ContractError("max_outer_iters must be at least 1");
  if (restarts < 0) throw ContractError("restarts must be nonnegative");
  if (!(inner_tolerance > 0.0)) throw ContractError("inner tolerance must be positive");
  if (fixed_beta && !(*fixed_beta > 0.0 && *fixed_beta < 1.0)) {
    throw ContractError("a pinned beta must lie strictly inside (0,1)");
  }
}

CaseRun run_case(const PosyRatio& ratio, const Allocation& start, const ChannelRealization& ch,
                 const SystemParams& sys, const std::optional<CsiErrorBounds>& err,
                 const SgpConfig& cfg) {
  CaseRun run;
  run.case_id = ratio.case_id;
  const CaseProblem prob = make_case_problem(ratio, ch, sys, cfg);

  DesignPoint x = to_design_point(start, ch, sys);
  for (double v : x) {
    if (!(v > 0.0)) throw ContractError("SGP start must have strictly positive variables");
  }
  double rate = rate_of(prob, x);
  run.trace.push_back(rate);

  GpOptions gp_opts;
  gp_opts.tolerance = cfg.inner_tolerance;
  double mu = cfg.trust_factor;
  run.feasible = true;
  // Start of the last plain step, kept while its end is the current iterate.
  std::optional<DesignPoint> last_start;

  for (int iter = 0; iter < cfg.max_outer_iters; ++iter) {
    const MonomialApprox ghat = condense(prob.g, x);

    GpProblem gp;
    gp.objective = prob.objective;
    gp.constraints = prob.fixed_constraints;
    std::array<double, kLogDim> t_over_ghat{};
    for (std::size_t i = 0; i < kNumVars; ++i) t_over_ghat[i] = -ghat.exponents[i];
    t_over_ghat[kAuxT] = 1.0;
    gp.constraints.push_back(Posynomial::monomial(kLogDim, 1.0 / ghat.coeff, t_over_ghat));

    gp.lower = Eigen::VectorXd::Constant(kLogDim, -std::numeric_limits<double>::infinity());
    gp.upper = Eigen::VectorXd::Constant(kLogDim, std::numeric_limits<double>::infinity());
    Eigen::VectorXd y0(kLogDim);
    DesignPoint x_in = x;
    for (std::size_t i = 0; i < kNumVars; ++i) {
      const bool pinned = cfg.fixed_beta && (i == kBeta || i == kBetaTilde);
      if (!pinned) x_in[i] = x[i] * (1.0 - kInteriorShrink);
      const double half = pinned ? kPinnedHalfWidth : std::log(mu);
      gp.lower[static_cast<Eigen::Index>(i)] = std::log(x[i]) - half;
      gp.upper[static_cast<Eigen::Index>(i)] = std::log(x[i]) + half;
      y0[static_cast<Eigen::Index>(i)] = std::log(x_in[i]);
    }
    y0[kAuxT] = ghat.log_value(std::span<const double>(y0.data(), kNumVars)) - kInteriorShrink;

    const GpSolution sol = solve_gp(gp, y0, gp_opts);
    ++run.iterations;
    if (sol.status == GpStatus::kInfeasibleStart) {
      run.message = sol.message;
      if (iter == 0) run.feasible = false;
      break;
    }

    DesignPoint x_new;
    for (std::size_t i = 0; i < kNumVars; ++i) x_new[i] = std::exp(sol.y[static_cast<Eigen::Index>(i)]);
    const double rate_new = rate_of(prob, x_new);

    if (std::isfinite(rate_new) && rate_new >= rate) {
      const double prev = rate;
      rate = rate_new;
      DesignPoint next = x_new;
      if (last_start && squarem(prob, *last_start, x, x_new, next, rate, cfg)) {
        last_start.reset();
      } else {
        next = stretch(prob, x, x_new, rate, cfg);
        if (next == x_new) {
          last_start = x;
        } else {
          last_start.reset();
        }
      }
      x = next;
      run.trace.push_back(rate);
      if (converged_step(prev, rate, cfg)) {
        run.converged = true;
        break;
      }
    } else {
      // The condensed model overshot: keep the iterate and tighten the box.
      last_start.reset();
      mu = std::sqrt(mu);
      if (mu < cfg.min_trust_factor) {
        run.converged = true;
        break;
      }
    }
  }

  run.case_objective = rate;
  run.beta_sum = x[kBeta] + x[kBetaTilde];
  run.alloc = renormalized(x, ch, sys, cfg);
  run.c_sum = secrecy_outcome(run.alloc, ch, sys, err).c_sum;
  return run;
}

std::vector<Allocation> start_points(const SystemParams& sys, const SgpConfig& cfg) {
  std::vector<Allocation> starts;
  const double beta0 = cfg.fixed_beta.value_or(0.5);
  starts.push_back(Allocation::equal_split(sys.P, beta0));

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto log_uniform = [&](double lo, double hi) {
    return std::exp(std::log(lo) + unit(rng) * (std::log(hi) - std::log(lo)));
  };
  for (int r = 0; r < cfg.restarts; ++r) {
    const double beta = cfg.fixed_beta ? *cfg.fixed_beta : log_uniform(1e-2, 0.99);
    const double u1 = log_uniform(1e-3, 1.0);
    const double u2 = log_uniform(1e-3, 1.0);
    const double uJ = log_uniform(1e-3, 1.0);
    const double s = sys.P / (u1 + u2 + uJ);
    starts.push_back(Allocation::with_beta(u1 * s, u2 * s, uJ * s, beta));
  }
  return starts;
}

SgpResult optimize(const ChannelRealization& ch, const SystemParams& sys,
                   const std::optional<CsiErrorBounds>& err, const SgpConfig& cfg) {
  ch.validate();
  sys.validate();
  cfg.validate();
  if (err) err->validate();

  SgpResult result;
  const double beta0 = cfg.fixed_beta.value_or(0.5);
  result.best_alloc = Allocation::with_beta(0.0, 0.0, 0.0, beta0);
  result.outcome = secrecy_outcome(result.best_alloc, ch, sys, err);
  result.converged = true;
  if (sys.P == 0.0) return result;

  std::array<PosyRatio, 3> ratios = {build_case_ratio(CaseId::I, ch, sys, err),
                                     build_case_ratio(CaseId::II, ch, sys, err),
                                     build_case_ratio(CaseId::III, ch, sys, err)};
  const CaseRun* best = nullptr;
  for (const Allocation& start : start_points(sys, cfg)) {
    for (const PosyRatio& ratio : ratios) {
      result.runs.push_back(run_case(ratio, start, ch, sys, err, cfg));
      result.total_iterations += result.runs.back().iterations;
    }
  }
  for (const CaseRun& run : result.runs) {
    if (run.feasible && (best == nullptr || run.c_sum > best->c_sum)) best = &run;
  }
  if (best == nullptr || !(best->c_sum > 0.0)) return result;

  result.best_alloc = best->alloc;
  result.outcome = secrecy_outcome(best->alloc, ch, sys, err);
  result.best_case = result.outcome.case_id;
  result.c_sum = result.outcome.c_sum;
  result.iterations = best->iterations;
  result.converged = best->converged;
  result.beta_sum = best->beta_sum;
  result.trace = best->trace;
  return result;
}

}  // namespace ehrelay
