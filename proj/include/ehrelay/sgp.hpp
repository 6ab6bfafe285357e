#pragma once

// Successive geometric programming for the joint power allocation and
// power-splitting problem: the lower bound t <= g(x) is condensed to a
// monomial around the current iterate, the resulting GP is solved in log
// space, and the loop repeats until the secrecy rate stops improving.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ehrelay/core_model.hpp"
#include "ehrelay/gp_solver.hpp"
#include "ehrelay/secrecy_objective.hpp"

namespace ehrelay {

/// Slot of the auxiliary variable t in the log-space iterate.
inline constexpr std::size_t kAuxT = kNumVars;
inline constexpr std::size_t kLogDim = kNumVars + 1;

/// y = log(beta, beta_tilde, gamma1, gamma2, gammaJ, t).
struct LogPoint {
  std::array<double, kLogDim> y{};

  static LogPoint from(const DesignPoint& x, double t);
  [[nodiscard]] DesignPoint design() const;
  [[nodiscard]] double t() const;
  [[nodiscard]] bool finite() const;
};

struct SgpConfig {
  double delta = 1e-4;         ///< relative convergence tolerance on the secrecy rate
  double delta_abs = 1e-9;     ///< absolute test used when the previous rate is zero
  int max_outer_iters = 100;
  double trust_factor = 3.16;  ///< iterate box [x/mu, mu*x]
  double min_trust_factor = 1.0 + 1e-9;
  double inner_tolerance = 1e-10;
  std::uint64_t seed = 1;
  int restarts = 5;            ///< random starts in addition to the equal split
  std::optional<double> fixed_beta;  ///< pin beta instead of optimizing it

  void validate() const;
};

/// One successive-approximation run for a single case from a single start.
struct CaseRun {
  CaseId case_id = CaseId::I;
  bool feasible = false;
  bool converged = false;
  int iterations = 0;
  double case_objective = 0.0;  ///< (1/2) log2(g/f) at the final iterate
  double c_sum = 0.0;           ///< true sum-secrecy rate there (beta renormalized)
  double beta_sum = 0.0;        ///< beta + beta_tilde before renormalization
  Allocation alloc;
  std::vector<double> trace;    ///< accepted objective values, starting at the start point
  std::string message;
};

struct SgpResult {
  Allocation best_alloc;
  CaseId best_case = CaseId::IV;
  double c_sum = 0.0;
  int iterations = 0;            ///< outer iterations of the winning run
  int total_iterations = 0;      ///< over every case and start
  bool converged = false;
  double beta_sum = 1.0;         ///< relaxed beta + beta_tilde of the winning run
  std::vector<double> trace;     ///< objective trace of the winning run
  SecrecyOutcome outcome;
  std::vector<CaseRun> runs;
};

/// Runs the condensation loop for one case.
[[nodiscard]] CaseRun run_case(const PosyRatio& ratio, const Allocation& start,
                               const ChannelRealization& ch, const SystemParams& sys,
                               const std::optional<CsiErrorBounds>& err, const SgpConfig& cfg);

/// Starting allocations: the equal split with beta = 0.5 (or the pinned
/// beta) followed by cfg.restarts log-uniform random points.
[[nodiscard]] std::vector<Allocation> start_points(const SystemParams& sys, const SgpConfig& cfg);

/// Solves every case I-III from every start and keeps the allocation with the
/// largest true sum-secrecy rate; returns case IV with zero powers when no
/// positive rate is found.
[[nodiscard]] SgpResult optimize(const ChannelRealization& ch, const SystemParams& sys,
                                 const std::optional<CsiErrorBounds>& err, const SgpConfig& cfg = {});

}  // namespace ehrelay
