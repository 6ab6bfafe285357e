#pragma once

// Geometric programs in convex (log-variable) form and the monomial
// condensation used to approximate a posynomial lower-bound constraint.

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ehrelay/posynomial.hpp"

namespace ehrelay {

/// Monomial c * prod_i x_i^{a_i}.
struct MonomialApprox {
  double coeff = 1.0;
  std::vector<double> exponents;

  [[nodiscard]] double evaluate(std::span<const double> x) const;
  [[nodiscard]] double log_value(std::span<const double> y) const;
  [[nodiscard]] Posynomial as_posynomial() const;
};

/// Best local monomial approximation of `g` at `x0` (matching value and
/// log-gradient). By the AM-GM inequality it never exceeds g for x > 0.
[[nodiscard]] MonomialApprox condense(const Posynomial& g, std::span<const double> x0);
[[nodiscard]] MonomialApprox condense(const FactoredPosynomial& g, std::span<const double> x0);

/// minimize objective(x) subject to constraints[i](x) <= 1 and
/// lower <= log x <= upper, solved over y = log x.
struct GpProblem {
  FactoredPosynomial objective;
  std::vector<Posynomial> constraints;
  Eigen::VectorXd lower;  ///< may hold -inf
  Eigen::VectorXd upper;  ///< may hold +inf

  [[nodiscard]] std::size_t num_vars() const { return objective.num_vars(); }
};

struct GpOptions {
  double tolerance = 1e-10;  ///< duality-gap bound on the log objective
  double barrier_growth = 30.0;
  double initial_barrier = 1.0;
  int max_newton_per_center = 100;
  int max_centering = 60;
};

enum class GpStatus { kOptimal, kInfeasibleStart, kMaxIterations };

struct GpSolution {
  GpStatus status = GpStatus::kOptimal;
  Eigen::VectorXd y;             ///< best iterate (log variables)
  double log_objective = 0.0;    ///< log objective(exp(y))
  int newton_iterations = 0;
  int violated_constraint = -1;  ///< index into constraints, or -1
  std::string message;

  [[nodiscard]] bool ok() const { return status == GpStatus::kOptimal; }
};

/// Barrier method with damped Newton centering. `start` must be strictly
/// feasible; otherwise the first violated constraint is reported and no
/// iteration is performed.
[[nodiscard]] GpSolution solve_gp(const GpProblem& problem, const Eigen::VectorXd& start,
                                  const GpOptions& options = {});

}  // namespace ehrelay
