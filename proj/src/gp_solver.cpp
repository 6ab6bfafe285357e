#include "ehrelay/gp_solver.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>

#include "ehrelay/core_model.hpp"

namespace ehrelay {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

MonomialApprox condense_from_log(const LogEval& e, std::span<const double> x0) {
  MonomialApprox m;
  m.exponents.assign(e.grad.data(), e.grad.data() + e.grad.size());
  double log_c = e.value;
  for (std::size_t i = 0; i < x0.size(); ++i) log_c -= m.exponents[i] * std::log(x0[i]);
  m.coeff = std::exp(log_c);
  return m;
}

std::vector<double> logs_of(std::span<const double> x0) {
  std::vector<double> y(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) {
    if (!(x0[i] > 0.0)) throw ContractError("expansion point must be strictly positive");
    y[i] = std::log(x0[i]);
  }
  return y;
}

// Log-barrier merit tau*F0(y) - sum log(-F_i(y)) - sum log(box slack).
class Barrier {
 public:
  explicit Barrier(const GpProblem& p) : p_(p), n_(static_cast<Eigen::Index>(p.num_vars())) {}

  [[nodiscard]] int num_inequalities() const {
    int m = static_cast<int>(p_.constraints.size());
    for (Eigen::Index j = 0; j < n_; ++j) {
      m += std::isfinite(p_.lower[j]) ? 1 : 0;
      m += std::isfinite(p_.upper[j]) ? 1 : 0;
    }
    return m;
  }

  /// Index of the first violated constraint (box bounds report as -2), -1 if
  /// strictly feasible.
  [[nodiscard]] int first_violation(const Eigen::VectorXd& y) const {
    for (std::size_t i = 0; i < p_.constraints.size(); ++i) {
      if (!(p_.constraints[i].log_value(as_span(y)) < 0.0)) return static_cast<int>(i);
    }
    for (Eigen::Index j = 0; j < n_; ++j) {
      if (!(y[j] > p_.lower[j] && y[j] < p_.upper[j])) return -2;
    }
    return -1;
  }

  [[nodiscard]] double value(const Eigen::VectorXd& y, double tau) const {
    double phi = tau * p_.objective.log_value(as_span(y));
    for (const auto& c : p_.constraints) {
      const double F = c.log_value(as_span(y));
      if (!(F < 0.0)) return kInf;
      phi -= std::log(-F);
    }
    for (Eigen::Index j = 0; j < n_; ++j) {
      const double lo = y[j] - p_.lower[j];
      const double hi = p_.upper[j] - y[j];
      if (!(lo > 0.0 && hi > 0.0)) return kInf;
      if (std::isfinite(lo)) phi -= std::log(lo);
      if (std::isfinite(hi)) phi -= std::log(hi);
    }
    return std::isfinite(phi) ? phi : kInf;
  }

  void derivatives(const Eigen::VectorXd& y, double tau, Eigen::VectorXd& grad,
                   Eigen::MatrixXd& hess) const {
    const LogEval obj = p_.objective.log_eval(as_span(y));
    grad = tau * obj.grad;
    hess = tau * obj.hess;
    for (const auto& c : p_.constraints) {
      const LogEval e = c.log_eval(as_span(y));
      const double s = -e.value;
      grad += e.grad / s;
      hess += e.hess / s + (e.grad * e.grad.transpose()) / (s * s);
    }
    for (Eigen::Index j = 0; j < n_; ++j) {
      if (std::isfinite(p_.lower[j])) {
        const double d = y[j] - p_.lower[j];
        grad[j] -= 1.0 / d;
        hess(j, j) += 1.0 / (d * d);
      }
      if (std::isfinite(p_.upper[j])) {
        const double d = p_.upper[j] - y[j];
        grad[j] += 1.0 / d;
        hess(j, j) += 1.0 / (d * d);
      }
    }
  }

 private:
  const GpProblem& p_;
  Eigen::Index n_;
};

}  // namespace

double MonomialApprox::evaluate(std::span<const double> x) const {
  double v = coeff;
  for (std::size_t i = 0; i < exponents.size(); ++i) v *= std::pow(x[i], exponents[i]);
  return v;
}

double MonomialApprox::log_value(std::span<const double> y) const {
  double v = std::log(coeff);
  for (std::size_t i = 0; i < exponents.size(); ++i) v += exponents[i] * y[i];
  return v;
}

Posynomial MonomialApprox::as_posynomial() const {
  return Posynomial::monomial(exponents.size(), coeff, exponents);
}

MonomialApprox condense(const Posynomial& g, std::span<const double> x0) {
  if (x0.size() != g.num_vars()) throw ContractError("expansion point has the wrong dimension");
  const std::vector<double> y0 = logs_of(x0);
  if (!(g.evaluate(x0) > 0.0)) throw ContractError("cannot condense a posynomial that is not positive");
  return condense_from_log(g.log_eval(y0, false), x0);
}

MonomialApprox condense(const FactoredPosynomial& g, std::span<const double> x0) {
  if (x0.size() != g.num_vars()) throw ContractError("expansion point has the wrong dimension");
  const std::vector<double> y0 = logs_of(x0);
  if (g.factors().empty()) return {1.0, std::vector<double>(x0.size(), 0.0)};
  return condense_from_log(g.log_eval(y0, false), x0);
}

GpSolution solve_gp(const GpProblem& problem, const Eigen::VectorXd& start,
                    const GpOptions& options) {
  const auto n = static_cast<Eigen::Index>(problem.num_vars());
  if (start.size() != n || problem.lower.size() != n || problem.upper.size() != n) {
    throw ContractError("GP dimensions do not match");
  }
  for (const auto& c : problem.constraints) {
    if (c.num_vars() != problem.num_vars()) throw ContractError("constraint dimension mismatch");
  }

  const Barrier barrier(problem);
  GpSolution out;
  out.y = start;

  const int violated = barrier.first_violation(start);
  if (violated != -1) {
    out.status = GpStatus::kInfeasibleStart;
    out.violated_constraint = violated;
    std::ostringstream os;
    if (violated >= 0) {
      os << "start violates constraint " << violated;
    } else {
      os << "start lies outside the variable bounds";
    }
    out.message = os.str();
    out.log_objective = problem.objective.log_value(as_span(start));
    return out;
  }

  const int m = barrier.num_inequalities();
  Eigen::VectorXd y = start;
  Eigen::VectorXd grad(n);
  Eigen::MatrixXd hess(n, n);
  double tau = options.initial_barrier;
  bool converged = m == 0;

  for (int outer = 0; outer < options.max_centering; ++outer) {
    for (int it = 0; it < options.max_newton_per_center; ++it) {
      barrier.derivatives(y, tau, grad, hess);
      Eigen::LLT<Eigen::MatrixXd> llt(hess);
      double ridge = 1e-12 * (1.0 + hess.diagonal().cwiseAbs().maxCoeff());
      for (int k = 0; llt.info() != Eigen::Success && k < 30; ++k) {
        llt.compute(hess + ridge * Eigen::MatrixXd::Identity(n, n));
        ridge *= 10.0;
      }
      if (llt.info() != Eigen::Success) break;
      const Eigen::VectorXd step = -llt.solve(grad);
      const double decrement = -grad.dot(step);
      ++out.newton_iterations;
      const double phi0 = barrier.value(y, tau);
      // Below this the Armijo test is decided by rounding in phi, not by the model.
      const double resolution = 1e-13 * (1.0 + std::abs(phi0));
      if (!(decrement > 0.0) || decrement / 2.0 <= std::max(1e-12, resolution)) break;

      double t = 1.0;
      Eigen::VectorXd trial = y + step;
      double phi = barrier.value(trial, tau);
      int halvings = 0;
      while (!(phi <= phi0 - 0.25 * t * decrement) && halvings < 60) {
        t *= 0.5;
        ++halvings;
        trial = y + t * step;
        phi = barrier.value(trial, tau);
      }
      if (!(phi <= phi0 - 0.25 * t * decrement)) break;
      y = trial;
    }
    if (m / tau < options.tolerance) {
      converged = true;
      break;
    }
    tau *= options.barrier_growth;
  }

  out.y = y;
  out.log_objective = problem.objective.log_value(as_span(y));
  if (!converged) {
    out.status = GpStatus::kMaxIterations;
    out.message = "barrier method did not reach the requested gap";
  }
  return out;
}

}  // namespace ehrelay
