#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace ehrelay {

/// Value, gradient and Hessian of log p(exp(y)) with respect to the
/// log-variables y.
struct LogEval {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

/// Sum of monomials c_k * prod_i x_i^{a_ki} with c_k > 0.
///
/// Terms are stored densely (one exponent row per term) and like terms are
/// merged on construction, so two posynomials built from the same algebra
/// compare equal term by term.
class Posynomial {
 public:
  Posynomial() = default;
  explicit Posynomial(std::size_t nvars) : nvars_(nvars) {}

  static Posynomial constant(std::size_t nvars, double c);
  static Posynomial variable(std::size_t nvars, std::size_t index, double coeff = 1.0);
  static Posynomial monomial(std::size_t nvars, double coeff, std::span<const double> exponents);

  [[nodiscard]] std::size_t num_vars() const { return nvars_; }
  [[nodiscard]] std::size_t num_terms() const { return coeffs_.size(); }
  [[nodiscard]] bool empty() const { return coeffs_.empty(); }
  [[nodiscard]] double coeff(std::size_t k) const { return coeffs_[k]; }
  [[nodiscard]] std::span<const double> exponents(std::size_t k) const {
    return {exps_.data() + k * nvars_, nvars_};
  }
  [[nodiscard]] const std::vector<double>& coeffs() const { return coeffs_; }

  /// Adds one term. Zero coefficients are dropped; negative ones are rejected.
  void add_term(double coeff, std::span<const double> exponents);

  Posynomial& operator+=(const Posynomial& other);
  Posynomial& operator*=(const Posynomial& other);
  Posynomial& operator*=(double scale);
  friend Posynomial operator+(Posynomial a, const Posynomial& b) { return a += b; }
  friend Posynomial operator*(const Posynomial& a, const Posynomial& b);
  friend Posynomial operator*(Posynomial a, double s) { return a *= s; }
  friend Posynomial operator*(double s, Posynomial a) { return a *= s; }
  friend Posynomial operator+(Posynomial a, double c) { return a += constant(a.nvars_, c); }
  friend Posynomial operator+(double c, Posynomial a) { return a += constant(a.nvars_, c); }

  [[nodiscard]] Posynomial pow(unsigned n) const;

  /// Fixes variable `index` to `value`; the variable keeps its slot with
  /// exponent zero.
  [[nodiscard]] Posynomial substitute(std::size_t index, double value) const;
  /// Same terms over a larger variable set (new variables get exponent 0).
  [[nodiscard]] Posynomial extend(std::size_t nvars) const;

  [[nodiscard]] double evaluate(std::span<const double> x) const;
  /// log p(exp(y)), computed as a stabilized log-sum-exp.
  [[nodiscard]] double log_value(std::span<const double> y) const;
  [[nodiscard]] LogEval log_eval(std::span<const double> y, bool with_hessian = true) const;

 private:
  void merge_like_terms();
  void refresh_log_coeffs();
  [[nodiscard]] double exponent_sums(std::span<const double> y, std::vector<double>& z) const;

  std::size_t nvars_ = 0;
  std::vector<double> coeffs_;
  std::vector<double> log_coeffs_;
  std::vector<double> exps_;  // row-major, num_terms x nvars
};

/// Product of posynomial factors raised to positive integer powers. The
/// product is itself a posynomial; keeping the factors lets log-space
/// evaluation work on a handful of short sums instead of the expansion.
class FactoredPosynomial {
 public:
  struct Factor {
    Posynomial poly;
    unsigned power = 1;
  };

  FactoredPosynomial() = default;
  explicit FactoredPosynomial(std::size_t nvars) : nvars_(nvars) {}

  FactoredPosynomial& times(Posynomial factor, unsigned power = 1);

  [[nodiscard]] std::size_t num_vars() const { return nvars_; }
  [[nodiscard]] const std::vector<Factor>& factors() const { return factors_; }

  [[nodiscard]] Posynomial expand() const;
  [[nodiscard]] FactoredPosynomial substitute(std::size_t index, double value) const;
  [[nodiscard]] FactoredPosynomial extend(std::size_t nvars) const;

  [[nodiscard]] double evaluate(std::span<const double> x) const;
  [[nodiscard]] double log_value(std::span<const double> y) const;
  [[nodiscard]] LogEval log_eval(std::span<const double> y, bool with_hessian = true) const;

 private:
  std::size_t nvars_ = 0;
  std::vector<Factor> factors_;
};

}  // namespace ehrelay
