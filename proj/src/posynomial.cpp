#include "ehrelay/posynomial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ehrelay/core_model.hpp"

namespace ehrelay {

namespace {

void check_dims(std::size_t a, std::size_t b) {
  if (a != b) throw ContractError("posynomial variable counts differ");
}

}  // namespace

Posynomial Posynomial::constant(std::size_t nvars, double c) {
  Posynomial p(nvars);
  std::vector<double> zero(nvars, 0.0);
  p.add_term(c, zero);
  return p;
}

Posynomial Posynomial::variable(std::size_t nvars, std::size_t index, double coeff) {
  if (index >= nvars) throw ContractError("variable index out of range");
  Posynomial p(nvars);
  std::vector<double> e(nvars, 0.0);
  e[index] = 1.0;
  p.add_term(coeff, e);
  return p;
}

Posynomial Posynomial::monomial(std::size_t nvars, double coeff, std::span<const double> exponents) {
  Posynomial p(nvars);
  p.add_term(coeff, exponents);
  return p;
}

void Posynomial::add_term(double coeff, std::span<const double> exponents) {
  check_dims(exponents.size(), nvars_);
  if (!(coeff >= 0.0) || !std::isfinite(coeff)) {
    throw ContractError("posynomial coefficients must be finite and nonnegative");
  }
  if (coeff == 0.0) return;
  coeffs_.push_back(coeff);
  exps_.insert(exps_.end(), exponents.begin(), exponents.end());
  merge_like_terms();
}

void Posynomial::merge_like_terms() {
  const std::size_t n = coeffs_.size();
  if (n < 2) {
    refresh_log_coeffs();
    return;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto row = [&](std::size_t k) { return exps_.begin() + static_cast<std::ptrdiff_t>(k * nvars_); };
  auto less = [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(row(a), row(a) + static_cast<std::ptrdiff_t>(nvars_), row(b),
                                        row(b) + static_cast<std::ptrdiff_t>(nvars_));
  };
  std::stable_sort(order.begin(), order.end(), less);

  std::vector<double> coeffs;
  std::vector<double> exps;
  coeffs.reserve(n);
  exps.reserve(exps_.size());
  for (std::size_t idx : order) {
    const bool same = !coeffs.empty() &&
                      std::equal(row(idx), row(idx) + static_cast<std::ptrdiff_t>(nvars_),
                                 exps.end() - static_cast<std::ptrdiff_t>(nvars_));
    if (same) {
      coeffs.back() += coeffs_[idx];
    } else {
      coeffs.push_back(coeffs_[idx]);
      exps.insert(exps.end(), row(idx), row(idx) + static_cast<std::ptrdiff_t>(nvars_));
    }
  }
  coeffs_ = std::move(coeffs);
  exps_ = std::move(exps);
  refresh_log_coeffs();
}

void Posynomial::refresh_log_coeffs() {
  log_coeffs_.resize(coeffs_.size());
  for (std::size_t k = 0; k < coeffs_.size(); ++k) log_coeffs_[k] = std::log(coeffs_[k]);
}

double Posynomial::exponent_sums(std::span<const double> y, std::vector<double>& z) const {
  z.resize(num_terms());
  double zmax = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < num_terms(); ++k) {
    const double* ek = exps_.data() + k * nvars_;
    double s = log_coeffs_[k];
    for (std::size_t v = 0; v < nvars_; ++v) s += ek[v] * y[v];
    z[k] = s;
    zmax = std::max(zmax, s);
  }
  return zmax;
}

Posynomial& Posynomial::operator+=(const Posynomial& other) {
  check_dims(nvars_, other.nvars_);
  coeffs_.insert(coeffs_.end(), other.coeffs_.begin(), other.coeffs_.end());
  exps_.insert(exps_.end(), other.exps_.begin(), other.exps_.end());
  merge_like_terms();
  return *this;
}

Posynomial operator*(const Posynomial& a, const Posynomial& b) {
  check_dims(a.nvars_, b.nvars_);
  Posynomial out(a.nvars_);
  out.coeffs_.reserve(a.num_terms() * b.num_terms());
  out.exps_.reserve(a.num_terms() * b.num_terms() * a.nvars_);
  for (std::size_t i = 0; i < a.num_terms(); ++i) {
    for (std::size_t j = 0; j < b.num_terms(); ++j) {
      out.coeffs_.push_back(a.coeffs_[i] * b.coeffs_[j]);
      const auto ea = a.exponents(i);
      const auto eb = b.exponents(j);
      for (std::size_t v = 0; v < a.nvars_; ++v) out.exps_.push_back(ea[v] + eb[v]);
    }
  }
  out.merge_like_terms();
  return out;
}

Posynomial& Posynomial::operator*=(const Posynomial& other) {
  *this = *this * other;
  return *this;
}

Posynomial& Posynomial::operator*=(double scale) {
  if (!(scale >= 0.0) || !std::isfinite(scale)) {
    throw ContractError("posynomial scale must be finite and nonnegative");
  }
  if (scale == 0.0) {
    coeffs_.clear();
    exps_.clear();
    log_coeffs_.clear();
    return *this;
  }
  for (double& c : coeffs_) c *= scale;
  refresh_log_coeffs();
  return *this;
}

Posynomial Posynomial::pow(unsigned n) const {
  Posynomial out = constant(nvars_, 1.0);
  for (unsigned i = 0; i < n; ++i) out *= *this;
  return out;
}

Posynomial Posynomial::substitute(std::size_t index, double value) const {
  if (index >= nvars_) throw ContractError("variable index out of range");
  if (!(value > 0.0)) throw ContractError("substituted value must be positive");
  Posynomial out(nvars_);
  std::vector<double> e(nvars_);
  for (std::size_t k = 0; k < num_terms(); ++k) {
    const auto ek = exponents(k);
    std::copy(ek.begin(), ek.end(), e.begin());
    const double c = coeffs_[k] * std::pow(value, e[index]);
    e[index] = 0.0;
    out.coeffs_.push_back(c);
    out.exps_.insert(out.exps_.end(), e.begin(), e.end());
  }
  out.merge_like_terms();
  return out;
}

Posynomial Posynomial::extend(std::size_t nvars) const {
  if (nvars < nvars_) throw ContractError("cannot shrink the variable set");
  Posynomial out(nvars);
  out.coeffs_ = coeffs_;
  out.log_coeffs_ = log_coeffs_;
  out.exps_.reserve(num_terms() * nvars);
  for (std::size_t k = 0; k < num_terms(); ++k) {
    const auto ek = exponents(k);
    out.exps_.insert(out.exps_.end(), ek.begin(), ek.end());
    out.exps_.insert(out.exps_.end(), nvars - nvars_, 0.0);
  }
  return out;
}

double Posynomial::evaluate(std::span<const double> x) const {
  check_dims(x.size(), nvars_);
  double sum = 0.0;
  for (std::size_t k = 0; k < num_terms(); ++k) {
    double term = coeffs_[k];
    const auto ek = exponents(k);
    for (std::size_t v = 0; v < nvars_; ++v) {
      if (ek[v] != 0.0) term *= std::pow(x[v], ek[v]);
    }
    sum += term;
  }
  return sum;
}

double Posynomial::log_value(std::span<const double> y) const {
  check_dims(y.size(), nvars_);
  if (empty()) return -std::numeric_limits<double>::infinity();
  thread_local std::vector<double> z;
  const double zmax = exponent_sums(y, z);
  double acc = 0.0;
  for (double s : z) acc += std::exp(s - zmax);
  return zmax + std::log(acc);
}

LogEval Posynomial::log_eval(std::span<const double> y, bool with_hessian) const {
  check_dims(y.size(), nvars_);
  if (empty()) throw ContractError("log of an empty posynomial");
  const auto n = static_cast<Eigen::Index>(nvars_);
  thread_local std::vector<double> z;
  const double zmax = exponent_sums(y, z);
  double acc = 0.0;
  for (double& s : z) {
    s = std::exp(s - zmax);
    acc += s;
  }

  LogEval out;
  out.value = zmax + std::log(acc);
  out.grad = Eigen::VectorXd::Zero(n);
  if (with_hessian) out.hess = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < num_terms(); ++k) {
    const double w = z[k] / acc;
    const double* a = exps_.data() + k * nvars_;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (a[i] == 0.0) continue;
      const double wa = w * a[i];
      out.grad[i] += wa;
      if (!with_hessian) continue;
      for (Eigen::Index j = 0; j <= i; ++j) out.hess(i, j) += wa * a[j];
    }
  }
  if (with_hessian) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        out.hess(i, j) -= out.grad[i] * out.grad[j];
        out.hess(j, i) = out.hess(i, j);
      }
    }
  }
  return out;
}

FactoredPosynomial& FactoredPosynomial::times(Posynomial factor, unsigned power) {
  check_dims(factor.num_vars(), nvars_);
  if (factor.empty()) throw ContractError("zero factor in a posynomial product");
  if (power == 0) return *this;
  factors_.push_back({std::move(factor), power});
  return *this;
}

Posynomial FactoredPosynomial::expand() const {
  Posynomial out = Posynomial::constant(nvars_, 1.0);
  for (const auto& f : factors_) out *= f.poly.pow(f.power);
  return out;
}

FactoredPosynomial FactoredPosynomial::substitute(std::size_t index, double value) const {
  FactoredPosynomial out(nvars_);
  for (const auto& f : factors_) out.times(f.poly.substitute(index, value), f.power);
  return out;
}

FactoredPosynomial FactoredPosynomial::extend(std::size_t nvars) const {
  FactoredPosynomial out(nvars);
  for (const auto& f : factors_) out.times(f.poly.extend(nvars), f.power);
  return out;
}

double FactoredPosynomial::evaluate(std::span<const double> x) const {
  double prod = 1.0;
  for (const auto& f : factors_) prod *= std::pow(f.poly.evaluate(x), static_cast<double>(f.power));
  return prod;
}

double FactoredPosynomial::log_value(std::span<const double> y) const {
  double sum = 0.0;
  for (const auto& f : factors_) sum += f.power * f.poly.log_value(y);
  return sum;
}

LogEval FactoredPosynomial::log_eval(std::span<const double> y, bool with_hessian) const {
  const auto n = static_cast<Eigen::Index>(nvars_);
  LogEval out;
  out.grad = Eigen::VectorXd::Zero(n);
  if (with_hessian) out.hess = Eigen::MatrixXd::Zero(n, n);
  for (const auto& f : factors_) {
    const LogEval e = f.poly.log_eval(y, with_hessian);
    const double w = f.power;
    out.value += w * e.value;
    out.grad += w * e.grad;
    if (with_hessian) out.hess += w * e.hess;
  }
  return out;
}

}  // namespace ehrelay
