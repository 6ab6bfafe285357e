#include "ehrelay/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ehrelay {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

template <typename... Args>
[[noreturn]] void fail(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  throw ContractError(os.str());
}

double safe_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

struct Gammas {
  double g1, g2, gJ;
  [[nodiscard]] double sum() const { return g1 + g2 + gJ; }
};

Gammas gammas(const Allocation& a, const ChannelRealization& ch, double N0) {
  return {normalized_snr(a.P1, ch.g1, N0), normalized_snr(a.P2, ch.g2, N0),
          normalized_snr(a.PJ, ch.gJ, N0)};
}

double alpha_squared(const Allocation& a, const ChannelRealization& ch, const SystemParams& sys) {
  const double total = gammas(a, ch, sys.N0).sum();
  return safe_ratio(a.beta * sys.eta * total, a.beta_tilde * total + 1.0);
}

}  // namespace

void ChannelRealization::validate() const {
  if (!positive_finite(g1) || !positive_finite(g2) || !positive_finite(gJ)) {
    fail("channel gains must be positive and finite (g1=", g1, ", g2=", g2, ", gJ=", gJ, ")");
  }
}

void SystemParams::validate() const {
  if (!(std::isfinite(P) && P >= 0.0)) fail("power budget must be finite and nonnegative, got ", P);
  if (!(eta > 0.0 && eta < 1.0)) fail("conversion efficiency must lie in (0,1), got ", eta);
  if (!positive_finite(N0)) fail("noise power must be positive, got ", N0);
  if (!positive_finite(T)) fail("slot duration must be positive, got ", T);
}

void Allocation::validate(double P, double tol) const {
  for (double p : {P1, P2, PJ}) {
    if (!(std::isfinite(p) && p >= 0.0)) fail("powers must be finite and nonnegative");
  }
  if (total_power() > P * (1.0 + tol) + tol) {
    fail("allocation exceeds the budget: ", total_power(), " > ", P);
  }
  if (!(beta >= 0.0 && beta <= 1.0 && beta_tilde >= 0.0 && beta_tilde <= 1.0)) {
    fail("splitting ratios must lie in [0,1] (beta=", beta, ", beta_tilde=", beta_tilde, ")");
  }
  if (std::abs(beta + beta_tilde - 1.0) > tol) {
    fail("beta + beta_tilde must equal 1, got ", beta + beta_tilde);
  }
}

double CsiErrorBounds::effective(Link l) const {
  if (known[static_cast<std::size_t>(l)]) return 0.0;
  return l == kLink1 ? eps1 : (l == kLink2 ? eps2 : epsJ);
}

bool CsiErrorBounds::all_zero() const {
  return effective(kLink1) == 0.0 && effective(kLink2) == 0.0 && effective(kLinkJ) == 0.0;
}

void CsiErrorBounds::validate() const {
  for (double e : {eps1, eps2, epsJ}) {
    if (!(std::isfinite(e) && e >= 0.0)) fail("error bounds must be finite and nonnegative");
  }
}

std::string to_string(CaseId c) {
  switch (c) {
    case CaseId::I: return "I";
    case CaseId::II: return "II";
    case CaseId::III: return "III";
    case CaseId::IV: return "IV";
  }
  return "?";
}

CaseId case_from_string(const std::string& s) {
  if (s == "I") return CaseId::I;
  if (s == "II") return CaseId::II;
  if (s == "III") return CaseId::III;
  if (s == "IV") return CaseId::IV;
  fail("unknown case '", s, "'");
}

CaseId case_from_differences(double d1, double d2) {
  const bool pos1 = d1 >= 0.0;
  const bool pos2 = d2 >= 0.0;
  if (pos1 && pos2) return CaseId::I;
  if (pos1) return CaseId::II;
  if (pos2) return CaseId::III;
  return CaseId::IV;
}

double normalized_snr(double power, double gain, double N0) { return power * gain / N0; }

double harvested_power(const Allocation& a, const ChannelRealization& ch, const SystemParams& sys) {
  return a.beta * sys.eta * (a.P1 * ch.g1 + a.P2 * ch.g2 + a.PJ * ch.gJ);
}

double harvested_energy(const Allocation& a, const ChannelRealization& ch, const SystemParams& sys) {
  return harvested_power(a, ch, sys) * (sys.T / 2.0);
}

SnrPair relay_snrs(const Allocation& a, const ChannelRealization& ch, const SystemParams& sys) {
  const Gammas g = gammas(a, ch, sys.N0);
  const double bt = a.beta_tilde;
  const double r2 = safe_ratio(bt * g.g1, bt * g.g2 + bt * g.gJ + 1.0);
  const double r1 = safe_ratio(bt * g.g2, bt * g.g1 + bt * g.gJ + 1.0);
  return {r1, r2};
}

double amplification_gain(const Allocation& a, const ChannelRealization& ch,
                          const SystemParams& sys) {
  return std::sqrt(alpha_squared(a, ch, sys));
}

SnrPair node_snrs(const Allocation& a, const ChannelRealization& ch, const SystemParams& sys) {
  const Gammas g = gammas(a, ch, sys.N0);
  const double total = g.sum();
  const double bbe = a.beta * a.beta_tilde * sys.eta * total;
  const double s2 = safe_ratio(g.g1 * ch.g2 * bbe,
                               (ch.g2 * a.beta * sys.eta + a.beta_tilde) * total + 1.0);
  const double s1 = safe_ratio(g.g2 * ch.g1 * bbe,
                               (ch.g1 * a.beta * sys.eta + a.beta_tilde) * total + 1.0);
  return {s1, s2};
}

ChannelRealization worst_case_channel(const ChannelRealization& est, const CsiErrorBounds& err) {
  auto widen = [&](Link l) {
    const double amp = std::sqrt(est.gain(l)) + err.effective(l);
    return amp * amp;
  };
  if (err.all_zero()) return est;
  return {widen(kLink1), widen(kLink2), widen(kLinkJ)};
}

SnrPair worst_case_node_snrs(const Allocation& a, const ChannelRealization& est,
                             const CsiErrorBounds& err, const SystemParams& sys) {
  const double a2 = alpha_squared(a, worst_case_channel(est, err), sys);
  const double e1 = err.effective(kLink1);
  const double e2 = err.effective(kLink2);
  const double eJ = err.effective(kLinkJ);
  const double rx_est = a.P1 * est.g1 + a.P2 * est.g2 + a.PJ * est.gJ;
  const double rx_err = a.P1 * e1 * e1 + a.P2 * e2 * e2 + a.PJ * eJ * eJ;
  const double bt = a.beta_tilde;

  auto node = [&](double g_self, double eps_self, double p_other, double g_other) {
    const double amp = std::sqrt(g_self) + eps_self;
    const double num = g_self * a2 * bt * p_other * g_other;
    const double den = sys.N0 * (amp * amp * a2 + 1.0) + a2 * bt * eps_self * eps_self * rx_est +
                       a2 * bt * g_self * rx_err;
    return safe_ratio(num, den);
  };
  const double s2 = node(est.g2, e2, a.P1, est.g1);
  const double s1 = node(est.g1, e1, a.P2, est.g2);
  return {s1, s2};
}

double half_log2_rate(double snr) { return 0.5 * std::log2(1.0 + snr); }

SecrecyOutcome secrecy_outcome(const Allocation& a, const ChannelRealization& ch,
                               const SystemParams& sys, const std::optional<CsiErrorBounds>& err) {
  SnrPair relay;
  SnrPair node;
  if (err && !err->all_zero()) {
    relay = relay_snrs(a, worst_case_channel(ch, *err), sys);
    node = worst_case_node_snrs(a, ch, *err, sys);
  } else {
    relay = relay_snrs(a, ch, sys);
    node = node_snrs(a, ch, sys);
  }
  SecrecyOutcome out;
  out.c1s = half_log2_rate(node.first);
  out.c2s = half_log2_rate(node.second);
  out.c1r = half_log2_rate(relay.first);
  out.c2r = half_log2_rate(relay.second);
  const double d1 = out.c1s - out.c1r;
  const double d2 = out.c2s - out.c2r;
  // A direction that delivers nothing to its destination never counts as
  // secure, so the all-zero allocation lands in case IV.
  out.case_id = case_from_differences(out.c1s > 0.0 ? d1 : -1.0, out.c2s > 0.0 ? d2 : -1.0);
  out.c_sum = std::max(d1, 0.0) + std::max(d2, 0.0);
  return out;
}

double budget_from_db(double p_db, double N0) { return N0 * std::pow(10.0, p_db / 10.0); }

}  // namespace ehrelay
