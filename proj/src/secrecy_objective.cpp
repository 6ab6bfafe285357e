#include "ehrelay/secrecy_objective.hpp"

#include <cmath>
#include <numbers>

namespace ehrelay {

namespace {

Posynomial var(Var v, double coeff = 1.0) { return Posynomial::variable(kNumVars, v, coeff); }

// Pieces of one secrecy direction, named by its destination node `self`
// (S1 decodes x2, S2 decodes x1). For that direction
//   1 + SNR_S = (D + N) / D,   1 + SNR_R = relay_rx / relay_interference
// so it contributes D * relay_rx to f and (D + N) * relay_interference to g.
// All gammas are in estimated-gain units; k_i = true gain / estimated gain.
class RatioBuilder {
 public:
  RatioBuilder(const ChannelRealization& est, const SystemParams& sys,
               const std::optional<CsiErrorBounds>& err)
      : est_(est), sys_(sys), err_(err.value_or(CsiErrorBounds{})) {
    const ChannelRealization truth = worst_case_channel(est_, err_);
    scale_ = {truth.g1 / est_.g1, truth.g2 / est_.g2, truth.gJ / est_.gJ};
    true_gain_ = {truth.g1, truth.g2, truth.gJ};

    // Received sum at the relay under the true channel, in gamma-hat units.
    gamma_true_ = var(kGamma1, scale_[0]) + var(kGamma2, scale_[1]) + var(kGammaJ, scale_[2]);
    gamma_est_ = var(kGamma1) + var(kGamma2) + var(kGammaJ);
    // sum_i P_i eps_i^2 / N0
    leak_ = var(kGamma1, sq(err_.effective(kLink1)) / est_.g1) +
            var(kGamma2, sq(err_.effective(kLink2)) / est_.g2) +
            var(kGammaJ, sq(err_.effective(kLinkJ)) / est_.gJ);
    relay_rx_ = var(kBetaTilde) * gamma_true_ + 1.0;
  }

  [[nodiscard]] const Posynomial& relay_rx() const { return relay_rx_; }

  [[nodiscard]] Posynomial node_denominator(Link self) const {
    const double eps = err_.effective(self);
    const double g_self = est_.gain(self);
    Posynomial inner = Posynomial::constant(kNumVars, true_gain_[self]) +
                       var(kBetaTilde) * gamma_est_ * (eps * eps) +
                       var(kBetaTilde) * leak_ * g_self;
    return relay_rx_ + var(kBeta, sys_.eta) * gamma_true_ * inner;
  }

  [[nodiscard]] Posynomial node_numerator(Link self) const {
    const Link other = self == kLink1 ? kLink2 : kLink1;
    const Var other_gamma = other == kLink1 ? kGamma1 : kGamma2;
    return var(kBeta, est_.gain(self) * sys_.eta) * var(kBetaTilde) * var(other_gamma) * gamma_true_;
  }

  [[nodiscard]] Posynomial relay_interference(Link self) const {
    const Var self_gamma = self == kLink1 ? kGamma1 : kGamma2;
    return var(kBetaTilde) * (var(self_gamma, scale_[self]) + var(kGammaJ, scale_[kLinkJ])) + 1.0;
  }

 private:
  static double sq(double v) { return v * v; }

  ChannelRealization est_;
  SystemParams sys_;
  CsiErrorBounds err_;
  std::array<double, 3> scale_{};
  std::array<double, 3> true_gain_{};
  Posynomial gamma_true_;
  Posynomial gamma_est_;
  Posynomial leak_;
  Posynomial relay_rx_;
};

void append_direction(const RatioBuilder& b, Link self, PosyRatio& out) {
  const Posynomial den = b.node_denominator(self);
  out.f.times(den);
  out.g.times(den + b.node_numerator(self));
  out.g.times(b.relay_interference(self));
}

}  // namespace

double PosyRatio::rate(const DesignPoint& x) const {
  DesignPoint y;
  for (std::size_t i = 0; i < kNumVars; ++i) y[i] = std::log(x[i]);
  return 0.5 * (g.log_value(y) - f.log_value(y)) / std::numbers::ln2;
}

PosyRatio build_case_ratio(CaseId case_id, const ChannelRealization& ch, const SystemParams& sys,
                           const std::optional<CsiErrorBounds>& err) {
  if (case_id == CaseId::IV) {
    throw ContractError("case IV has zero secrecy rate and no ratio to optimize");
  }
  ch.validate();
  sys.validate();
  if (err) err->validate();

  const RatioBuilder b(ch, sys, err);
  PosyRatio out;
  out.case_id = case_id;
  switch (case_id) {
    case CaseId::I:
      out.f.times(b.relay_rx(), 2);
      append_direction(b, kLink2, out);
      append_direction(b, kLink1, out);
      break;
    case CaseId::II:
      out.f.times(b.relay_rx());
      append_direction(b, kLink1, out);
      break;
    case CaseId::III:
      out.f.times(b.relay_rx());
      append_direction(b, kLink2, out);
      break;
    case CaseId::IV:
      break;
  }
  return out;
}

CaseId classify_case(const Allocation& alloc, const ChannelRealization& ch, const SystemParams& sys,
                     const std::optional<CsiErrorBounds>& err) {
  return secrecy_outcome(alloc, ch, sys, err).case_id;
}

double case_rate(CaseId case_id, const SecrecyOutcome& o) {
  const double d1 = o.c1s - o.c1r;
  const double d2 = o.c2s - o.c2r;
  switch (case_id) {
    case CaseId::I: return d1 + d2;
    case CaseId::II: return d1;
    case CaseId::III: return d2;
    case CaseId::IV: return 0.0;
  }
  return 0.0;
}

DesignPoint to_design_point(const Allocation& a, const ChannelRealization& ch,
                            const SystemParams& sys) {
  return {a.beta, a.beta_tilde, normalized_snr(a.P1, ch.g1, sys.N0),
          normalized_snr(a.P2, ch.g2, sys.N0), normalized_snr(a.PJ, ch.gJ, sys.N0)};
}

Allocation from_design_point(const DesignPoint& x, const ChannelRealization& ch,
                             const SystemParams& sys) {
  Allocation a;
  a.beta = x[kBeta];
  a.beta_tilde = x[kBetaTilde];
  a.P1 = x[kGamma1] * sys.N0 / ch.g1;
  a.P2 = x[kGamma2] * sys.N0 / ch.g2;
  a.PJ = x[kGammaJ] * sys.N0 / ch.gJ;
  return a;
}

}  // namespace ehrelay
