#pragma once

// Case-dependent posynomial pair (f, g) whose ratio g/f equals the product of
// the secure directions' (1 + SNR_S)/(1 + SNR_R) ratios, so that
// (1/2) log2(g/f) is the case's secrecy rate.

#include <array>
#include <optional>

#include "ehrelay/core_model.hpp"
#include "ehrelay/posynomial.hpp"

namespace ehrelay {

/// Slots of the optimization variables x = (beta, beta_tilde, gamma1, gamma2, gammaJ).
/// gamma_i = P_i * g_i / N0 with g_i the (estimated) gain handed to the builder.
enum Var : std::size_t { kBeta = 0, kBetaTilde, kGamma1, kGamma2, kGammaJ, kNumVars };

using DesignPoint = std::array<double, kNumVars>;

struct PosyRatio {
  FactoredPosynomial f{kNumVars};
  FactoredPosynomial g{kNumVars};
  CaseId case_id = CaseId::I;

  /// (1/2) log2(g(x)/f(x)).
  [[nodiscard]] double rate(const DesignPoint& x) const;
};

/// Builds (f, g) for case I, II or III. Case II is the S1-side direction
/// (x2 delivered to S1), case III its mirror. With `err`, `ch` holds
/// estimated gains and the worst-case node SNRs are used.
[[nodiscard]] PosyRatio build_case_ratio(CaseId case_id, const ChannelRealization& ch,
                                         const SystemParams& sys,
                                         const std::optional<CsiErrorBounds>& err = std::nullopt);

[[nodiscard]] CaseId classify_case(const Allocation& alloc, const ChannelRealization& ch,
                                   const SystemParams& sys,
                                   const std::optional<CsiErrorBounds>& err = std::nullopt);

/// Sum of the per-direction differences that `case_id` assumes nonnegative;
/// equals (1/2) log2(g/f) of that case's ratio at any point.
[[nodiscard]] double case_rate(CaseId case_id, const SecrecyOutcome& outcome);

[[nodiscard]] DesignPoint to_design_point(const Allocation& alloc, const ChannelRealization& ch,
                                          const SystemParams& sys);
/// Inverse of to_design_point; beta_tilde is taken as given, not renormalized.
[[nodiscard]] Allocation from_design_point(const DesignPoint& x, const ChannelRealization& ch,
                                           const SystemParams& sys);

}  // namespace ehrelay
