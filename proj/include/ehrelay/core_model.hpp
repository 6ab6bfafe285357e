#pragma once

// Physical model of the energy-harvesting two-way untrusted relay with a
// friendly jammer: harvested power, relay/node SNRs and secrecy rates under
// perfect and worst-case (bounded-error) channel knowledge.

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace ehrelay {

/// Raised when an argument violates a documented precondition.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Link indices shared by every per-link array.
enum Link : int { kLink1 = 0, kLink2 = 1, kLinkJ = 2 };

/// Power gains |h1|^2, |h2|^2, |hJ|^2 of the reciprocal links.
struct ChannelRealization {
  double g1 = 1.0;
  double g2 = 1.0;
  double gJ = 1.0;

  [[nodiscard]] double gain(Link l) const { return l == kLink1 ? g1 : (l == kLink2 ? g2 : gJ); }
  void validate() const;
  bool operator==(const ChannelRealization&) const = default;
};

struct SystemParams {
  double P = 1.0;    ///< total power budget (linear, W); zero is allowed and yields no secrecy
  double eta = 0.5;  ///< energy conversion efficiency, 0 < eta < 1
  double N0 = 1.0;   ///< noise power (W)
  double T = 1.0;    ///< duration of the two-slot frame (s)

  void validate() const;
};

/// Decision variables. beta_tilde is kept explicitly so the relaxed form
/// beta + beta_tilde <= 1 of the optimizer can be represented; a valid
/// allocation always has them summing to one.
struct Allocation {
  double P1 = 0.0;
  double P2 = 0.0;
  double PJ = 0.0;
  double beta = 0.5;
  double beta_tilde = 0.5;

  static Allocation with_beta(double P1, double P2, double PJ, double beta) {
    return {P1, P2, PJ, beta, 1.0 - beta};
  }
  static Allocation equal_split(double P, double beta) {
    return with_beta(P / 3.0, P / 3.0, P / 3.0, beta);
  }

  [[nodiscard]] double total_power() const { return P1 + P2 + PJ; }
  [[nodiscard]] double power(Link l) const { return l == kLink1 ? P1 : (l == kLink2 ? P2 : PJ); }

  /// Throws ContractError unless the allocation is feasible for budget `P`.
  void validate(double P, double tol = 1e-9) const;
};

/// Per-link worst-case estimation error magnitudes. A link flagged in
/// `known` is treated as perfectly estimated regardless of its epsilon.
struct CsiErrorBounds {
  double eps1 = 0.0;
  double eps2 = 0.0;
  double epsJ = 0.0;
  std::array<bool, 3> known{false, false, false};

  static CsiErrorBounds uniform(double eps, std::array<bool, 3> known = {false, false, false}) {
    return {eps, eps, eps, known};
  }

  /// Error magnitude after applying the known mask.
  [[nodiscard]] double effective(Link l) const;
  [[nodiscard]] bool all_zero() const;
  void validate() const;
};

enum class CaseId { I, II, III, IV };

[[nodiscard]] std::string to_string(CaseId c);
[[nodiscard]] CaseId case_from_string(const std::string& s);

/// Sign-pattern case of the two per-direction secrecy differences.
/// Zero differences count as nonnegative.
[[nodiscard]] CaseId case_from_differences(double d1, double d2);

struct SecrecyOutcome {
  double c1s = 0.0;  ///< R -> S1 link rate
  double c1r = 0.0;  ///< relay's rate on x2
  double c2s = 0.0;  ///< R -> S2 link rate
  double c2r = 0.0;  ///< relay's rate on x1
  CaseId case_id = CaseId::IV;
  double c_sum = 0.0;
};

using SnrPair = std::pair<double, double>;

/// Normalized SNR gamma_i = P_i g_i / N0.
[[nodiscard]] double normalized_snr(double power, double gain, double N0);

/// Relay transmit power P_H = beta*eta*(P1 g1 + P2 g2 + PJ gJ).
[[nodiscard]] double harvested_power(const Allocation& alloc, const ChannelRealization& ch,
                                     const SystemParams& sys);
/// Energy harvested over the first slot, P_H * T / 2.
[[nodiscard]] double harvested_energy(const Allocation& alloc, const ChannelRealization& ch,
                                      const SystemParams& sys);

/// (SNR_R1, SNR_R2): the relay's SNR on x2 and on x1 respectively.
[[nodiscard]] SnrPair relay_snrs(const Allocation& alloc, const ChannelRealization& ch,
                                 const SystemParams& sys);

/// Relay amplification factor alpha.
[[nodiscard]] double amplification_gain(const Allocation& alloc, const ChannelRealization& ch,
                                        const SystemParams& sys);

/// (SNR_S1, SNR_S2) after perfect cancellation of self-interference and jamming.
[[nodiscard]] SnrPair node_snrs(const Allocation& alloc, const ChannelRealization& ch,
                                const SystemParams& sys);

/// Channel seen by the relay under worst-case estimation error: true
/// amplitude |h_i| = |h_i_hat| + eps_i.
[[nodiscard]] ChannelRealization worst_case_channel(const ChannelRealization& est_ch,
                                                    const CsiErrorBounds& err);

/// Worst-case node SNRs with residual self-interference and jammer leakage.
/// The amplification factor is evaluated on worst_case_channel(est_ch, err).
[[nodiscard]] SnrPair worst_case_node_snrs(const Allocation& alloc,
                                           const ChannelRealization& est_ch,
                                           const CsiErrorBounds& err, const SystemParams& sys);

/// Per-direction rates, sign case and sum-secrecy rate. With `err` present,
/// `ch` holds the estimated gains; node rates come from the worst-case SNRs
/// and relay rates from the worst-case channel.
[[nodiscard]] SecrecyOutcome secrecy_outcome(const Allocation& alloc, const ChannelRealization& ch,
                                             const SystemParams& sys,
                                             const std::optional<CsiErrorBounds>& err = std::nullopt);

/// (1/2) log2(1 + snr).
[[nodiscard]] double half_log2_rate(double snr);

/// Linear budget for a power given in dB relative to N0.
[[nodiscard]] double budget_from_db(double p_db, double N0);

}  // namespace ehrelay
