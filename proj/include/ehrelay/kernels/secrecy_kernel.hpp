#pragma once

// Batched evaluation of the sum-secrecy rate over many allocations of one
// channel realization. Used by the exhaustive-search oracle, whose inner loop
// is millions of independent closed-form evaluations.
//
// The kernel returns the secrecy gain
//   Q = max((1+SNR_S1)/(1+SNR_R1), 1) * max((1+SNR_S2)/(1+SNR_R2), 1),
// which is monotone in the sum-secrecy rate, C_S = (1/2) log2 Q. Keeping the
// logarithm out of the vector loop lets every variant use only + - * / and
// max, so the AVX2 and scalar variants agree bit for bit.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

#include "ehrelay/core_model.hpp"

namespace ehrelay::kernels {

/// Per-realization constants, pre-divided by N0 where possible.
struct SecrecyConstants {
  double c1 = 0.0, c2 = 0.0, cJ = 0.0;     ///< estimated gain / N0
  double t1 = 0.0, t2 = 0.0, tJ = 0.0;     ///< worst-case true gain / N0
  double w1 = 0.0, w2 = 0.0, wJ = 0.0;     ///< eps_i^2 / N0
  double g1 = 0.0, g2 = 0.0;               ///< estimated gains
  double G1 = 0.0, G2 = 0.0;               ///< worst-case true gains
  double e1sq = 0.0, e2sq = 0.0;           ///< eps_i^2 of the node links
  double eta = 0.5;

  static SecrecyConstants make(const ChannelRealization& ch, const SystemParams& sys,
                               const std::optional<CsiErrorBounds>& err = std::nullopt);
};

/// Structure-of-arrays batch of allocations (beta_tilde = 1 - beta).
struct AllocationBatch {
  std::span<const double> beta;
  std::span<const double> p1;
  std::span<const double> p2;
  std::span<const double> pj;

  [[nodiscard]] std::size_t size() const { return beta.size(); }
  void validate(std::size_t out_size) const;
};

enum class Isa { kScalar, kAvx2 };

[[nodiscard]] std::string_view isa_name(Isa isa);
/// Best variant supported by both the build and the running CPU.
[[nodiscard]] Isa detect_isa();
[[nodiscard]] bool isa_available(Isa isa);

void secrecy_gain_scalar(const SecrecyConstants& k, const AllocationBatch& batch,
                         std::span<double> out);
#if defined(EHRELAY_HAVE_AVX2_KERNEL)
void secrecy_gain_avx2(const SecrecyConstants& k, const AllocationBatch& batch,
                       std::span<double> out);
#endif

/// Runs the requested variant; throws ContractError if it is unavailable.
void secrecy_gain(Isa isa, const SecrecyConstants& k, const AllocationBatch& batch,
                  std::span<double> out);
/// Runs the variant chosen by detect_isa().
void secrecy_gain(const SecrecyConstants& k, const AllocationBatch& batch, std::span<double> out);

/// C_S = (1/2) log2(Q).
[[nodiscard]] double rate_from_gain(double q);

}  // namespace ehrelay::kernels
