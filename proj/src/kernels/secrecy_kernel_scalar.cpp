#include <cmath>
#include <numbers>

#include "ehrelay/kernels/secrecy_kernel.hpp"
#include "secrecy_point.hpp"

namespace ehrelay::kernels {

SecrecyConstants SecrecyConstants::make(const ChannelRealization& ch, const SystemParams& sys,
                                        const std::optional<CsiErrorBounds>& err) {
  ch.validate();
  sys.validate();
  const CsiErrorBounds e = err.value_or(CsiErrorBounds{});
  e.validate();
  const ChannelRealization truth = worst_case_channel(ch, e);
  const double e1 = e.effective(kLink1);
  const double e2 = e.effective(kLink2);
  const double eJ = e.effective(kLinkJ);

  SecrecyConstants k;
  k.c1 = ch.g1 / sys.N0;
  k.c2 = ch.g2 / sys.N0;
  k.cJ = ch.gJ / sys.N0;
  k.t1 = truth.g1 / sys.N0;
  k.t2 = truth.g2 / sys.N0;
  k.tJ = truth.gJ / sys.N0;
  k.w1 = e1 * e1 / sys.N0;
  k.w2 = e2 * e2 / sys.N0;
  k.wJ = eJ * eJ / sys.N0;
  k.g1 = ch.g1;
  k.g2 = ch.g2;
  k.G1 = truth.g1;
  k.G2 = truth.g2;
  k.e1sq = e1 * e1;
  k.e2sq = e2 * e2;
  k.eta = sys.eta;
  return k;
}

void AllocationBatch::validate(std::size_t out_size) const {
  const std::size_t n = beta.size();
  if (p1.size() != n || p2.size() != n || pj.size() != n || out_size != n) {
    throw ContractError("allocation batch arrays must have equal length");
  }
}

void secrecy_gain_scalar(const SecrecyConstants& k, const AllocationBatch& batch,
                         std::span<double> out) {
  batch.validate(out.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out[i] = detail::secrecy_gain_point(k, batch.beta[i], batch.p1[i], batch.p2[i], batch.pj[i]);
  }
}

double rate_from_gain(double q) { return 0.5 * std::log2(q); }

}  // namespace ehrelay::kernels
