#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "ehrelay/kernels/secrecy_kernel.hpp"
#include "test_support.hpp"

namespace ehrelay::kernels {
namespace {

using testing::Sampler;

struct Batch {
  std::vector<double> beta, p1, p2, pj;
  [[nodiscard]] AllocationBatch view() const { return {beta, p1, p2, pj}; }
};

// Sizes that are not multiples of the vector width, with zero powers and
// beta at the extremes mixed in.
Batch random_batch(Sampler& s, std::size_t n, double P) {
  Batch b;
  for (std::size_t i = 0; i < n; ++i) {
    const Allocation a = s.allocation(P);
    b.beta.push_back(i % 17 == 0 ? 0.0 : (i % 19 == 0 ? 1.0 : a.beta));
    b.p1.push_back(i % 5 == 0 ? 0.0 : a.P1);
    b.p2.push_back(i % 7 == 0 ? 0.0 : a.P2);
    b.pj.push_back(i % 3 == 0 ? 0.0 : a.PJ);
  }
  return b;
}

TEST(SecrecyKernel, ScalarMatchesCoreModel) {
  Sampler s(61);
  for (int rep = 0; rep < 20; ++rep) {
    const ChannelRealization ch = s.channel();
    const SystemParams sys{s.log_uniform(1.0, 1e4), s.uniform(0.1, 0.9), s.log_uniform(0.5, 2.0), 1.0};
    const std::optional<CsiErrorBounds> err =
        rep % 2 ? std::optional<CsiErrorBounds>(s.bounds(0.2)) : std::nullopt;
    const Batch b = random_batch(s, 101, sys.P);
    std::vector<double> q(b.beta.size());
    secrecy_gain_scalar(SecrecyConstants::make(ch, sys, err), b.view(), q);
    for (std::size_t i = 0; i < q.size(); ++i) {
      const Allocation a = Allocation::with_beta(b.p1[i], b.p2[i], b.pj[i], b.beta[i]);
      const double expected = secrecy_outcome(a, ch, sys, err).c_sum;
      EXPECT_NEAR(rate_from_gain(q[i]), expected, 1e-10 * std::max(1.0, expected)) << i;
      EXPECT_GE(q[i], 1.0);
    }
  }
}

TEST(SecrecyKernel, VariantsAgreeBitForBit) {
  if (!isa_available(Isa::kAvx2)) GTEST_SKIP() << "no AVX2 variant on this build or CPU";
  Sampler s(62);
  for (int rep = 0; rep < 50; ++rep) {
    const ChannelRealization ch = s.channel();
    const SystemParams sys{s.log_uniform(1.0, 1e5), s.uniform(0.1, 0.9), s.log_uniform(0.5, 2.0), 1.0};
    const std::optional<CsiErrorBounds> err =
        rep % 2 ? std::optional<CsiErrorBounds>(s.bounds(0.3)) : std::nullopt;
    const Batch b = random_batch(s, 1 + static_cast<std::size_t>(rep) * 13, sys.P);
    const SecrecyConstants k = SecrecyConstants::make(ch, sys, err);
    std::vector<double> qs(b.beta.size()), qv(b.beta.size());
    secrecy_gain(Isa::kScalar, k, b.view(), qs);
    secrecy_gain(Isa::kAvx2, k, b.view(), qv);
    EXPECT_EQ(0, std::memcmp(qs.data(), qv.data(), qs.size() * sizeof(double)));
  }
}

TEST(SecrecyKernel, DispatchPicksAnAvailableVariant) {
  EXPECT_TRUE(isa_available(detect_isa()));
  EXPECT_TRUE(isa_available(Isa::kScalar));
  EXPECT_EQ(isa_name(Isa::kScalar), "scalar");
  EXPECT_EQ(isa_name(Isa::kAvx2), "avx2");
}

TEST(SecrecyKernel, RejectsMismatchedSpans) {
  std::vector<double> a(4, 1.0), b(3, 1.0), out(4);
  const SecrecyConstants k = SecrecyConstants::make(testing::kBetaChannel, testing::system_db(10.0));
  EXPECT_THROW(secrecy_gain(Isa::kScalar, k, {a, a, b, a}, out), ContractError);
  EXPECT_THROW(secrecy_gain(Isa::kScalar, k, {a, a, a, a}, std::span<double>(out.data(), 2)), ContractError);
}

TEST(SecrecyKernel, GainOfOneIsZeroRate) { EXPECT_EQ(rate_from_gain(1.0), 0.0); }

}  // namespace
}  // namespace ehrelay::kernels
