#include <gtest/gtest.h>

#include <cmath>

#include "ehrelay/secrecy_objective.hpp"
#include "test_support.hpp"

namespace ehrelay {
namespace {

using testing::Sampler;

constexpr CaseId kCases[] = {CaseId::I, CaseId::II, CaseId::III};

struct Instance {
  ChannelRealization ch;
  SystemParams sys;
  Allocation alloc;
  std::optional<CsiErrorBounds> err;
};

Instance random_instance(Sampler& s, bool with_error) {
  Instance in;
  in.ch = s.channel();
  in.sys = {s.log_uniform(1.0, 1e4), s.uniform(0.1, 0.9), s.log_uniform(0.5, 2.0), 1.0};
  in.alloc = s.allocation(in.sys.P);
  if (with_error) in.err = s.bounds(0.2);
  return in;
}

void check_identity(bool with_error, double tol) {
  Sampler s(with_error ? 42 : 41);
  int matched[3] = {0, 0, 0};
  for (int i = 0; i < 1000; ++i) {
    const Instance in = random_instance(s, with_error);
    const SecrecyOutcome out = secrecy_outcome(in.alloc, in.ch, in.sys, in.err);
    const DesignPoint x = to_design_point(in.alloc, in.ch, in.sys);
    for (int c = 0; c < 3; ++c) {
      const PosyRatio r = build_case_ratio(kCases[c], in.ch, in.sys, in.err);
      const double rate = r.rate(x);
      EXPECT_NEAR(rate, case_rate(kCases[c], out), tol);
      if (out.case_id == kCases[c]) {
        ++matched[c];
        EXPECT_NEAR(rate, out.c_sum, tol);
      }
    }
  }
  for (int m : matched) EXPECT_GT(m, 0);
}

TEST(BuildCaseRatio, RateIdentityPerfectCsi) { check_identity(false, 1e-9); }

TEST(BuildCaseRatio, RateIdentityWorstCaseCsi) { check_identity(true, 1e-7); }

TEST(BuildCaseRatio, CaseTwoIsThePositivePartOfDirectionOne) {
  Sampler s(43);
  int seen = 0;
  for (int i = 0; i < 2000 && seen < 50; ++i) {
    const Instance in = random_instance(s, false);
    const SecrecyOutcome out = secrecy_outcome(in.alloc, in.ch, in.sys);
    if (!(out.c2s < out.c2r)) continue;
    ++seen;
    const double rate = build_case_ratio(CaseId::II, in.ch, in.sys).rate(to_design_point(in.alloc, in.ch, in.sys));
    EXPECT_NEAR(rate, out.c1s - out.c1r, 1e-9);
    if (out.c1s >= out.c1r) EXPECT_NEAR(rate, out.c_sum, 1e-9);
  }
  EXPECT_GT(seen, 0);
}

TEST(BuildCaseRatio, CaseThreeMirrorsCaseTwo) {
  Sampler s(44);
  for (int i = 0; i < 200; ++i) {
    const Instance in = random_instance(s, true);
    const ChannelRealization sch{in.ch.g2, in.ch.g1, in.ch.gJ};
    const CsiErrorBounds& e = *in.err;
    const CsiErrorBounds se{e.eps2, e.eps1, e.epsJ, {e.known[1], e.known[0], e.known[2]}};
    DesignPoint x = to_design_point(in.alloc, in.ch, in.sys);
    DesignPoint sx = x;
    std::swap(sx[kGamma1], sx[kGamma2]);
    const double two = build_case_ratio(CaseId::II, in.ch, in.sys, in.err).rate(x);
    const double three = build_case_ratio(CaseId::III, sch, in.sys, se).rate(sx);
    EXPECT_NEAR(two, three, 1e-10);
  }
}

TEST(BuildCaseRatio, EveryTermHasPositiveCoefficient) {
  Sampler s(45);
  for (int i = 0; i < 20; ++i) {
    const Instance in = random_instance(s, i % 2 == 1);
    for (CaseId c : kCases) {
      const PosyRatio r = build_case_ratio(c, in.ch, in.sys, in.err);
      for (const auto* fp : {&r.f, &r.g}) {
        ASSERT_FALSE(fp->factors().empty());
        for (const auto& factor : fp->factors()) {
          ASSERT_GT(factor.poly.num_terms(), 0u);
          for (double coeff : factor.poly.coeffs()) EXPECT_GT(coeff, 0.0);
        }
      }
    }
  }
}

TEST(BuildCaseRatio, CaseOneHasThePrintedFactors) {
  Sampler s(46);
  for (int i = 0; i < 200; ++i) {
    const Instance in = random_instance(s, false);
    const PosyRatio r = build_case_ratio(CaseId::I, in.ch, in.sys);
    const DesignPoint x = to_design_point(in.alloc, in.ch, in.sys);
    const double b = x[kBeta], bt = x[kBetaTilde], y1 = x[kGamma1], y2 = x[kGamma2], yj = x[kGammaJ];
    const double G = y1 + y2 + yj, eta = in.sys.eta, g1 = in.ch.g1, g2 = in.ch.g2;
    const double d2 = (g2 * b * eta + bt) * G + 1.0;
    const double d1 = (g1 * b * eta + bt) * G + 1.0;
    const double f = (bt * G + 1.0) * (bt * G + 1.0) * d2 * d1;
    const double g = (d2 + g2 * eta * b * bt * y1 * G) * (bt * (y2 + yj) + 1.0) *
                     (d1 + g1 * eta * b * bt * y2 * G) * (bt * (y1 + yj) + 1.0);
    const std::span<const double> xs(x.data(), x.size());
    EXPECT_NEAR(r.f.evaluate(xs), f, 1e-9 * f);
    EXPECT_NEAR(r.g.evaluate(xs), g, 1e-9 * g);
    EXPECT_NEAR(r.f.expand().evaluate(xs), f, 1e-9 * f);
  }
}

TEST(BuildCaseRatio, RejectsCaseFour) {
  EXPECT_THROW((void)build_case_ratio(CaseId::IV, testing::kBetaChannel, testing::system_db(20.0)), ContractError);
}

TEST(ClassifyCase, ZeroAllocation) {
  EXPECT_EQ(classify_case(Allocation::with_beta(0, 0, 0, 0.5), testing::kBetaChannel, testing::system_db(20.0)),
            CaseId::IV);
}

TEST(ClassifyCase, SymmetricWithStrongJammer) {
  const SystemParams sys{120.0, 0.5, 1.0, 1.0};
  const Allocation a = Allocation::with_beta(10.0, 10.0, 100.0, 0.5);
  const ChannelRealization ch{1.0, 1.0, 1.0};
  const SecrecyOutcome o = secrecy_outcome(a, ch, sys);
  EXPECT_EQ(classify_case(a, ch, sys), CaseId::I);
  EXPECT_NEAR(o.c1s - o.c1r, o.c2s - o.c2r, 1e-12);
  EXPECT_GT(o.c1s - o.c1r, 0.0);
}

TEST(DesignPoint, RoundTrip) {
  Sampler s(47);
  for (int i = 0; i < 50; ++i) {
    const Instance in = random_instance(s, false);
    const Allocation back = from_design_point(to_design_point(in.alloc, in.ch, in.sys), in.ch, in.sys);
    EXPECT_NEAR(back.P1, in.alloc.P1, 1e-12 * in.sys.P);
    EXPECT_NEAR(back.P2, in.alloc.P2, 1e-12 * in.sys.P);
    EXPECT_NEAR(back.PJ, in.alloc.PJ, 1e-12 * in.sys.P);
    EXPECT_EQ(back.beta, in.alloc.beta);
    EXPECT_EQ(back.beta_tilde, in.alloc.beta_tilde);
  }
}

}  // namespace
}  // namespace ehrelay
