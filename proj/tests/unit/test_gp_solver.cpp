#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "ehrelay/gp_solver.hpp"
#include "ehrelay/secrecy_objective.hpp"
#include "test_support.hpp"

namespace ehrelay {
namespace {

using testing::Sampler;

constexpr double kInf = std::numeric_limits<double>::infinity();

GpProblem unbounded(FactoredPosynomial objective) {
  GpProblem p;
  const auto n = static_cast<Eigen::Index>(objective.num_vars());
  p.objective = std::move(objective);
  p.lower = Eigen::VectorXd::Constant(n, -kInf);
  p.upper = Eigen::VectorXd::Constant(n, kInf);
  return p;
}

Posynomial random_posynomial(Sampler& s, std::size_t nvars, int terms) {
  Posynomial p(nvars);
  std::vector<double> e(nvars);
  for (int k = 0; k < terms; ++k) {
    for (auto& v : e) v = s.uniform(-2.0, 2.0);
    p.add_term(s.log_uniform(0.1, 10.0), e);
  }
  return p;
}

TEST(Condense, ExactOnMonomials) {
  Sampler s(31);
  for (int i = 0; i < 20; ++i) {
    const Posynomial g = random_posynomial(s, 3, 1);
    const std::vector<double> x0{s.log_uniform(0.1, 10), s.log_uniform(0.1, 10), s.log_uniform(0.1, 10)};
    const MonomialApprox m = condense(g, x0);
    const std::vector<double> x{s.log_uniform(0.1, 10), s.log_uniform(0.1, 10), s.log_uniform(0.1, 10)};
    EXPECT_NEAR(m.evaluate(x), g.evaluate(x), 1e-12 * g.evaluate(x));
  }
}

TEST(Condense, SymmetricStationaryPoint) {
  Posynomial g = Posynomial::variable(1, 0);
  g.add_term(1.0, std::vector<double>{-1.0});
  const MonomialApprox m = condense(g, std::vector<double>{1.0});
  EXPECT_NEAR(m.coeff, 2.0, 1e-15);
  ASSERT_EQ(m.exponents.size(), 1u);
  EXPECT_NEAR(m.exponents[0], 0.0, 1e-15);
}

TEST(Condense, MatchesValueGradientAndBoundsFromBelow) {
  Sampler s(32);
  for (int i = 0; i < 100; ++i) {
    const Posynomial g = random_posynomial(s, 5, 1 + i % 7);
    std::vector<double> x0(5);
    for (auto& v : x0) v = s.log_uniform(0.1, 10.0);
    const MonomialApprox m = condense(g, x0);
    EXPECT_NEAR(m.evaluate(x0), g.evaluate(x0), 1e-10 * g.evaluate(x0));
    std::vector<double> y0(5);
    for (std::size_t j = 0; j < 5; ++j) y0[j] = std::log(x0[j]);
    for (std::size_t j = 0; j < 5; ++j) {
      auto yp = y0, ym = y0;
      yp[j] += 1e-6;
      ym[j] -= 1e-6;
      EXPECT_NEAR(m.exponents[j], (g.log_value(yp) - g.log_value(ym)) / 2e-6, 1e-5);
    }
    for (int k = 0; k < 50; ++k) {
      std::vector<double> x(5);
      for (auto& v : x) v = s.log_uniform(0.01, 100.0);
      EXPECT_LE(m.evaluate(x), g.evaluate(x) * (1.0 + 1e-12));
    }
  }
}

TEST(Condense, RejectsNonPositiveInputs) {
  EXPECT_THROW((void)condense(Posynomial(2), std::vector<double>{1.0, 1.0}), ContractError);
  EXPECT_THROW((void)condense(Posynomial::constant(2, 1.0), std::vector<double>{1.0, 0.0}), ContractError);
}

TEST(SolveGp, LowerBoundIsActive) {
  // minimize x s.t. 3/x <= 1
  FactoredPosynomial obj(1);
  obj.times(Posynomial::variable(1, 0));
  GpProblem p = unbounded(obj);
  p.constraints.push_back(Posynomial::monomial(1, 3.0, std::vector<double>{-1.0}));
  Eigen::VectorXd y0(1);
  y0 << std::log(10.0);
  const GpSolution sol = solve_gp(p, y0);
  ASSERT_TRUE(sol.ok()) << sol.message;
  EXPECT_NEAR(std::exp(sol.y[0]), 3.0, 1e-8);
}

TEST(SolveGp, ProductUnderSumBudget) {
  // minimize 1/(xy) s.t. x + y <= 1
  FactoredPosynomial obj(2);
  obj.times(Posynomial::monomial(2, 1.0, std::vector<double>{-1.0, -1.0}));
  GpProblem p = unbounded(obj);
  p.constraints.push_back(Posynomial::variable(2, 0) + Posynomial::variable(2, 1));
  Eigen::VectorXd y0(2);
  y0 << std::log(0.1), std::log(0.3);
  const GpSolution sol = solve_gp(p, y0);
  ASSERT_TRUE(sol.ok()) << sol.message;
  EXPECT_NEAR(std::exp(sol.y[0]), 0.5, 1e-8);
  EXPECT_NEAR(std::exp(sol.y[1]), 0.5, 1e-8);
  EXPECT_NEAR(sol.log_objective, std::log(4.0), 1e-9);
}

TEST(SolveGp, ReportsInfeasibleStart) {
  FactoredPosynomial obj(1);
  obj.times(Posynomial::variable(1, 0));
  GpProblem p = unbounded(obj);
  p.constraints.push_back(Posynomial::variable(1, 0, 0.5));
  p.constraints.push_back(Posynomial::monomial(1, 3.0, std::vector<double>{-1.0}));
  Eigen::VectorXd y0(1);
  y0 << std::log(1.0);  // 3/x = 3 > 1
  const GpSolution sol = solve_gp(p, y0);
  EXPECT_EQ(sol.status, GpStatus::kInfeasibleStart);
  EXPECT_EQ(sol.violated_constraint, 1);
  EXPECT_FALSE(sol.message.empty());
}

TEST(SolveGp, RespectsBoxBounds) {
  FactoredPosynomial obj(1);
  obj.times(Posynomial::monomial(1, 1.0, std::vector<double>{-1.0}));
  GpProblem p = unbounded(obj);
  p.lower[0] = std::log(0.5);
  p.upper[0] = std::log(2.0);
  Eigen::VectorXd y0(1);
  y0 << 0.0;
  const GpSolution sol = solve_gp(p, y0);
  ASSERT_TRUE(sol.ok());
  EXPECT_NEAR(sol.y[0], std::log(2.0), 1e-8);
}

// A condensed subproblem at fixed beta and jammer power, compared with a
// zooming dense grid over the two source gammas.
TEST(SolveGp, CondensedInstanceMatchesDenseGrid) {
  const ChannelRealization ch = testing::kBetaChannel;
  const SystemParams sys = testing::system_db(20.0);
  const double beta = 0.55, pj = 10.0;
  const double gj = pj * ch.gJ / sys.N0;
  const PosyRatio ratio = build_case_ratio(CaseId::I, ch, sys);
  auto fix = [&](const FactoredPosynomial& p) {
    return p.substitute(kBeta, beta).substitute(kBetaTilde, 1.0 - beta).substitute(kGammaJ, gj);
  };
  const FactoredPosynomial f = fix(ratio.f);
  const FactoredPosynomial g = fix(ratio.g);

  const std::vector<double> x0{1.0, 1.0, 40.0 * ch.g1, 40.0 * ch.g2, 1.0};
  const MonomialApprox gh = condense(g, x0);
  std::vector<double> inv(gh.exponents.size());
  for (std::size_t i = 0; i < inv.size(); ++i) inv[i] = -gh.exponents[i];
  FactoredPosynomial obj = f;
  obj.times(Posynomial::monomial(kNumVars, 1.0 / gh.coeff, inv));

  GpProblem p = unbounded(obj);
  const double room = 1.0 - pj / sys.P;
  p.constraints.push_back(Posynomial::variable(kNumVars, kGamma1, sys.N0 / (ch.g1 * sys.P * room)) +
                          Posynomial::variable(kNumVars, kGamma2, sys.N0 / (ch.g2 * sys.P * room)));
  const double mu = std::log(3.16);
  for (std::size_t i = 0; i < kNumVars; ++i) {
    const auto j = static_cast<Eigen::Index>(i);
    p.lower[j] = std::log(x0[i]) - (i == kGamma1 || i == kGamma2 ? mu : 1.0);
    p.upper[j] = std::log(x0[i]) + (i == kGamma1 || i == kGamma2 ? mu : 1.0);
  }
  Eigen::VectorXd y0(kNumVars);
  for (std::size_t i = 0; i < kNumVars; ++i) y0[static_cast<Eigen::Index>(i)] = std::log(x0[i]);
  y0[kGamma1] -= 0.01;
  y0[kGamma2] -= 0.01;
  const GpSolution sol = solve_gp(p, y0);
  ASSERT_TRUE(sol.ok()) << sol.message;

  auto value = [&](double y1, double y2) {
    std::vector<double> y(y0.data(), y0.data() + kNumVars);
    y[kGamma1] = y1;
    y[kGamma2] = y2;
    if (!(p.constraints[0].log_value(y) <= 0.0)) return kInf;
    return obj.log_value(y);
  };
  double lo1 = p.lower[kGamma1], hi1 = p.upper[kGamma1], lo2 = p.lower[kGamma2], hi2 = p.upper[kGamma2];
  double best = kInf, b1 = 0.0, b2 = 0.0;
  const int n = 200;
  for (int level = 0; level < 10; ++level) {
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        const double y1 = lo1 + (hi1 - lo1) * i / (n - 1);
        const double y2 = lo2 + (hi2 - lo2) * k / (n - 1);
        const double v = value(y1, y2);
        if (v < best) {
          best = v;
          b1 = y1;
          b2 = y2;
        }
      }
    }
    const double w1 = (hi1 - lo1) / 8.0, w2 = (hi2 - lo2) / 8.0;
    lo1 = std::max(p.lower[kGamma1], b1 - w1);
    hi1 = std::min(p.upper[kGamma1], b1 + w1);
    lo2 = std::max(p.lower[kGamma2], b2 - w2);
    hi2 = std::min(p.upper[kGamma2], b2 + w2);
  }
  EXPECT_LE(sol.log_objective, best + 1e-9);
  EXPECT_NEAR(sol.log_objective, best, 1e-6);
}

}  // namespace
}  // namespace ehrelay
