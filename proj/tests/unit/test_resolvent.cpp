#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

#include "metamarket/errors.hpp"
#include "metamarket/resolvent.hpp"

using namespace metamarket;

namespace {

MarketParams theory(int n, double alpha = 1.01, double r = 0.1) {
  return MarketParams::make(n, alpha, r, r, well_margin(n, WellPreset::Theory));
}

std::vector<MarketParams> ladder(std::initializer_list<int> ns, WellPreset preset = WellPreset::Theory) {
  std::vector<MarketParams> out;
  for (int n : ns) out.push_back(MarketParams::make(n, 1.01, 0.1, 0.1, well_margin(n, preset)));
  return out;
}

double quadrature_beta(double alpha) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate([alpha](double u) { return std::pow(u, alpha) * std::pow(1.0 - u, alpha); }, 0.0, 1.0);
}

}  // namespace

TEST(Generator, MarketShapes) {
  const auto one = build_market_generator(MarketParams::make(1, 2.0, 0.3, 0.7, 0));
  const auto d = one.dense();
  EXPECT_DOUBLE_EQ(d(0, 1), 0.3);
  EXPECT_DOUBLE_EQ(d(1, 0), 0.7);
  const auto two = build_market_generator(MarketParams::make(2, 2.0, 0.1, 0.1, 0)).dense();
  // theta = 8, g(2) = 4, g(1) = 1
  EXPECT_NEAR(two(0, 1), 3.2, 1e-15);
  EXPECT_NEAR(two(1, 0), 0.8, 1e-15);
  EXPECT_NEAR(two(1, 2), 0.8, 1e-15);
  EXPECT_NEAR(two(2, 1), 3.2, 1e-15);
  EXPECT_EQ(build_market_generator(theory(50)).bandwidth(), 1u);
}

TEST(Generator, RowSumsVanish) {
  for (const auto& gen : {build_market_generator(theory(200)),
                          build_joint_generator(theory(150), CouplingParams::make(5.0, -0.1, 0.2, CouplingVariant::Indicator)),
                          build_joint_generator(theory(40), CouplingParams::make(5.0, -0.1, 0.2, CouplingVariant::Logistic))}) {
    const auto d = gen.dense();
    for (std::size_t i = 0; i < d.size(); ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < d.size(); ++j) {
        sum += d(i, j);
        if (i != j) EXPECT_GE(d(i, j), 0.0);
      }
      EXPECT_LE(std::abs(sum), 1e-12 * gen.exit_rate(i) + 1e-300);
    }
  }
}

TEST(Generator, JointDecouplesWithoutClock) {
  const auto p = theory(20, 1.5);
  const auto market = build_market_generator(p).dense();
  const auto joint = build_joint_generator(p, CouplingParams::make(0.0, -0.1, 0.2, CouplingVariant::Logistic)).dense();
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      for (int x : {-1, 1}) {
        EXPECT_EQ(joint(joint_index(i, x), joint_index(j, x)), market(i, j));
        EXPECT_EQ(joint(joint_index(i, x), joint_index(j, -x)), 0.0);
      }
    }
  }
}

TEST(Generator, JointDegenerateMarket) {
  const auto p = MarketParams::make(0, 2.0, 0.1, 0.1, 0);
  const auto c = CouplingParams::make(2.0, -0.4, 0.3, CouplingVariant::Logistic);
  const auto d = build_joint_generator(p, c).dense();
  ASSERT_EQ(d.size(), 2u);
  const double prob = logistic(-0.4);
  EXPECT_NEAR(d(joint_index(0, 1), joint_index(0, -1)), 2.0 * (1 - prob), 1e-15);
  EXPECT_NEAR(d(joint_index(0, -1), joint_index(0, 1)), 2.0 * prob, 1e-15);
}

TEST(Generator, JointHandAssembly) {
  const auto p = MarketParams::make(2, 2.0, 0.1, 0.1, 0);
  const auto c = CouplingParams::make(3.0, -0.2, 0.5, CouplingVariant::Logistic);
  const auto d = build_joint_generator(p, c).dense();
  for (int eta = 0; eta <= 2; ++eta) {
    const double prob = logistic(-0.2 + 0.5 * eta / 2.0);
    for (int x : {-1, 1}) {
      const auto i = joint_index(eta, x);
      const double flip = x == 1 ? 3.0 * (1 - prob) : 3.0 * prob;
      EXPECT_NEAR(d(i, joint_index(eta, -x)), flip, 1e-14);
      if (eta < 2) EXPECT_NEAR(d(i, joint_index(eta + 1, x)), 0.8 * rate_g(2 - eta, 2.0), 1e-14);
      if (eta > 0) EXPECT_NEAR(d(i, joint_index(eta - 1, x)), 0.8 * rate_g(eta, 2.0), 1e-14);
    }
  }
}

TEST(Resolvent, ConstantRightHandSide) {
  const auto gen = build_market_generator(theory(100));
  const std::vector<double> g(101, 3.0);
  const auto sol = solve_resolvent(gen, 2.0, g);
  for (double v : sol.values) EXPECT_NEAR(v, 1.5, 1e-10);
}

TEST(Resolvent, TwoStateClosedForm) {
  const double rho = 0.37;
  const auto gen = SparseGenerator({{{1, rho}}, {{0, rho}}});
  const std::vector<double> g = {0.0, 1.0};
  const auto sol = solve_resolvent(gen, 1.0, g);
  EXPECT_NEAR(sol.values[0], rho / (1 + 2 * rho), 1e-15);
  EXPECT_NEAR(sol.values[1], (1 + rho) / (1 + 2 * rho), 1e-15);
  const auto f = solve_reduced_resolvent({rho, rho}, 1.0, {0.0, 1.0});
  EXPECT_NEAR(f[0], rho / (1 + 2 * rho), 1e-15);
  EXPECT_NEAR(f[1], (1 + rho) / (1 + 2 * rho), 1e-15);
}

TEST(Resolvent, ThreeStateDenseOracle) {
  const auto p = MarketParams::make(2, 2.0, 0.1, 0.1, 0);
  const auto gen = build_market_generator(p);
  const std::vector<double> g = {-1.0, 0.0, 1.0};
  // By hand: edge rates 3.2 out of the ends, 0.8 out of the middle; (1 - L) F = g.
  linalg::DenseMatrix m(3);
  m(0, 0) = 4.2; m(0, 1) = -3.2;
  m(1, 0) = -0.8; m(1, 1) = 2.6; m(1, 2) = -0.8;
  m(2, 1) = -3.2; m(2, 2) = 4.2;
  const auto expected = m.solve(g);
  const auto sol = solve_resolvent(gen, 1.0, well_indicator_function(MarketParams::make(2, 2.0, 0.1, 0.1, 0), {-1.0, 1.0}));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(sol.values[i], expected[i], 1e-14);
}

TEST(Resolvent, BandedMatchesDense) {
  for (int n : {5, 50, 200}) {
    const auto p = theory(n);
    const auto g = well_indicator_function(p, {0.0, 1.0});
    for (const auto& gen : {build_market_generator(p),
                            build_joint_generator(p, CouplingParams::make(5.0, -0.1, 0.2, CouplingVariant::Indicator))}) {
      std::vector<double> rhs(gen.dimension());
      for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = std::sin(0.37 * i);
      const auto a = solve_resolvent(gen, 0.5, rhs);
      const auto b = solve_resolvent_dense(gen, 0.5, rhs);
      for (std::size_t i = 0; i < rhs.size(); ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-10);
    }
    (void)g;
  }
}

TEST(Resolvent, MaximumPrincipleAndResidual) {
  const auto p = theory(400);
  const auto gen = build_market_generator(p);
  for (double lambda : {0.01, 0.5, 1.0, 2.0, 100.0}) {
    const auto sol = solve_resolvent(gen, lambda, well_indicator_function(p, {-2.0, 1.0}));
    EXPECT_TRUE(sol.max_principle_holds);
    EXPECT_LE(linalg::max_abs(sol.values), 2.0 / lambda * (1 + 1e-12));
    EXPECT_LE(sol.residual, 1e-10 * (lambda + gen.max_exit_rate()) * linalg::max_abs(sol.values));
  }
}

TEST(Resolvent, ResolventIdentity) {
  const auto p = theory(150, 1.5);
  const auto gen = build_market_generator(p);
  const auto g = well_indicator_function(p, {0.3, -1.0});
  const double l1 = 0.7, l2 = 1.9;
  const auto f1 = solve_resolvent(gen, l1, g).values;
  const auto f2 = solve_resolvent(gen, l2, g).values;
  const auto r = solve_resolvent(gen, l1, f2).values;
  for (std::size_t i = 0; i < f1.size(); ++i) EXPECT_NEAR(f1[i] - f2[i], (l2 - l1) * r[i], 1e-9);
}

TEST(Resolvent, RejectsNonPositiveLambda) {
  const auto gen = build_market_generator(theory(10));
  const std::vector<double> g(11, 1.0);
  EXPECT_THROW(solve_resolvent(gen, 0.0, g), std::invalid_argument);
}

TEST(Capacity, ClosedForm) {
  EXPECT_DOUBLE_EQ(capacity(0.1, 0.1), 0.05);
  EXPECT_DOUBLE_EQ(capacity(1.0, 1.0), 0.5);
  EXPECT_NEAR(capacity(0.3, 0.2), capacity(0.2, 0.3), 1e-16);
  EXPECT_NEAR(capacity(3 * 0.4, 3 * 0.1), 3 * capacity(0.4, 0.1), 1e-15);
  EXPECT_THROW(capacity(0.0, 1.0), std::invalid_argument);
}

TEST(Capacity, DirichletTwoState) {
  for (auto [a, b] : {std::pair{0.1, 0.1}, std::pair{1.0, 1.0}, std::pair{0.3, 0.8}}) {
    const auto gen = SparseGenerator({{{1, a}}, {{0, b}}});
    const std::vector<double> mu = {b / (a + b), a / (a + b)};
    const std::size_t A[] = {0}, B[] = {1};
    EXPECT_NEAR(capacity_dirichlet(gen, mu, A, B), capacity(a, b), 1e-12);
    EXPECT_NEAR(capacity_dirichlet(gen, mu, B, A), capacity(a, b), 1e-12);
  }
}

// Birth-death chain: capacity is the inverse of the series resistance.
TEST(Capacity, DirichletMatchesSeriesResistance) {
  for (int n : {20, 100, 500}) {
    const auto p = theory(n, 1.3);
    const auto gen = build_market_generator(p);
    const auto pi = stationary_weights(p);
    std::vector<std::size_t> a, b;
    for (int k = 0; k <= p.ell; ++k) a.push_back(k);
    for (int k = n - p.ell; k <= n; ++k) b.push_back(k);
    double resistance = 0.0;
    for (int k = p.ell; k < n - p.ell; ++k) resistance += 1.0 / (pi[k] * market_rate_up(k, p));
    EXPECT_NEAR(capacity_dirichlet(gen, pi, a, b) * resistance, 1.0, 1e-10);
  }
}

TEST(ReducedChain, BetaIntegralAgainstQuadrature) {
  for (double alpha = 1.001; alpha <= 3.0; alpha += 0.1) {
    EXPECT_NEAR(beta_integral(alpha), quadrature_beta(alpha), 1e-10 * beta_integral(alpha)) << alpha;
  }
  EXPECT_NEAR(beta_integral(1.0), 1.0 / 6.0, 1e-15);
}

TEST(ReducedChain, Values) {
  const auto one = reduced_chain(1.0, 1.0, 1.0);
  EXPECT_NEAR(one.rate_minus_to_plus, 3.0, 1e-13);
  // Regression value, computed once from the quadrature oracle.
  const double frozen = 0.306780266900666;
  const auto table = reduced_chain(1.01, 0.1, 0.1);
  EXPECT_NEAR(table.rate_minus_to_plus, frozen, 1e-12);
  EXPECT_EQ(table.rate_minus_to_plus, table.rate_plus_to_minus);
  EXPECT_NEAR(0.05 / (std::tgamma(1.01) * quadrature_beta(1.01)), frozen, 1e-12);
}

TEST(ReducedResolvent, Limits) {
  const ReducedChain c{0.4, 0.9};
  const auto f = solve_reduced_resolvent(c, 2.0, {3.0, 3.0});
  EXPECT_NEAR(f[0], 1.5, 1e-15);
  EXPECT_NEAR(f[1], 1.5, 1e-15);
  const double lambda = 1e6;
  const auto big = solve_reduced_resolvent(c, lambda, {1.0, -2.0});
  EXPECT_NEAR(big[0] * lambda, 1.0, 1e-5);
  EXPECT_NEAR(big[1] * lambda, -2.0, 1e-5);
  // Substitution residual.
  const auto h = solve_reduced_resolvent(c, 0.8, {0.2, 0.7});
  EXPECT_NEAR((0.8 + 0.4) * h[0] - 0.4 * h[1], 0.2, 1e-14);
  EXPECT_NEAR(-0.9 * h[0] + (0.8 + 0.9) * h[1], 0.7, 1e-14);
}

TEST(ConditionR, ZeroFunction) {
  const auto r = verify_condition_R(ladder({100, 200}), 1.0, {0.0, 0.0});
  for (const auto& row : r.rows) EXPECT_EQ(row.deviation, 0.0);
}

TEST(ConditionR, RegressionValues) {
  const auto r = verify_condition_R(ladder({100, 200, 400, 800}), 1.0, {0.0, 1.0});
  const double frozen[] = {0.16211222083317733, 0.16167833122520125, 0.17121635240783029, 0.1756083949365076};
  ASSERT_EQ(r.rows.size(), 4u);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(r.rows[i].deviation, frozen[i], 1e-9);
  EXPECT_FALSE(r.pass);
  const auto paper = verify_condition_R(ladder({100, 200, 400, 800}, WellPreset::Paper), 1.0, {0.0, 1.0});
  EXPECT_EQ(paper.rows.size(), 4u);
}

TEST(JointCondition, ConstantFunction) {
  const auto c = CouplingParams::make(5.0, -0.1000835, 0.2001669, CouplingVariant::Indicator);
  const JointFunction g{{{2.0, 2.0}, {2.0, 2.0}}};
  const auto r = verify_joint_condition(ladder({50, 100}), c, 1.0, g);
  for (const auto& row : r.reduced_solution)
    for (double v : row) EXPECT_NEAR(v, 2.0, 1e-14);
  const auto market = verify_condition_R(ladder({50, 100}), 1.0, {2.0, 2.0});
  for (std::size_t i = 0; i < r.rows.size(); ++i) EXPECT_NEAR(r.rows[i].deviation, market.rows[i].deviation, 1e-10);
}

TEST(JointCondition, RegressionAndIdentity) {
  const auto c = CouplingParams::make(5.0, -0.1000835, 0.2001669, CouplingVariant::Indicator);
  const JointFunction g{{{1.0, -1.0}, {-1.0, 1.0}}};
  const auto r = verify_joint_condition(ladder({50, 100, 200}), c, 1.0, g);
  const double frozen[] = {0.02771399130865934, 0.020757070487941953, 0.017730133771683365};
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(r.rows[i].deviation, frozen[i], 1e-9);
  EXPECT_TRUE(r.identity_holds);
  EXPECT_LT(r.identity_error, 1e-12);
  EXPECT_TRUE(r.strictly_decreasing);
}

TEST(JointCondition, DecouplingDuplicatesMarket) {
  const auto c = CouplingParams::make(0.0, -0.1, 0.2, CouplingVariant::Indicator);
  const JointFunction g{{{0.0, 0.0}, {1.0, 1.0}}};
  const auto joint = verify_joint_condition(ladder({50, 100}), c, 1.0, g);
  const auto market = verify_condition_R(ladder({50, 100}), 1.0, {0.0, 1.0});
  for (std::size_t i = 0; i < joint.rows.size(); ++i) {
    for (int x = 0; x < 2; ++x) {
      EXPECT_NEAR(joint.rows[i].sup_deviation[0][x], market.rows[i].sup_deviation[0], 1e-10);
      EXPECT_NEAR(joint.rows[i].sup_deviation[1][x], market.rows[i].sup_deviation[1], 1e-10);
    }
  }
}
