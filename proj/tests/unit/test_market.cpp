#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "metamarket/market.hpp"
#include "metamarket/resolvent.hpp"

using namespace metamarket;

namespace {

MarketParams symmetric(int n, double alpha, double r, int ell) { return MarketParams::make(n, alpha, r, r, ell); }

// Dense generator assembled straight from market_rates.
std::vector<std::vector<double>> dense_from_rates(const MarketParams& p) {
  std::vector<std::vector<double>> q(p.n + 1, std::vector<double>(p.n + 1, 0.0));
  for (int k = 0; k <= p.n; ++k) {
    for (const auto& tr : market_rates(MarketState{k}, p)) {
      q[k][tr.target.eta_plus] += tr.rate;
      q[k][k] -= tr.rate;
    }
  }
  return q;
}

}  // namespace

TEST(RateG, BoundaryValues) {
  EXPECT_EQ(rate_g(0, 1.01), 0.0);
  EXPECT_EQ(rate_g(1, 1.01), 1.0);
  EXPECT_DOUBLE_EQ(rate_g(2, 2.0), 4.0);
  EXPECT_DOUBLE_EQ(rate_g(3, 2.0), 2.25);
  EXPECT_THROW(rate_g(-1, 2.0), std::domain_error);
}

TEST(RateG, DecreasingTowardOne) {
  for (double alpha : {1.01, 1.5, 3.0}) {
    EXPECT_LT(rate_g(1, alpha), rate_g(2, alpha));
    for (int n = 2; n < 2000; ++n) EXPECT_LT(rate_g(n + 1, alpha), rate_g(n, alpha));
    EXPECT_NEAR(rate_g(1'000'000, alpha), 1.0, 1e-5 * alpha);
  }
}

TEST(Speedup, KnownValues) {
  EXPECT_NEAR(speedup_theta(10000, 1.01), 109647820.0, 1.0);
  EXPECT_DOUBLE_EQ(speedup_theta(2, 2.0), 8.0);
  EXPECT_DOUBLE_EQ(speedup_theta(1, 1.5), 1.0);
  const auto p = symmetric(10000, 1.01, 0.1, 3333);
  EXPECT_EQ(p.theta, speedup_theta(10000, 1.01));
}

TEST(MarketParams, Validation) {
  EXPECT_THROW(MarketParams::make(10, 1.0, 0.1, 0.1, 2), std::invalid_argument);
  EXPECT_THROW(MarketParams::make(10, 2.0, 0.0, 0.0, 2), std::invalid_argument);
  EXPECT_THROW(MarketParams::make(10, 2.0, -0.1, 0.1, 2), std::invalid_argument);
  EXPECT_THROW(MarketParams::make(10, 2.0, 0.1, 0.1, 5), std::invalid_argument);
  EXPECT_NO_THROW(MarketParams::make(10, 2.0, 0.1, 0.0, 4));
}

TEST(WellPresets, Margins) {
  EXPECT_EQ(well_margin(10000, WellPreset::Paper), 3333);
  EXPECT_EQ(well_margin(1000, WellPreset::Theory), 32);
  EXPECT_EQ(well_margin(100, WellPreset::Theory), 10);
  EXPECT_EQ(well_margin(4, WellPreset::Theory), 1);
  EXPECT_EQ(parse_well_preset("theory"), WellPreset::Theory);
  EXPECT_THROW(parse_well_preset("other"), std::invalid_argument);
}

TEST(MarketRates, Boundaries) {
  const auto p = symmetric(50, 1.5, 0.1, 10);
  const auto top = market_rates(MarketState{50}, p);
  ASSERT_EQ(top.size(), 1u);
  EXPECT_EQ(top[0].target.eta_plus, 49);
  EXPECT_DOUBLE_EQ(top[0].rate, p.theta * 0.1 * rate_g(50, 1.5));
  const auto bottom = market_rates(MarketState{0}, p);
  ASSERT_EQ(bottom.size(), 1u);
  EXPECT_EQ(bottom[0].target.eta_plus, 1);
  EXPECT_DOUBLE_EQ(bottom[0].rate, p.theta * 0.1 * rate_g(50, 1.5));
}

TEST(MarketRates, TwoAgents) {
  const auto p = symmetric(2, 2.0, 0.1, 0);
  const auto rates = market_rates(MarketState{1}, p);
  ASSERT_EQ(rates.size(), 2u);
  for (const auto& r : rates) EXPECT_NEAR(r.rate, 0.8, 1e-15);
}

TEST(MarketRates, OneSidedRatesOmitZeroEntries) {
  const auto p = MarketParams::make(10, 2.0, 0.0, 0.3, 2);
  for (int k = 0; k <= 10; ++k) {
    for (const auto& tr : market_rates(MarketState{k}, p)) {
      EXPECT_GT(tr.rate, 0.0);
      EXPECT_EQ(tr.target.eta_plus, k - 1);
    }
  }
}

TEST(Classify, Wells) {
  const auto p = symmetric(10000, 1.01, 0.1, 3333);
  EXPECT_EQ(classify(10000, p), WellLabel::WellPlus);
  EXPECT_EQ(classify(5000, p), WellLabel::Delta);
  EXPECT_EQ(classify(0, p), WellLabel::WellMinus);
  EXPECT_EQ(classify(3333, p), WellLabel::WellMinus);
  EXPECT_EQ(classify(3334, p), WellLabel::Delta);
  EXPECT_EQ(classify(6667, p), WellLabel::WellPlus);
  EXPECT_EQ(classify(0, symmetric(10, 2.0, 0.1, 0)), WellLabel::WellMinus);
}

TEST(Classify, PartitionIsMonotone) {
  for (int n : {3, 10, 101}) {
    for (int ell = 0; 2 * ell < n; ++ell) {
      const auto p = symmetric(n, 2.0, 0.1, ell);
      int previous = -1;
      for (int k = 0; k <= n; ++k) {
        const auto label = classify(k, p);
        const int rank = label == WellLabel::WellMinus ? 0 : label == WellLabel::Delta ? 1 : 2;
        EXPECT_GE(rank, previous);
        previous = rank;
      }
    }
  }
}

TEST(Stationary, SmallCases) {
  const auto w = stationary_weights(symmetric(2, 2.0, 0.1, 0));
  ASSERT_EQ(w.size(), 3u);
  EXPECT_NEAR(w[0], 1.0 / 6, 1e-15);
  EXPECT_NEAR(w[1], 4.0 / 6, 1e-15);
  EXPECT_NEAR(w[2], 1.0 / 6, 1e-15);
  const auto one = stationary_weights(symmetric(1, 2.0, 0.3, 0));
  EXPECT_NEAR(one[0], 0.5, 1e-15);
  EXPECT_NEAR(one[1], 0.5, 1e-15);
}

TEST(Stationary, SymmetricUnderReflection) {
  const auto p = symmetric(77, 1.3, 0.2, 8);
  const auto w = stationary_weights(p);
  for (int k = 0; k <= 77; ++k) EXPECT_NEAR(w[k], w[77 - k], 1e-15);
}

// Property: generator rows sum to zero and w^T L = 0 for N <= 200.
TEST(Stationary, GlobalBalanceAgainstDenseGenerator) {
  for (int n : {1, 2, 5, 50, 137, 200}) {
    for (double alpha : {1.01, 2.0}) {
      const auto p = symmetric(n, alpha, 0.1, n / 3 < (n + 1) / 2 ? n / 3 : 0);
      const auto q = dense_from_rates(p);
      const auto w = stationary_weights(p);
      for (int i = 0; i <= n; ++i) {
        double row = 0.0, scale = 0.0;
        for (int j = 0; j <= n; ++j) {
          row += q[i][j];
          scale += std::abs(q[i][j]);
          if (i != j) EXPECT_GE(q[i][j], 0.0);
        }
        EXPECT_LE(std::abs(row), 1e-12 * scale);
      }
      for (int j = 0; j <= n; ++j) {
        double flux = 0.0;
        for (int i = 0; i <= n; ++i) flux += w[i] * q[i][j];
        EXPECT_LT(std::abs(flux), 1e-9 * p.theta) << "n=" << n << " j=" << j;
      }
    }
  }
}

TEST(Stationary, AsymmetricRatesBalance) {
  const auto p = MarketParams::make(40, 1.7, 0.3, 0.1, 5);
  const auto q = dense_from_rates(p);
  const auto w = stationary_weights(p);
  for (int j = 0; j <= 40; ++j) {
    double flux = 0.0;
    for (int i = 0; i <= 40; ++i) flux += w[i] * q[i][j];
    EXPECT_LT(std::abs(flux), 1e-9 * p.theta);
  }
}

TEST(Generator, AgreesWithMarketRates) {
  const auto p = symmetric(30, 1.2, 0.1, 5);
  const auto gen = build_market_generator(p);
  const auto q = dense_from_rates(p);
  const auto d = gen.dense();
  for (int i = 0; i <= 30; ++i)
    for (int j = 0; j <= 30; ++j) EXPECT_NEAR(d(i, j), q[i][j], 1e-9 * std::abs(q[i][i]));
}
