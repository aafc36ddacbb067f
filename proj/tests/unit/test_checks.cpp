#include <gtest/gtest.h>

#include <cmath>

#include "metamarket/checks.hpp"
#include "metamarket/random.hpp"

using namespace metamarket;

namespace {

OrderPath segments(std::vector<std::pair<double, int>> durations, bool started_in_delta = false) {
  OrderPath o;
  double t = 0.0;
  for (auto [d, label] : durations) {
    o.segments.push_back({t, label});
    t += d;
  }
  o.total_time = t;
  o.started_in_delta = started_in_delta;
  return o;
}

// Order path of the two-state chain itself, run for `horizon`.
OrderPath two_state_path(double up, double down, double horizon, std::uint64_t seed) {
  Rng rng(seed);
  OrderPath o;
  double t = 0.0;
  int label = -1;
  while (t < horizon) {
    o.segments.push_back({t, label});
    t += rng.exponential(label < 0 ? up : down);
    label = -label;
  }
  o.total_time = horizon;
  return o;
}

SojournSample exponential_sample(std::size_t n, double mean, std::uint64_t seed) {
  Rng rng(seed);
  SojournSample s{1, {}};
  for (std::size_t i = 0; i < n; ++i) s.durations.push_back(rng.exponential(1.0 / mean));
  return s;
}

}  // namespace

TEST(Sojourns, Censoring) {
  const auto one = sojourns(segments({{5.0, 1}}));
  EXPECT_TRUE(one.minus.durations.empty());
  EXPECT_TRUE(one.plus.durations.empty());
  const auto three = sojourns(segments({{2.0, 1}, {3.0, -1}, {4.0, 1}}));
  EXPECT_EQ(three.plus.durations, std::vector<double>{2.0});
  EXPECT_EQ(three.minus.durations, std::vector<double>{3.0});
  const auto late = sojourns(segments({{2.0, 1}, {3.0, -1}, {4.0, 1}}, true));
  EXPECT_TRUE(late.plus.durations.empty());
  EXPECT_EQ(late.minus.durations, std::vector<double>{3.0});
}

TEST(Exponentiality, ExponentialSamplePasses) {
  int passes = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto r = exponentiality(exponential_sample(500, 2.5, seed));
    passes += r.verdict == Verdict::Pass;
  }
  EXPECT_EQ(passes, 20);
}

TEST(Exponentiality, DegenerateAndUniform) {
  SojournSample constant{1, std::vector<double>(100, 1.0)};
  const auto c = exponentiality(constant);
  EXPECT_EQ(c.cv, 0.0);
  EXPECT_EQ(c.verdict, Verdict::Fail);

  Rng rng(5);
  SojournSample uniform{-1, {}};
  for (int i = 0; i < 500; ++i) uniform.durations.push_back(rng.uniform());
  const auto u = exponentiality(uniform);
  EXPECT_NEAR(u.cv, 1.0 / std::sqrt(3.0), 0.05);
  EXPECT_EQ(u.verdict, Verdict::Fail);

  EXPECT_EQ(exponentiality(exponential_sample(29, 1.0, 1)).verdict, Verdict::Insufficient);
  EXPECT_THROW(exponentiality(SojournSample{1, {}}), std::invalid_argument);
}

TEST(Exponentiality, KsDistanceByHand) {
  // Single point at the median of Exp(1): F = 1/2, so D = 1/2.
  EXPECT_NEAR(ks_distance_exponential({std::log(2.0)}, 1.0), 0.5, 1e-15);
}

TEST(EmpiricalRates, CountOverTime) {
  const auto r = empirical_rates(segments({{1.0, 1}, {1.0, -1}, {1.0, 1}}));
  EXPECT_DOUBLE_EQ(r.plus_to_minus.rate, 1.0);
  EXPECT_DOUBLE_EQ(r.minus_to_plus.rate, 1.0);
  const auto none = empirical_rates(segments({{1.0, 1}}));
  EXPECT_TRUE(std::isnan(none.plus_to_minus.rate));
}

TEST(EmpiricalRates, SyntheticChainRecovery) {
  const ReducedChain truth{0.31, 0.17};
  int inside = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto r = empirical_rates(two_state_path(truth.rate_minus_to_plus, truth.rate_plus_to_minus, 5000.0, seed));
    inside += std::abs(r.minus_to_plus.rate - truth.rate_minus_to_plus) <= 3 * r.minus_to_plus.standard_error &&
              std::abs(r.plus_to_minus.rate - truth.rate_plus_to_minus) <= 3 * r.plus_to_minus.standard_error;
  }
  EXPECT_GE(inside, 19);
}

TEST(EmpiricalRates, ErrorShrinksWithHorizon) {
  auto rms = [](double horizon) {
    double sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      const auto r = empirical_rates(two_state_path(0.3, 0.3, horizon, seed));
      sum += std::pow(r.minus_to_plus.rate - 0.3, 2);
    }
    return std::sqrt(sum / 40);
  };
  const double short_run = rms(500.0);
  const double long_run = rms(2000.0);
  EXPECT_LT(long_run, short_run);
  EXPECT_NEAR(long_run / short_run, 0.5, 0.2);
}

TEST(Report, ConfinedToOneWell) {
  Trajectory t;
  t.market = MarketParams::make(10, 2.0, 0.1, 0.1, 2);
  t.initial_state = MarketState{10};
  t.horizon = 5.0;
  t.events = {{1.0, 9, EventKind::MarketJump, 1}, {2.0, 10, EventKind::MarketJump, 1}};
  const auto r = metastability_report(t, t.market);
  EXPECT_EQ(r.delta_fraction, 0.0);
  EXPECT_EQ(r.delta_verdict, Verdict::Pass);
  EXPECT_EQ(r.metastable_verdict, Verdict::Insufficient);
}

TEST(Report, EmptyTrajectory) {
  Trajectory t;
  t.market = MarketParams::make(10, 2.0, 0.1, 0.1, 2);
  t.initial_state = MarketState{5};
  t.horizon = 0.0;
  const auto r = metastability_report(t, t.market);
  EXPECT_EQ(r.delta_verdict, Verdict::Insufficient);
  EXPECT_EQ(r.metastable_verdict, Verdict::Insufficient);
}

TEST(Report, ExcursionsDoNotChangeSojourns) {
  Trajectory base;
  base.market = MarketParams::make(10, 2.0, 0.1, 0.1, 2);
  base.initial_state = MarketState{10};
  base.horizon = 10.0;
  base.events = {{3.0, 0, EventKind::MarketJump, 1}, {7.0, 10, EventKind::MarketJump, 1}};
  auto excursion = base;
  // Same path with a Delta excursion inside the first sojourn.
  excursion.events = {{1.0, 5, EventKind::MarketJump, 1},
                      {1.5, 10, EventKind::MarketJump, 1},
                      {3.5, 0, EventKind::MarketJump, 1},
                      {7.5, 10, EventKind::MarketJump, 1}};
  excursion.horizon = 10.5;
  const auto a = sojourns(order_path(base, base.market));
  const auto b = sojourns(order_path(excursion, excursion.market));
  EXPECT_EQ(a.plus.durations, b.plus.durations);
  EXPECT_EQ(a.minus.durations, b.minus.durations);
}

TEST(Crossings, CountsAndDrift) {
  Trajectory t;
  t.market = MarketParams::make(10, 2.0, 0.1, 0.1, 2);
  t.initial_state = MarketState{0};
  t.horizon = 10.0;
  t.events = {{1.0, 5, EventKind::MarketJump, 1},  {1.2, 1, EventKind::MarketJump, 1},  // excursion
              {3.0, 5, EventKind::MarketJump, 1},  {3.5, 9, EventKind::MarketJump, 1},  // crossing of 0.5
              {4.0, 9, EventKind::ObservableRing, 1}, {5.0, 9, EventKind::ObservableRing, -1},
              {6.0, 9, EventKind::ObservableRing, 1}, {7.0, 5, EventKind::MarketJump, 1},
              {7.1, 5, EventKind::ObservableRing, -1}};
  const auto c = crossing_stats(t, t.market);
  EXPECT_EQ(c.crossings, 1u);
  EXPECT_EQ(c.excursions, 1u);
  EXPECT_DOUBLE_EQ(c.mean_crossing_time, 0.5);
  const auto d = conditional_drift(t, t.market);
  EXPECT_EQ(d.rings_plus, 3u);
  EXPECT_EQ(d.rings_delta, 1u);
  EXPECT_NEAR(d.mean_plus, 1.0 / 3.0, 1e-15);
}

TEST(WallClock, SojournsIncludeExcursions) {
  Trajectory t;
  t.market = MarketParams::make(10, 2.0, 0.1, 0.1, 2);
  t.initial_state = MarketState{10};
  t.horizon = 10.0;
  t.events = {{1.0, 5, EventKind::MarketJump, 1}, {1.5, 10, EventKind::MarketJump, 1},
              {3.0, 5, EventKind::MarketJump, 1}, {3.5, 0, EventKind::MarketJump, 1},
              {7.0, 10, EventKind::MarketJump, 1}};
  const auto w = wall_clock_sojourns(t, t.market);
  // WellPlus from 0 to the WellMinus entry at 3.5; WellMinus 3.5 to 7.0.
  EXPECT_EQ(w.plus.durations, std::vector<double>{3.5});
  EXPECT_EQ(w.minus.durations, std::vector<double>{3.5});
}
