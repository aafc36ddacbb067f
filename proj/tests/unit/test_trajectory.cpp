#include <gtest/gtest.h>

#include <sstream>

#include "metamarket/errors.hpp"
#include "metamarket/trajectory.hpp"

using namespace metamarket;

namespace {

// N = 10, ell = 2: WellMinus {0,1,2}, Delta {3..7}, WellPlus {8,9,10}.
const MarketParams& ten() {
  static const auto p = MarketParams::make(10, 2.0, 0.1, 0.1, 2);
  return p;
}

Trajectory path(int initial, std::vector<std::pair<double, int>> jumps, double horizon) {
  Trajectory t;
  t.market = ten();
  t.initial_state = MarketState{initial};
  t.initial_x = 1;
  for (auto [time, eta] : jumps) t.events.push_back({time, eta, EventKind::MarketJump, 1});
  t.horizon = horizon;
  return t;
}

Trajectory random_path(std::uint64_t seed) {
  const auto c = CouplingParams::make(3.0, -0.1, 0.2, CouplingVariant::Logistic);
  SimulationOptions o;
  o.horizon = 50.0;
  o.seed = seed;
  return simulate(MarketParams::make(12, 1.2, 0.1, 0.1, 3), c, MarketState{0}, 1, o);
}

}  // namespace

TEST(Occupation, Examples) {
  const auto t = path(9, {{1.0, 5}}, 3.0);
  EXPECT_DOUBLE_EQ(occupation_time(t, subsets::everything(), 2.5), 2.5);
  EXPECT_EQ(occupation_time(t, subsets::nothing(), 3.0), 0.0);
  EXPECT_DOUBLE_EQ(occupation_time(t, subsets::wells(ten()), 3.0), 1.0);
  EXPECT_THROW(occupation_time(t, subsets::everything(), 3.5), std::out_of_range);
  EXPECT_THROW(occupation_time(t, subsets::everything(), -0.1), std::out_of_range);
}

TEST(Occupation, ClockConservationOnEventGrid) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto t = random_path(seed);
    const auto a = subsets::wells(t.market);
    const auto d = subsets::delta(t.market);
    for (std::size_t i = 0; i < t.events.size(); i += 97) {
      const double s = t.events[i].t;
      EXPECT_NEAR(occupation_time(t, a, s) + occupation_time(t, d, s), s, 1e-12 * s);
    }
    const auto r = occupation_report(t, t.market);
    EXPECT_NEAR(r.time_in_well_minus + r.time_in_well_plus + r.time_in_delta, r.horizon, 1e-9 * r.horizon);
  }
}

TEST(Occupation, Report) {
  const auto inside = path(9, {{1.0, 10}, {2.0, 8}}, 4.0);
  const auto r = occupation_report(inside, ten());
  EXPECT_EQ(r.time_in_well_minus, 0.0);
  EXPECT_EQ(r.time_in_well_plus, 4.0);
  EXPECT_EQ(r.time_in_delta, 0.0);
  const auto half = occupation_report(path(9, {{1.0, 5}, {1.5, 9}}, 3.0), ten());
  EXPECT_DOUBLE_EQ(half.time_in_delta, 0.5);
  EXPECT_DOUBLE_EQ(half.delta_fraction(), 0.5 / 3.0);
}

TEST(Trace, IdentityForEverything) {
  const auto t = random_path(3);
  const auto s = trace(t, subsets::everything());
  EXPECT_EQ(s.events, t.events);
  EXPECT_EQ(s.horizon, t.horizon);
}

TEST(Trace, ClockSurgery) {
  // In the wells on [0,1) and [2,3), in Delta on [1,2).
  const auto t = path(9, {{1.0, 5}, {2.0, 9}}, 3.0);
  const auto s = trace(t, subsets::wells(ten()));
  EXPECT_DOUBLE_EQ(s.horizon, 2.0);
  ASSERT_EQ(s.events.size(), 1u);
  EXPECT_DOUBLE_EQ(s.events[0].t, 1.0);
  EXPECT_EQ(s.events[0].eta_plus_after, 9);
}

TEST(Trace, EmptyTraceThrows) {
  const auto t = path(5, {{1.0, 6}}, 3.0);
  EXPECT_THROW(trace(t, subsets::wells(ten())), EmptyTraceError);
  EXPECT_THROW(order_path(t, ten()), EmptyTraceError);
}

TEST(Trace, DurationPlusComplementIsHorizon) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto t = random_path(seed);
    const auto s = trace(t, subsets::wells(t.market));
    EXPECT_NEAR(s.horizon + occupation_time(t, subsets::delta(t.market), t.horizon), t.horizon, 1e-12 * t.horizon);
  }
}

TEST(Trace, Idempotent) {
  const auto t = random_path(4);
  const auto a = subsets::wells(t.market);
  const auto once = trace(t, a);
  const auto twice = trace(once, a);
  EXPECT_EQ(once.events, twice.events);
  EXPECT_EQ(once.horizon, twice.horizon);
  EXPECT_EQ(once.initial_state, twice.initial_state);
}

TEST(Trace, JointWellsSeeObservable) {
  auto t = path(9, {}, 4.0);
  t.events = {{1.0, 9, EventKind::ObservableRing, -1}, {3.0, 9, EventKind::ObservableRing, 1}};
  const auto s = trace(t, subsets::joint_well(ten(), WellLabel::WellPlus, -1));
  EXPECT_DOUBLE_EQ(s.horizon, 2.0);
}

TEST(OrderPath, SingleWell) {
  const auto o = order_path(path(9, {{1.0, 10}}, 3.0), ten());
  ASSERT_EQ(o.segments.size(), 1u);
  EXPECT_EQ(o.segments[0].label, 1);
  EXPECT_EQ(o.total_time, 3.0);
}

TEST(OrderPath, ExcursionMerges) {
  const auto o = order_path(path(9, {{1.0, 5}, {1.2, 9}}, 3.0), ten());
  ASSERT_EQ(o.segments.size(), 1u);
  EXPECT_EQ(o.segments[0].label, 1);
  EXPECT_DOUBLE_EQ(o.total_time, 2.8);
}

TEST(OrderPath, Transitions) {
  const auto o = order_path(path(9, {{1.0, 5}, {1.5, 1}, {4.0, 5}, {4.5, 9}}, 6.0), ten());
  ASSERT_EQ(o.segments.size(), 3u);
  EXPECT_EQ(o.segments[0].label, 1);
  EXPECT_EQ(o.segments[1].label, -1);
  EXPECT_DOUBLE_EQ(o.segments[1].t_start, 1.0);
  EXPECT_DOUBLE_EQ(o.segments[2].t_start, 3.5);
  EXPECT_DOUBLE_EQ(o.total_time, 5.0);
  for (std::size_t i = 1; i < o.segments.size(); ++i) EXPECT_NE(o.segments[i].label, o.segments[i - 1].label);
}

TEST(OrderPath, PreEntryDiscarded) {
  const auto o = order_path(path(5, {{0.7, 2}}, 2.0), ten());
  EXPECT_TRUE(o.started_in_delta);
  EXPECT_DOUBLE_EQ(o.discarded_pre_entry, 0.7);
  EXPECT_DOUBLE_EQ(o.total_time, 1.3);
  ASSERT_EQ(o.segments.size(), 1u);
  EXPECT_EQ(o.segments[0].label, -1);
}

TEST(OrderPath, CommutesWithTrace) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto t = random_path(seed);
    const auto direct = order_path(t, t.market);
    const auto traced = order_path(trace(t, subsets::wells(t.market)), t.market);
    EXPECT_EQ(direct.segments, traced.segments);
    EXPECT_EQ(direct.total_time, traced.total_time);
  }
}

TEST(OrderPath, CsvExport) {
  const auto o = order_path(path(9, {{1.0, 5}, {1.5, 1}}, 3.0), ten());
  std::ostringstream os;
  write_order_csv(os, o);
  EXPECT_EQ(os.str(), "t_start,label\n0,1\n1,-1\n");
}

TEST(LabelSpans, WallClock) {
  const auto spans = label_spans(path(9, {{1.0, 5}, {1.5, 1}, {2.0, 0}}, 3.0), ten());
  ASSERT_EQ(spans.size(), 3u);
  EXPECT_EQ(spans[1].label, WellLabel::Delta);
  EXPECT_DOUBLE_EQ(spans[1].t_start, 1.0);
  EXPECT_DOUBLE_EQ(spans[1].t_end, 1.5);
  EXPECT_DOUBLE_EQ(spans[2].t_end, 3.0);
}
