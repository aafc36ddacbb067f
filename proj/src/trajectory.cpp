#include "metamarket/trajectory.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

#include "metamarket/errors.hpp"

namespace metamarket {

namespace {

// Kahan-compensated accumulator.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double v) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

namespace subsets {

StatePredicate everything() {
  return [](int, int) { return true; };
}

StatePredicate nothing() {
  return [](int, int) { return false; };
}

StatePredicate wells(const MarketParams& params) {
  return [params](int eta, int) { return classify(eta, params) != WellLabel::Delta; };
}

StatePredicate well(const MarketParams& params, WellLabel label) {
  return [params, label](int eta, int) { return classify(eta, params) == label; };
}

StatePredicate delta(const MarketParams& params) { return well(params, WellLabel::Delta); }

StatePredicate joint_well(const MarketParams& params, WellLabel label, int x) {
  return [params, label, x](int eta, int y) { return y == x && classify(eta, params) == label; };
}

}  // namespace subsets

void for_each_segment(const Trajectory& traj, double t_end,
                      const std::function<void(double, double, int, int)>& fn) {
  double start = 0.0;
  int eta = traj.initial_state.eta_plus;
  int x = traj.initial_x;
  for (const Event& e : traj.events) {
    if (e.t >= t_end) break;
    if (e.t > start) fn(start, e.t, eta, x);
    start = e.t;
    eta = e.eta_plus_after;
    x = e.x_after;
  }
  if (t_end > start) fn(start, t_end, eta, x);
}

double occupation_time(const Trajectory& traj, const StatePredicate& subset, double t) {
  if (!(t >= 0.0) || t > traj.horizon) {
    throw std::out_of_range("occupation_time: t=" + std::to_string(t) + " outside [0, horizon]");
  }
  CompensatedSum acc;
  for_each_segment(traj, t, [&](double t0, double t1, int eta, int x) {
    if (subset(eta, x)) acc.add(t1 - t0);
  });
  return acc.sum;
}

Trajectory trace(const Trajectory& traj, const StatePredicate& subset) {
  Trajectory out = traj;
  out.events.clear();
  out.grid = {};

  CompensatedSum cut;  // time excised so far
  bool inside = subset(traj.initial_state.eta_plus, traj.initial_x);
  bool seen = inside;
  double left_at = 0.0;  // when the path last left the subset

  for (const Event& e : traj.events) {
    const bool next_inside = subset(e.eta_plus_after, e.x_after);
    if (inside && !next_inside) {
      left_at = e.t;
    } else if (!inside && next_inside) {
      cut.add(e.t - left_at);
    }
    if (next_inside) {
      Event moved = e;
      moved.t = e.t - cut.sum;
      if (!seen) {
        // First entry becomes the initial state of the trace.
        out.initial_state = MarketState{e.eta_plus_after};
        out.initial_x = e.x_after;
        seen = true;
      } else {
        out.events.push_back(moved);
      }
    }
    inside = next_inside;
  }
  if (!inside) cut.add(traj.horizon - left_at);
  out.horizon = traj.horizon - cut.sum;
  if (!seen || !(out.horizon > 0.0)) throw EmptyTraceError("trace: path spends no time in the subset");
  return out;
}

OrderPath order_path(const Trajectory& traj, const MarketParams& params) {
  OrderPath order;
  const StatePredicate in_wells = subsets::wells(params);
  order.started_in_delta = classify(traj.initial_state, params) == WellLabel::Delta;
  if (order.started_in_delta) {
    for (const Event& e : traj.events) {
      if (in_wells(e.eta_plus_after, e.x_after)) {
        order.discarded_pre_entry = e.t;
        break;
      }
    }
  }
  const Trajectory traced = trace(traj, in_wells);
  order.total_time = traced.horizon;
  auto push = [&](double t, int eta) {
    const int label = well_sign(classify(eta, params));
    if (order.segments.empty() || order.segments.back().label != label) order.segments.push_back({t, label});
  };
  push(0.0, traced.initial_state.eta_plus);
  for (const Event& e : traced.events) push(e.t, e.eta_plus_after);
  return order;
}

void write_order_csv(std::ostream& os, const OrderPath& order) {
  os << "t_start,label\n";
  char buf[64];
  for (const auto& s : order.segments) {
    const int len = std::snprintf(buf, sizeof buf, "%.12g,%d\n", s.t_start, s.label);
    os.write(buf, len);
  }
}

OccupationReport occupation_report(const Trajectory& traj, const MarketParams& params) {
  CompensatedSum minus, plus, delta;
  for_each_segment(traj, traj.horizon, [&](double t0, double t1, int eta, int) {
    switch (classify(eta, params)) {
      case WellLabel::WellMinus:
        minus.add(t1 - t0);
        break;
      case WellLabel::WellPlus:
        plus.add(t1 - t0);
        break;
      case WellLabel::Delta:
        delta.add(t1 - t0);
        break;
    }
  });
  return {minus.sum, plus.sum, delta.sum, traj.horizon};
}

std::vector<LabelSpan> label_spans(const Trajectory& traj, const MarketParams& params) {
  std::vector<LabelSpan> spans;
  for_each_segment(traj, traj.horizon, [&](double t0, double t1, int eta, int) {
    const WellLabel label = classify(eta, params);
    if (!spans.empty() && spans.back().label == label) {
      spans.back().t_end = t1;
    } else {
      spans.push_back({t0, t1, label});
    }
  });
  return spans;
}

}  // namespace metamarket
