#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "metamarket/coupled.hpp"
#include "metamarket/market.hpp"

namespace metamarket {

/// Subset of the joint state space, evaluated on (eta_plus, x).
using StatePredicate = std::function<bool(int eta_plus, int x)>;

namespace subsets {
StatePredicate everything();
StatePredicate nothing();
StatePredicate wells(const MarketParams& params);  // E_N = E^-1 u E^+1
StatePredicate well(const MarketParams& params, WellLabel label);
StatePredicate delta(const MarketParams& params);
StatePredicate joint_well(const MarketParams& params, WellLabel label, int x);  // E^s x {x}
}  // namespace subsets

/// Calls fn(t0, t1, eta_plus, x) for each constant piece of the path on [0, t_end).
void for_each_segment(const Trajectory& traj, double t_end,
                      const std::function<void(double, double, int, int)>& fn);

/// Lebesgue time spent in `subset` during [0, t]. Throws std::out_of_range
/// for t outside [0, horizon].
double occupation_time(const Trajectory& traj, const StatePredicate& subset, double t);

/// Trace of the path on `subset`: time outside is cut out and the remaining
/// pieces are concatenated. Throws EmptyTraceError when the path spends no
/// time in the subset.
Trajectory trace(const Trajectory& traj, const StatePredicate& subset);

struct OrderSegment {
  double t_start = 0.0;
  int label = 0;  // -1 or +1
  friend bool operator==(const OrderSegment&, const OrderSegment&) = default;
};

/// Well-label process of the trace on E_N, in the trace clock.
struct OrderPath {
  std::vector<OrderSegment> segments;
  double total_time = 0.0;
  double discarded_pre_entry = 0.0;  // time spent in Delta before first entering a well
  bool started_in_delta = false;

  double segment_end(std::size_t i) const {
    return i + 1 < segments.size() ? segments[i + 1].t_start : total_time;
  }
};

OrderPath order_path(const Trajectory& traj, const MarketParams& params);

void write_order_csv(std::ostream& os, const OrderPath& order);

struct OccupationReport {
  double time_in_well_minus = 0.0;
  double time_in_well_plus = 0.0;
  double time_in_delta = 0.0;
  double horizon = 0.0;

  double delta_fraction() const { return horizon > 0.0 ? time_in_delta / horizon : 0.0; }
};

OccupationReport occupation_report(const Trajectory& traj, const MarketParams& params);

/// Wall-clock well-label pieces [t_start, t_end), equal labels merged.
struct LabelSpan {
  double t_start = 0.0;
  double t_end = 0.0;
  WellLabel label = WellLabel::Delta;
};
std::vector<LabelSpan> label_spans(const Trajectory& traj, const MarketParams& params);

}  // namespace metamarket
