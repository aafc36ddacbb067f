#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <utility>
#include <vector>

#include "metamarket/market.hpp"

namespace metamarket {

enum class CouplingVariant : std::int8_t {
  Indicator,  // P_N vanishes off the wells
  Logistic,   // P_N is the bare logistic everywhere
};

/// Observable clock rate and logistic coefficients of the price process.
struct CouplingParams {
  double delta = 0.0;  // >= 0
  double a = 0.0;      // <= 0
  double b = 0.0;      // >= 0
  CouplingVariant variant = CouplingVariant::Logistic;

  /// Throws std::invalid_argument.
  static CouplingParams make(double delta, double a, double b, CouplingVariant variant);
  friend bool operator==(const CouplingParams&, const CouplingParams&) = default;
};

/// sigma(u) = e^u / (1 + e^u), evaluated without overflow.
double logistic(double u) noexcept;

/// Probability that an observable ring lands on +1.
double logistic_p(MarketState state, const MarketParams& params, const CouplingParams& coupling);

struct ObservableRates {
  double to_minus = 0.0;  // delta * (1 - P_N)
  double to_plus = 0.0;   // delta * P_N
};

/// Indicator variant: both rates vanish on Delta.
ObservableRates observable_rates(MarketState state, const MarketParams& params, const CouplingParams& coupling);

/// Limit rates (gamma(s,-1), gamma(s,+1)) for well s = -1 or +1, with
/// P(+1) = sigma(a + b) and P(-1) = sigma(a).
ObservableRates limit_rates(int well, const CouplingParams& coupling);

enum class EventKind : std::int8_t { MarketJump, ObservableRing };

struct Event {
  double t = 0.0;
  std::int32_t eta_plus_after = 0;
  EventKind kind = EventKind::MarketJump;
  std::int8_t x_after = 1;

  friend bool operator==(const Event&, const Event&) = default;
};

enum class SimulationStatus : std::int8_t {
  ReachedHorizon,
  ReachedMaxEvents,
  Absorbed,  // zero total exit rate; the state is held until the horizon
};

/// eta_plus sampled at t = k * dt, k = 0, 1, ..., (right-continuous).
struct GridSamples {
  double dt = 0.0;
  std::vector<std::int32_t> eta_plus;
};

/// Right-continuous piecewise-constant path of the joint process.
///
/// When `compacted` is set, market jumps that leave the well label
/// unchanged have been dropped; every observable ring is kept. Functions of
/// (well label, x) are then still exact, functions of eta_plus are not.
struct Trajectory {
  MarketParams market;
  CouplingParams coupling;
  std::uint64_t seed = 0;
  std::uint64_t run_index = 0;
  MarketState initial_state;
  int initial_x = 1;
  std::vector<Event> events;
  double horizon = 0.0;
  bool compacted = false;
  SimulationStatus status = SimulationStatus::ReachedHorizon;
  std::uint64_t market_jumps = 0;      // total simulated, retained or not
  std::uint64_t observable_rings = 0;  // total simulated
  GridSamples grid;

  /// State in force at time t (last event with time <= t).
  std::pair<MarketState, int> state_at(double t) const;
};

using EventSink = std::function<void(const Event&)>;

struct SimulationOptions {
  double horizon = std::numeric_limits<double>::infinity();
  std::uint64_t max_events = 0;  // 0 = no limit
  std::uint64_t seed = 0;
  std::uint64_t run_index = 0;
  std::size_t event_cap = 100'000'000;  // full event list up to this many events
  double grid_dt = 0.01;                // <= 0 disables grid sampling
  EventSink sink;                       // receives every simulated event
};

/// Exact event-driven simulation of the joint (market, observable) chain.
/// Two uniforms per event: holding time, then event selection. Holding
/// times are accumulated with compensated summation.
Trajectory simulate(const MarketParams& params, const CouplingParams& coupling, MarketState initial, int initial_x,
                    const SimulationOptions& options);

struct PricePath {
  long long s0 = 0;
  std::vector<std::pair<double, int>> steps;  // (t_n, increment)

  /// S(t) = S_0 + sum of increments with t_n <= t.
  long long value_at(double t) const;
};

PricePath price_path(const Trajectory& traj, long long s0);

/// Streamed event format: `t,kind,eta_plus,x`, kind in {M,O}, 12 significant digits.
void write_event_csv_header(std::ostream& os);
void write_event_csv_row(std::ostream& os, const Event& e);

}  // namespace metamarket
