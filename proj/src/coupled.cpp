#include "metamarket/coupled.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "metamarket/random.hpp"

namespace metamarket {

CouplingParams CouplingParams::make(double delta, double a, double b, CouplingVariant variant) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw std::invalid_argument("coupling: delta must be >= 0");
  if (!(a <= 0.0) || !std::isfinite(a)) throw std::invalid_argument("coupling: a must be <= 0");
  if (!(b >= 0.0) || !std::isfinite(b)) throw std::invalid_argument("coupling: b must be >= 0");
  return CouplingParams{delta, a, b, variant};
}

double logistic(double u) noexcept {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

double logistic_p(MarketState state, const MarketParams& params, const CouplingParams& coupling) {
  if (coupling.variant == CouplingVariant::Indicator && classify(state, params) == WellLabel::Delta) return 0.0;
  const double fraction = params.n > 0 ? static_cast<double>(state.eta_plus) / params.n : 0.0;
  return logistic(coupling.a + coupling.b * fraction);
}

ObservableRates observable_rates(MarketState state, const MarketParams& params, const CouplingParams& coupling) {
  if (coupling.variant == CouplingVariant::Indicator && classify(state, params) == WellLabel::Delta) return {};
  const double p = logistic_p(state, params, coupling);
  return {coupling.delta * (1.0 - p), coupling.delta * p};
}

ObservableRates limit_rates(int well, const CouplingParams& coupling) {
  double p = 0.0;
  if (well == 1) {
    p = logistic(coupling.a + coupling.b);
  } else if (well == -1) {
    p = logistic(coupling.a);
  } else {
    throw std::invalid_argument("limit_rates: well must be -1 or +1");
  }
  return {coupling.delta * (1.0 - p), coupling.delta * p};
}

std::pair<MarketState, int> Trajectory::state_at(double t) const {
  auto it = std::upper_bound(events.begin(), events.end(), t, [](double v, const Event& e) { return v < e.t; });
  if (it == events.begin()) return {initial_state, initial_x};
  --it;
  return {MarketState{it->eta_plus_after}, it->x_after};
}

namespace {

struct RateTables {
  std::vector<double> up, down, ring_plus, total;
};

RateTables build_tables(const MarketParams& params, const CouplingParams& coupling) {
  const std::size_t size = static_cast<std::size_t>(params.n) + 1;
  RateTables t{std::vector<double>(size), std::vector<double>(size), std::vector<double>(size),
               std::vector<double>(size)};
  for (int k = 0; k <= params.n; ++k) {
    const auto obs = observable_rates(MarketState{k}, params, coupling);
    t.up[k] = market_rate_up(k, params);
    t.down[k] = market_rate_down(k, params);
    t.ring_plus[k] = obs.to_plus;
    t.total[k] = t.up[k] + t.down[k] + obs.to_minus + obs.to_plus;
  }
  return t;
}

// Keeps rings and label-changing market jumps.
void compact_events(std::vector<Event>& events, WellLabel initial_label, const MarketParams& params) {
  WellLabel label = initial_label;
  auto keep = [&](const Event& e) {
    if (e.kind == EventKind::ObservableRing) return true;
    const WellLabel next = classify(e.eta_plus_after, params);
    const bool changed = next != label;
    label = next;
    return changed;
  };
  events.erase(std::remove_if(events.begin(), events.end(), [&](const Event& e) { return !keep(e); }),
               events.end());
}

}  // namespace

Trajectory simulate(const MarketParams& params, const CouplingParams& coupling, MarketState initial, int initial_x,
                    const SimulationOptions& options) {
  if (initial.eta_plus < 0 || initial.eta_plus > params.n) throw std::invalid_argument("simulate: initial state out of range");
  if (initial_x != -1 && initial_x != 1) throw std::invalid_argument("simulate: initial x must be -1 or +1");
  if (!(options.horizon >= 0.0)) throw std::invalid_argument("simulate: horizon must be >= 0");
  if (std::isinf(options.horizon) && options.max_events == 0) {
    throw std::invalid_argument("simulate: need a finite horizon or a positive max_events");
  }

  Trajectory traj;
  traj.market = params;
  traj.coupling = coupling;
  traj.seed = options.seed;
  traj.run_index = options.run_index;
  traj.initial_state = initial;
  traj.initial_x = initial_x;
  traj.grid.dt = options.grid_dt > 0.0 ? options.grid_dt : 0.0;

  const RateTables tables = build_tables(params, coupling);
  Rng rng(options.seed, options.run_index);

  int eta = initial.eta_plus;
  int x = initial_x;
  WellLabel label = classify(eta, params);
  const WellLabel initial_label = label;

  // Kahan-compensated clock.
  double t = 0.0;
  double carry = 0.0;
  double last_stamp = -1.0;

  const bool sampling = traj.grid.dt > 0.0;
  std::uint64_t grid_index = 0;
  auto grid_time = [&](std::uint64_t k) { return static_cast<double>(k) * traj.grid.dt; };

  std::uint64_t count = 0;
  traj.status = SimulationStatus::ReachedHorizon;
  double end_time = options.horizon;

  for (;;) {
    const double total = tables.total[eta];
    if (!(total > 0.0)) {
      traj.status = SimulationStatus::Absorbed;
      if (std::isinf(end_time)) end_time = t;
      break;
    }
    const double tau = rng.exponential(total);
    const double y = tau - carry;
    const double t_new = t + y;
    carry = (t_new - t) - y;
    if (t_new > options.horizon) break;
    t = t_new;

    if (sampling) {
      while (grid_time(grid_index) < t) {
        traj.grid.eta_plus.push_back(eta);
        ++grid_index;
      }
    }

    const double pick = rng.uniform() * total;
    Event e;
    if (pick < tables.up[eta]) {
      ++eta;
      e.kind = EventKind::MarketJump;
      ++traj.market_jumps;
    } else if (pick < tables.up[eta] + tables.down[eta]) {
      --eta;
      e.kind = EventKind::MarketJump;
      ++traj.market_jumps;
    } else {
      x = (pick - tables.up[eta] - tables.down[eta]) < tables.ring_plus[eta] ? 1 : -1;
      e.kind = EventKind::ObservableRing;
      ++traj.observable_rings;
    }
    // Keep stamps strictly increasing at double resolution.
    e.t = t > last_stamp ? t : std::nextafter(last_stamp, std::numeric_limits<double>::infinity());
    last_stamp = e.t;
    e.eta_plus_after = eta;
    e.x_after = static_cast<std::int8_t>(x);

    if (options.sink) options.sink(e);

    if (e.kind == EventKind::ObservableRing) {
      traj.events.push_back(e);
    } else {
      const WellLabel next = classify(eta, params);
      if (!traj.compacted || next != label) traj.events.push_back(e);
      label = next;
    }
    if (!traj.compacted && traj.events.size() >= options.event_cap) {
      compact_events(traj.events, initial_label, params);
      traj.compacted = true;
    }

    ++count;
    if (options.max_events != 0 && count >= options.max_events) {
      traj.status = SimulationStatus::ReachedMaxEvents;
      end_time = std::min(end_time, t);
      break;
    }
  }

  traj.horizon = end_time;
  if (sampling) {
    while (grid_time(grid_index) <= traj.horizon) {
      traj.grid.eta_plus.push_back(eta);
      ++grid_index;
    }
  }
  return traj;
}

long long PricePath::value_at(double t) const {
  auto it = std::upper_bound(steps.begin(), steps.end(), t,
                             [](double v, const std::pair<double, int>& s) { return v < s.first; });
  long long s = s0;
  for (auto p = steps.begin(); p != it; ++p) s += p->second;
  return s;
}

PricePath price_path(const Trajectory& traj, long long s0) {
  PricePath path;
  path.s0 = s0;
  for (const Event& e : traj.events) {
    if (e.kind == EventKind::ObservableRing) path.steps.emplace_back(e.t, e.x_after);
  }
  return path;
}

void write_event_csv_header(std::ostream& os) { os << "t,kind,eta_plus,x\n"; }

void write_event_csv_row(std::ostream& os, const Event& e) {
  char buf[96];
  const int len = std::snprintf(buf, sizeof buf, "%.12g,%c,%d,%d\n", e.t,
                                e.kind == EventKind::MarketJump ? 'M' : 'O', e.eta_plus_after, e.x_after);
  os.write(buf, len);
}

}  // namespace metamarket
