#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "metamarket/coupled.hpp"
#include "metamarket/market.hpp"
#include "metamarket/resolvent.hpp"
#include "metamarket/trajectory.hpp"

namespace metamarket {

/// Completed sojourn lengths in one well.
struct SojournSample {
  int well = 0;  // -1 or +1
  std::vector<double> durations;
};

struct SojournSamples {
  SojournSample minus{-1, {}};
  SojournSample plus{1, {}};

  const SojournSample& of(int well) const { return well < 0 ? minus : plus; }
};

/// The final segment is always censored; the first one too when the path
/// started in Delta.
SojournSamples sojourns(const OrderPath& order);

/// Wall-clock variant: lengths between well changes of the untraced path,
/// Delta time included in the sojourn it interrupts.
SojournSamples wall_clock_sojourns(const Trajectory& traj, const MarketParams& params);

struct Thresholds {
  double cv_min = 0.8;
  double cv_max = 1.2;
  double ks_max = 0.15;
  std::size_t min_sojourns = 30;
  double delta_fraction_max = 0.05;
  double rate_standard_errors = 3.0;
};

enum class Verdict { Pass, Fail, Insufficient };
const char* to_string(Verdict v) noexcept;

struct ExponentialityResult {
  std::size_t count = 0;
  double mean = 0.0;
  double cv = 0.0;
  double ks = 0.0;
  Verdict verdict = Verdict::Insufficient;
};

/// Kolmogorov-Smirnov distance between the empirical law of `sample` and the
/// exponential law with the same mean.
double ks_distance_exponential(std::vector<double> sample, double mean);

/// Throws std::invalid_argument on an empty sample.
ExponentialityResult exponentiality(const SojournSample& sample, const Thresholds& thresholds = {});

/// Two-state rates estimated as (completed sojourns leaving s) / (their total length).
struct RateEstimate {
  double rate = 0.0;  // NaN when no completed sojourn
  double standard_error = 0.0;
  std::size_t count = 0;
  double exposure = 0.0;
};

struct EmpiricalRates {
  RateEstimate minus_to_plus;
  RateEstimate plus_to_minus;
};

EmpiricalRates empirical_rates(const OrderPath& order);
EmpiricalRates empirical_rates(const SojournSamples& samples);

/// Passages through Delta that end in the opposite well; durations in wall clock.
struct CrossingStats {
  std::size_t crossings = 0;
  double mean_crossing_time = 0.0;
  std::size_t excursions = 0;  // Delta visits returning to the well they left
};

CrossingStats crossing_stats(const Trajectory& traj, const MarketParams& params);

/// Mean price increment per observable ring, conditioned on the well in force.
struct ConditionalDrift {
  std::size_t rings_minus = 0;
  std::size_t rings_plus = 0;
  std::size_t rings_delta = 0;
  double mean_minus = 0.0;
  double mean_plus = 0.0;
};

ConditionalDrift conditional_drift(const Trajectory& traj, const MarketParams& params);

struct MetastabilityReport {
  ExponentialityResult minus;
  ExponentialityResult plus;
  EmpiricalRates rates;
  OccupationReport occupation;
  double delta_fraction = 0.0;
  ReducedChain theoretical;
  std::optional<ReducedChain> finite_n;  // exact trace rates, when requested
  CrossingStats crossings;
  ConditionalDrift drift;
  bool rates_within_band = false;
  Verdict delta_verdict = Verdict::Insufficient;
  Verdict metastable_verdict = Verdict::Insufficient;
};

/// Assembles the checks above. An empty trajectory or one that never
/// enters a well yields insufficient verdicts for the sojourn part.
MetastabilityReport metastability_report(const Trajectory& traj, const MarketParams& params,
                                         const Thresholds& thresholds = {}, bool with_finite_n = false);

/// Same, from sojourns and occupation pooled across runs.
MetastabilityReport pooled_report(const SojournSamples& pooled, const OccupationReport& occupation,
                                  const MarketParams& params, const Thresholds& thresholds = {});

void append(SojournSamples& into, const SojournSamples& from);

}  // namespace metamarket
