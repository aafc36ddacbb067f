#include "metamarket/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "metamarket/errors.hpp"

namespace metamarket {

SojournSamples sojourns(const OrderPath& order) {
  SojournSamples out;
  const std::size_t first = order.started_in_delta ? 1 : 0;
  for (std::size_t i = first; i + 1 < order.segments.size(); ++i) {
    const double d = order.segment_end(i) - order.segments[i].t_start;
    if (d > 0.0) (order.segments[i].label < 0 ? out.minus : out.plus).durations.push_back(d);
  }
  return out;
}

SojournSamples wall_clock_sojourns(const Trajectory& traj, const MarketParams& params) {
  SojournSamples out;
  const auto spans = label_spans(traj, params);
  int regime = 0;
  double since = 0.0;
  bool drop = false;  // first regime of a path that started in Delta
  for (const auto& s : spans) {
    const int w = well_sign(s.label);
    if (w == 0 || w == regime) continue;
    if (regime != 0 && !drop) (regime < 0 ? out.minus : out.plus).durations.push_back(s.t_start - since);
    drop = regime == 0 && s.t_start > 0.0;
    regime = w;
    since = s.t_start;
  }
  return out;
}

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::Insufficient:
      break;
  }
  return "insufficient";
}

double ks_distance_exponential(std::vector<double> sample, double mean) {
  if (sample.empty()) throw std::invalid_argument("ks_distance_exponential: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double cdf = mean > 0.0 ? -std::expm1(-sample[i] / mean) : 1.0;
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  return d;
}

ExponentialityResult exponentiality(const SojournSample& sample, const Thresholds& thresholds) {
  if (sample.durations.empty()) throw std::invalid_argument("exponentiality: empty sample");
  ExponentialityResult r;
  const auto& d = sample.durations;
  r.count = d.size();
  double sum = 0.0;
  for (double v : d) sum += v;
  r.mean = sum / static_cast<double>(d.size());
  double ss = 0.0;
  for (double v : d) ss += (v - r.mean) * (v - r.mean);
  const double sd = d.size() > 1 ? std::sqrt(ss / static_cast<double>(d.size() - 1)) : 0.0;
  r.cv = r.mean > 0.0 ? sd / r.mean : 0.0;
  r.ks = ks_distance_exponential(d, r.mean);
  if (r.count < thresholds.min_sojourns) {
    r.verdict = Verdict::Insufficient;
  } else {
    const bool ok = r.cv >= thresholds.cv_min && r.cv <= thresholds.cv_max && r.ks < thresholds.ks_max;
    r.verdict = ok ? Verdict::Pass : Verdict::Fail;
  }
  return r;
}

namespace {

RateEstimate estimate(const SojournSample& s) {
  RateEstimate e;
  e.count = s.durations.size();
  for (double d : s.durations) e.exposure += d;
  if (e.count == 0 || !(e.exposure > 0.0)) {
    e.rate = std::numeric_limits<double>::quiet_NaN();
    e.standard_error = std::numeric_limits<double>::quiet_NaN();
    return e;
  }
  e.rate = static_cast<double>(e.count) / e.exposure;
  e.standard_error = e.rate / std::sqrt(static_cast<double>(e.count));
  return e;
}

ExponentialityResult exponentiality_or_empty(const SojournSample& s, const Thresholds& th) {
  if (s.durations.empty()) return {};
  return exponentiality(s, th);
}

}  // namespace

EmpiricalRates empirical_rates(const SojournSamples& samples) {
  return {estimate(samples.minus), estimate(samples.plus)};
}

EmpiricalRates empirical_rates(const OrderPath& order) { return empirical_rates(sojourns(order)); }

CrossingStats crossing_stats(const Trajectory& traj, const MarketParams& params) {
  CrossingStats out;
  const auto spans = label_spans(traj, params);
  double total = 0.0;
  for (std::size_t i = 1; i + 1 < spans.size(); ++i) {
    if (spans[i].label != WellLabel::Delta) continue;
    if (spans[i - 1].label != spans[i + 1].label) {
      ++out.crossings;
      total += spans[i].t_end - spans[i].t_start;
    } else {
      ++out.excursions;
    }
  }
  out.mean_crossing_time = out.crossings > 0 ? total / static_cast<double>(out.crossings) : 0.0;
  return out;
}

ConditionalDrift conditional_drift(const Trajectory& traj, const MarketParams& params) {
  ConditionalDrift out;
  long long sum_minus = 0, sum_plus = 0;
  for (const Event& e : traj.events) {
    if (e.kind != EventKind::ObservableRing) continue;
    switch (classify(e.eta_plus_after, params)) {
      case WellLabel::WellMinus:
        ++out.rings_minus;
        sum_minus += e.x_after;
        break;
      case WellLabel::WellPlus:
        ++out.rings_plus;
        sum_plus += e.x_after;
        break;
      case WellLabel::Delta:
        ++out.rings_delta;
        break;
    }
  }
  if (out.rings_minus > 0) out.mean_minus = static_cast<double>(sum_minus) / static_cast<double>(out.rings_minus);
  if (out.rings_plus > 0) out.mean_plus = static_cast<double>(sum_plus) / static_cast<double>(out.rings_plus);
  return out;
}

void append(SojournSamples& into, const SojournSamples& from) {
  into.minus.durations.insert(into.minus.durations.end(), from.minus.durations.begin(), from.minus.durations.end());
  into.plus.durations.insert(into.plus.durations.end(), from.plus.durations.begin(), from.plus.durations.end());
}

MetastabilityReport pooled_report(const SojournSamples& pooled, const OccupationReport& occupation,
                                  const MarketParams& params, const Thresholds& thresholds) {
  MetastabilityReport r;
  r.minus = exponentiality_or_empty(pooled.minus, thresholds);
  r.plus = exponentiality_or_empty(pooled.plus, thresholds);
  r.rates = empirical_rates(pooled);
  r.occupation = occupation;
  r.delta_fraction = occupation.delta_fraction();
  r.theoretical = reduced_chain(params.alpha, params.r_minus_plus, params.r_plus_minus);

  auto within = [&](const RateEstimate& e, double target) {
    return e.count > 0 && std::abs(e.rate - target) <= thresholds.rate_standard_errors * e.standard_error;
  };
  r.rates_within_band = within(r.rates.minus_to_plus, r.theoretical.rate_minus_to_plus) &&
                        within(r.rates.plus_to_minus, r.theoretical.rate_plus_to_minus);

  if (occupation.horizon > 0.0) {
    r.delta_verdict = r.delta_fraction < thresholds.delta_fraction_max ? Verdict::Pass : Verdict::Fail;
  }
  if (r.minus.verdict == Verdict::Insufficient || r.plus.verdict == Verdict::Insufficient) {
    r.metastable_verdict = Verdict::Insufficient;
  } else {
    const bool ok = r.minus.verdict == Verdict::Pass && r.plus.verdict == Verdict::Pass && r.rates_within_band;
    r.metastable_verdict = ok ? Verdict::Pass : Verdict::Fail;
  }
  return r;
}

MetastabilityReport metastability_report(const Trajectory& traj, const MarketParams& params,
                                         const Thresholds& thresholds, bool with_finite_n) {
  SojournSamples samples;
  try {
    samples = sojourns(order_path(traj, params));
  } catch (const EmptyTraceError&) {
    // never in a well: no sojourns
  }
  MetastabilityReport r = pooled_report(samples, occupation_report(traj, params), params, thresholds);
  r.crossings = crossing_stats(traj, params);
  r.drift = conditional_drift(traj, params);
  if (with_finite_n) r.finite_n = well_transition_rates(params);
  return r;
}

}  // namespace metamarket
