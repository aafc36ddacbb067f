#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "metamarket/checks.hpp"
#include "metamarket/coupled.hpp"
#include "metamarket/hmm.hpp"
#include "metamarket/market.hpp"

namespace metamarket {

/// Everything a `simulate` run needs. Defaults reproduce the full-scale
/// parameter set (N = 10^4, alpha = 1.01, delta = 5).
///
/// Text format: one `key = value` per line, `#` starts a comment, blank lines
/// are ignored. Keys:
///
///   n, alpha, r_minus_plus, r_plus_minus   market
///   wells = paper | theory                 well margin preset
///   ell                                    explicit margin, overrides the preset
///   delta, a, b                            coupling
///   coupling = logistic | indicator
///   s0                                     initial price
///   initial_eta_plus, initial_x            initial state
///   horizon                                days; `inf` needs max_events
///   max_events                             0 = unlimited
///   grid_dt                                eta_plus sampling step
///   event_cap                              full event list up to this size
///   events_output = full | compacted       what goes to <prefix>.events.csv
///   seed, run_index
///   discretize_dt                          bin width for price symbols
///   zero_rule = previous | plus | minus
///   cv_min, cv_max, ks_max, min_sojourns, delta_fraction_max, rate_standard_errors
struct RunConfig {
  int n = 10000;
  double alpha = 1.01;
  double r_minus_plus = 0.1;
  double r_plus_minus = 0.1;
  WellPreset wells = WellPreset::Paper;
  std::optional<int> ell;

  double delta = 5.0;
  double a = -0.1000835;
  double b = 0.2001669;
  CouplingVariant coupling = CouplingVariant::Logistic;

  long long s0 = 100;
  int initial_eta_plus = 0;
  int initial_x = 1;
  double horizon = 455.0;
  std::uint64_t max_events = 0;
  double grid_dt = 0.01;
  std::uint64_t event_cap = 100'000'000;
  bool compacted_output = true;
  std::uint64_t seed = 1;
  std::uint64_t run_index = 0;

  double discretize_dt = 1.0;
  ZeroIncrementRule zero_rule = ZeroIncrementRule::Previous;
  Thresholds thresholds;

  /// Validated parameter objects. Throw InputError.
  MarketParams market() const;
  CouplingParams coupling_params() const;
  SimulationOptions simulation_options() const;

  bool operator==(const RunConfig& other) const;
};

/// Throws InputError with a `line N:` prefix on malformed lines, unknown or
/// repeated keys and bad values.
RunConfig parse_config(std::istream& is);
RunConfig parse_config_string(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

std::string to_string(ZeroIncrementRule rule);
ZeroIncrementRule parse_zero_rule(const std::string& name);

}  // namespace metamarket
