#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace metamarket {

/// Two-site zero-range market: N agents split between groups -1 and +1.
/// Agents leave group s at rate theta * r(s, -s) * g(eta_s).
struct MarketParams {
  int n = 0;                  // number of agents
  double alpha = 0.0;         // rate exponent, > 1
  double r_minus_plus = 0.0;  // r(-1, +1)
  double r_plus_minus = 0.0;  // r(+1, -1)
  int ell = 0;                // well margin
  double theta = 0.0;         // speed-up N^(1 + alpha), derived

  /// Validates and fills theta. Throws std::invalid_argument.
  static MarketParams make(int n, double alpha, double r_minus_plus, double r_plus_minus, int ell);

  bool symmetric() const noexcept { return r_minus_plus == r_plus_minus; }
  friend bool operator==(const MarketParams&, const MarketParams&) = default;
};

enum class WellPreset { Paper, Theory };

/// Paper preset: floor(N/3). Theory preset: ceil(sqrt(N)), so that ell/N -> 0.
/// The result is clamped to keep 2*ell < N.
int well_margin(int n, WellPreset preset);
WellPreset parse_well_preset(std::string_view name);
std::string_view to_string(WellPreset preset);

struct MarketState {
  int eta_plus = 0;

  int eta_minus(int n) const noexcept { return n - eta_plus; }
  friend bool operator==(const MarketState&, const MarketState&) = default;
};

enum class WellLabel : std::int8_t { WellMinus, WellPlus, Delta };

/// -1 for WellMinus, +1 for WellPlus, 0 for Delta.
int well_sign(WellLabel label) noexcept;
WellLabel well_from_sign(int sign);

/// g(0) = 0, g(1) = 1, g(n) = (n / (n - 1))^alpha. Throws std::domain_error
/// on negative n or non-positive alpha.
double rate_g(int n, double alpha);

/// N^(1 + alpha).
double speedup_theta(int n, double alpha);

struct MarketTransition {
  MarketState target;
  double rate = 0.0;
};

/// Outgoing jumps of the speeded-up market from `state`, zero rates omitted.
std::vector<MarketTransition> market_rates(MarketState state, const MarketParams& params);

/// Up and down rates without allocation; used by the simulator tables.
double market_rate_up(int eta_plus, const MarketParams& params);
double market_rate_down(int eta_plus, const MarketParams& params);

WellLabel classify(MarketState state, const MarketParams& params) noexcept;
inline WellLabel classify(int eta_plus, const MarketParams& params) noexcept {
  return classify(MarketState{eta_plus}, params);
}

/// Reversible measure of the market chain, normalized, indexed by eta_plus.
/// w(k) is proportional to (r(-1,+1) / r(+1,-1))^k * a(k) * a(N - k) with
/// a(0) = 1, a(n) = n^(-alpha).
std::vector<double> stationary_weights(const MarketParams& params);

}  // namespace metamarket
