#include "metamarket/market.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace metamarket {

MarketParams MarketParams::make(int n, double alpha, double r_minus_plus, double r_plus_minus, int ell) {
  if (n < 0) throw std::invalid_argument("market: N must be non-negative");
  if (!(alpha > 1.0) || !std::isfinite(alpha)) throw std::invalid_argument("market: alpha must be > 1");
  if (!(r_minus_plus >= 0.0) || !(r_plus_minus >= 0.0) || !std::isfinite(r_minus_plus) ||
      !std::isfinite(r_plus_minus)) {
    throw std::invalid_argument("market: jump rates must be finite and non-negative");
  }
  if (r_minus_plus == 0.0 && r_plus_minus == 0.0) {
    throw std::invalid_argument("market: at least one jump rate must be positive");
  }
  if (ell < 0 || (n > 0 && 2 * ell >= n) || (n == 0 && ell != 0)) {
    throw std::invalid_argument("market: well margin must satisfy 0 <= ell < N/2, got ell=" + std::to_string(ell) +
                                " for N=" + std::to_string(n));
  }
  MarketParams p;
  p.n = n;
  p.alpha = alpha;
  p.r_minus_plus = r_minus_plus;
  p.r_plus_minus = r_plus_minus;
  p.ell = ell;
  p.theta = speedup_theta(n, alpha);
  return p;
}

int well_margin(int n, WellPreset preset) {
  if (n <= 0) return 0;
  int ell = 0;
  switch (preset) {
    case WellPreset::Paper:
      ell = n / 3;
      break;
    case WellPreset::Theory:
      ell = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
      break;
  }
  // Largest admissible margin is ceil(n/2) - 1.
  return std::min(ell, (n - 1) / 2);
}

WellPreset parse_well_preset(std::string_view name) {
  if (name == "paper") return WellPreset::Paper;
  if (name == "theory") return WellPreset::Theory;
  throw std::invalid_argument("unknown well preset '" + std::string(name) + "' (expected paper or theory)");
}

std::string_view to_string(WellPreset preset) {
  return preset == WellPreset::Paper ? "paper" : "theory";
}

int well_sign(WellLabel label) noexcept {
  switch (label) {
    case WellLabel::WellMinus:
      return -1;
    case WellLabel::WellPlus:
      return 1;
    case WellLabel::Delta:
      break;
  }
  return 0;
}

WellLabel well_from_sign(int sign) {
  if (sign == -1) return WellLabel::WellMinus;
  if (sign == 1) return WellLabel::WellPlus;
  if (sign == 0) return WellLabel::Delta;
  throw std::invalid_argument("well label sign must be -1, 0 or +1");
}

double rate_g(int n, double alpha) {
  if (n < 0) throw std::domain_error("rate_g: negative occupation number");
  if (!(alpha > 0.0)) throw std::domain_error("rate_g: alpha must be positive");
  if (n == 0) return 0.0;
  if (n == 1) return 1.0;
  const double nn = static_cast<double>(n);
  return std::pow(nn / (nn - 1.0), alpha);
}

double speedup_theta(int n, double alpha) {
  if (n < 0) throw std::domain_error("speedup_theta: negative N");
  return std::pow(static_cast<double>(n), 1.0 + alpha);
}

double market_rate_up(int eta_plus, const MarketParams& params) {
  return params.theta * params.r_minus_plus * rate_g(params.n - eta_plus, params.alpha);
}

double market_rate_down(int eta_plus, const MarketParams& params) {
  return params.theta * params.r_plus_minus * rate_g(eta_plus, params.alpha);
}

std::vector<MarketTransition> market_rates(MarketState state, const MarketParams& params) {
  std::vector<MarketTransition> out;
  out.reserve(2);
  const double up = market_rate_up(state.eta_plus, params);
  const double down = market_rate_down(state.eta_plus, params);
  if (up > 0.0) out.push_back({MarketState{state.eta_plus + 1}, up});
  if (down > 0.0) out.push_back({MarketState{state.eta_plus - 1}, down});
  return out;
}

WellLabel classify(MarketState state, const MarketParams& params) noexcept {
  if (state.eta_plus <= params.ell) return WellLabel::WellMinus;
  if (state.eta_plus >= params.n - params.ell) return WellLabel::WellPlus;
  return WellLabel::Delta;
}

std::vector<double> stationary_weights(const MarketParams& params) {
  const int n = params.n;
  std::vector<double> w(static_cast<std::size_t>(n) + 1, 0.0);
  if (params.r_plus_minus == 0.0) {
    w.back() = 1.0;
    return w;
  }
  if (params.r_minus_plus == 0.0) {
    w.front() = 1.0;
    return w;
  }
  auto log_a = [&](int k) { return k == 0 ? 0.0 : -params.alpha * std::log(static_cast<double>(k)); };
  const double log_ratio = std::log(params.r_minus_plus / params.r_plus_minus);
  double top = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= n; ++k) {
    w[k] = k * log_ratio + log_a(k) + log_a(n - k);
    top = std::max(top, w[k]);
  }
  double total = 0.0;
  for (double& v : w) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : w) v /= total;
  return w;
}

}  // namespace metamarket
