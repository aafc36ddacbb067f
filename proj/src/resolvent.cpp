#include "metamarket/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "metamarket/errors.hpp"

namespace metamarket {

SparseGenerator::SparseGenerator(const std::vector<std::vector<Entry>>& rows) {
  offsets_.reserve(rows.size() + 1);
  offsets_.push_back(0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const Entry& e : rows[i]) {
      if (e.target >= rows.size()) throw std::out_of_range("SparseGenerator: target index");
      if (!(e.rate >= 0.0) || !std::isfinite(e.rate)) throw std::invalid_argument("SparseGenerator: negative rate");
      if (e.target == i || e.rate == 0.0) continue;
      entries_.push_back(e);
    }
    offsets_.push_back(entries_.size());
  }
}

double SparseGenerator::exit_rate(std::size_t i) const {
  double s = 0.0;
  for (const Entry& e : row(i)) s += e.rate;
  return s;
}

double SparseGenerator::max_exit_rate() const {
  double m = 0.0;
  for (std::size_t i = 0; i < dimension(); ++i) m = std::max(m, exit_rate(i));
  return m;
}

std::size_t SparseGenerator::bandwidth() const {
  std::size_t w = 0;
  for (std::size_t i = 0; i < dimension(); ++i) {
    for (const Entry& e : row(i)) w = std::max(w, e.target > i ? e.target - i : i - e.target);
  }
  return w;
}

std::vector<double> SparseGenerator::apply(std::span<const double> f) const {
  std::vector<double> out(dimension(), 0.0);
  for (std::size_t i = 0; i < dimension(); ++i) {
    double s = 0.0;
    for (const Entry& e : row(i)) s += e.rate * (f[e.target] - f[i]);
    out[i] = s;
  }
  return out;
}

linalg::DenseMatrix SparseGenerator::dense() const {
  linalg::DenseMatrix m(dimension());
  for (std::size_t i = 0; i < dimension(); ++i) {
    for (const Entry& e : row(i)) {
      m(i, e.target) += e.rate;
      m(i, i) -= e.rate;
    }
  }
  return m;
}

SparseGenerator build_market_generator(const MarketParams& params) {
  std::vector<std::vector<SparseGenerator::Entry>> rows(static_cast<std::size_t>(params.n) + 1);
  for (int k = 0; k <= params.n; ++k) {
    for (const auto& tr : market_rates(MarketState{k}, params)) {
      rows[k].push_back({static_cast<std::size_t>(tr.target.eta_plus), tr.rate});
    }
  }
  return SparseGenerator(rows);
}

SparseGenerator build_joint_generator(const MarketParams& params, const CouplingParams& coupling) {
  std::vector<std::vector<SparseGenerator::Entry>> rows(2 * (static_cast<std::size_t>(params.n) + 1));
  for (int k = 0; k <= params.n; ++k) {
    const auto market = market_rates(MarketState{k}, params);
    const auto obs = observable_rates(MarketState{k}, params, coupling);
    for (int x : {-1, 1}) {
      auto& row = rows[joint_index(k, x)];
      for (const auto& tr : market) row.push_back({joint_index(tr.target.eta_plus, x), tr.rate});
      // Only the move to the other symbol changes the state.
      if (x == -1) {
        row.push_back({joint_index(k, 1), obs.to_plus});
      } else {
        row.push_back({joint_index(k, -1), obs.to_minus});
      }
    }
  }
  return SparseGenerator(rows);
}

namespace {

void check_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("resolvent: lambda must be > 0");
}

ResolventSolution finish(const SparseGenerator& gen, double lambda, std::span<const double> g,
                         std::vector<double> values) {
  ResolventSolution sol;
  sol.lambda = lambda;
  const double max_rate = gen.max_exit_rate();
  sol.condition_estimate = (lambda + 2.0 * max_rate) / lambda;
  const auto lf = gen.apply(values);
  double residual = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    residual = std::max(residual, std::abs(lambda * values[i] - lf[i] - g[i]));
  }
  sol.residual = residual;
  const double scale = linalg::max_abs(values);
  const double tolerance = 1e-10 * (lambda + max_rate) * std::max(scale, std::numeric_limits<double>::min());
  if (!(residual <= tolerance)) {
    std::ostringstream msg;
    msg << "resolvent solve failed residual check: residual " << residual << " > " << tolerance
        << " (condition estimate " << sol.condition_estimate << ")";
    throw NumericalError(msg.str(), sol.condition_estimate);
  }
  const double bound = linalg::max_abs(g) / lambda;
  sol.max_principle_holds = scale <= bound * (1.0 + 1e-12) + std::numeric_limits<double>::min();
  sol.values = std::move(values);
  return sol;
}

}  // namespace

ResolventSolution solve_resolvent(const SparseGenerator& gen, double lambda, std::span<const double> g) {
  check_lambda(lambda);
  const std::size_t n = gen.dimension();
  if (g.size() != n) throw std::invalid_argument("solve_resolvent: right-hand side has wrong size");
  linalg::BandMatrix m(n, std::max<std::size_t>(gen.bandwidth(), 1));
  for (std::size_t i = 0; i < n; ++i) {
    double diag = lambda;
    for (const auto& e : gen.row(i)) {
      m.at(i, e.target) -= e.rate;
      diag += e.rate;
    }
    m.at(i, i) += diag;
  }
  return finish(gen, lambda, g, m.solve(g));
}

ResolventSolution solve_resolvent_dense(const SparseGenerator& gen, double lambda, std::span<const double> g) {
  check_lambda(lambda);
  const std::size_t n = gen.dimension();
  if (g.size() != n) throw std::invalid_argument("solve_resolvent_dense: right-hand side has wrong size");
  linalg::DenseMatrix m = gen.dense();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m(i, j) = -m(i, j);
    m(i, i) += lambda;
  }
  return finish(gen, lambda, g, m.solve(g));
}

double capacity(double r_minus_plus, double r_plus_minus) {
  if (!(r_minus_plus > 0.0) || !(r_plus_minus > 0.0)) {
    throw std::invalid_argument("capacity: the two-state chain must be irreducible");
  }
  const double mu_minus = r_plus_minus / (r_minus_plus + r_plus_minus);
  return mu_minus * r_minus_plus;
}

double capacity_dirichlet(const SparseGenerator& gen, std::span<const double> measure,
                          std::span<const std::size_t> set_a, std::span<const std::size_t> set_b) {
  const std::size_t n = gen.dimension();
  if (measure.size() != n) throw std::invalid_argument("capacity_dirichlet: measure has wrong size");
  std::vector<int> role(n, 0);  // 1 in A, 2 in B
  for (auto i : set_a) role.at(i) = 1;
  for (auto i : set_b) {
    if (role.at(i) == 1) throw std::invalid_argument("capacity_dirichlet: sets must be disjoint");
    role[i] = 2;
  }
  linalg::BandMatrix m(n, std::max<std::size_t>(gen.bandwidth(), 1));
  std::vector<double> rhs(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (role[i] != 0) {
      m.at(i, i) = 1.0;
      rhs[i] = role[i] == 1 ? 1.0 : 0.0;
      continue;
    }
    double diag = 0.0;
    for (const auto& e : gen.row(i)) {
      m.at(i, e.target) -= e.rate;
      diag += e.rate;
    }
    m.at(i, i) += diag;
  }
  const auto h = m.solve(rhs);
  double cap = 0.0;
  for (auto i : set_a) {
    for (const auto& e : gen.row(i)) cap += measure[i] * e.rate * (h[i] - h[e.target]);
  }
  return cap;
}

double beta_integral(double alpha) {
  if (!(alpha > 0.0)) throw std::domain_error("beta_integral: alpha must be positive");
  return std::exp(2.0 * std::lgamma(alpha + 1.0) - std::lgamma(2.0 * alpha + 2.0));
}

ReducedChain reduced_chain(double alpha, double r_minus_plus, double r_plus_minus) {
  if (!(alpha > 0.0)) throw std::domain_error("reduced_chain: alpha must be positive");
  const double cap = capacity(r_minus_plus, r_plus_minus);
  const double scale = std::tgamma(alpha) * beta_integral(alpha);
  // Capacity is symmetric, so both directions share it.
  return {cap / scale, cap / scale};
}

ReducedChain well_transition_rates(const MarketParams& params) {
  const auto gen = build_market_generator(params);
  const auto pi = stationary_weights(params);
  std::vector<std::size_t> a, b;
  double mass_a = 0.0, mass_b = 0.0;
  for (int k = 0; k <= params.n; ++k) {
    switch (classify(k, params)) {
      case WellLabel::WellMinus:
        a.push_back(k);
        mass_a += pi[k];
        break;
      case WellLabel::WellPlus:
        b.push_back(k);
        mass_b += pi[k];
        break;
      case WellLabel::Delta:
        break;
    }
  }
  const double cap = capacity_dirichlet(gen, pi, a, b);
  return {cap / mass_a, cap / mass_b};
}

WellFunction solve_reduced_resolvent(const ReducedChain& chain, double lambda, const WellFunction& g) {
  check_lambda(lambda);
  const double qm = chain.rate_minus_to_plus;
  const double qp = chain.rate_plus_to_minus;
  // [[lambda + qm, -qm], [-qp, lambda + qp]] f = g; det = lambda (lambda + qm + qp).
  const double det = lambda * (lambda + qm + qp);
  return {((lambda + qp) * g[0] + qm * g[1]) / det, (qp * g[0] + (lambda + qm) * g[1]) / det};
}

std::vector<double> well_indicator_function(const MarketParams& params, const WellFunction& g) {
  std::vector<double> out(static_cast<std::size_t>(params.n) + 1, 0.0);
  for (int k = 0; k <= params.n; ++k) {
    const int s = well_sign(classify(k, params));
    if (s != 0) out[k] = g[s > 0 ? 1 : 0];
  }
  return out;
}

namespace {

void check_ladder(const std::vector<MarketParams>& ladder) {
  if (ladder.empty()) throw std::invalid_argument("verification ladder is empty");
  for (const auto& p : ladder) {
    if (p.alpha != ladder.front().alpha || p.r_minus_plus != ladder.front().r_minus_plus ||
        p.r_plus_minus != ladder.front().r_plus_minus) {
      throw std::invalid_argument("verification ladder must share alpha and jump rates");
    }
  }
}

template <typename Rows>
std::pair<bool, bool> monotonicity(const Rows& rows) {
  bool non_increasing = true, strictly = true;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].deviation > rows[i - 1].deviation) non_increasing = false;
    if (!(rows[i].deviation < rows[i - 1].deviation)) strictly = false;
  }
  return {non_increasing, strictly};
}

}  // namespace

ConditionReport verify_condition_R(const std::vector<MarketParams>& ladder, double lambda, const WellFunction& g,
                                   double target) {
  check_ladder(ladder);
  ConditionReport report;
  report.lambda = lambda;
  report.g = g;
  report.target = target;
  report.chain = reduced_chain(ladder.front().alpha, ladder.front().r_minus_plus, ladder.front().r_plus_minus);
  report.reduced_solution = solve_reduced_resolvent(report.chain, lambda, g);

  for (const auto& params : ladder) {
    const auto gen = build_market_generator(params);
    const auto rhs = well_indicator_function(params, g);
    const auto sol = solve_resolvent(gen, lambda, rhs);
    ConditionRow row;
    row.n = params.n;
    row.ell = params.ell;
    row.residual = sol.residual;
    row.max_abs_solution = linalg::max_abs(sol.values);
    for (int k = 0; k <= params.n; ++k) {
      const int s = well_sign(classify(k, params));
      if (s == 0) continue;
      const int i = s > 0 ? 1 : 0;
      row.sup_deviation[i] = std::max(row.sup_deviation[i], std::abs(sol.values[k] - report.reduced_solution[i]));
    }
    row.deviation = std::max(row.sup_deviation[0], row.sup_deviation[1]);
    report.rows.push_back(row);
  }
  report.non_increasing = monotonicity(report.rows).first;
  report.final_below_target = report.rows.back().deviation < target;
  report.pass = report.non_increasing && report.final_below_target;
  return report;
}

JointFunction solve_reduced_joint_resolvent(const ReducedChain& chain, const CouplingParams& coupling, double lambda,
                                            const JointFunction& g) {
  check_lambda(lambda);
  auto idx = [](int si, int xi) { return static_cast<std::size_t>(2 * si + xi); };
  linalg::DenseMatrix m(4);
  std::vector<double> rhs(4);
  const std::array<double, 2> leave = {chain.rate_minus_to_plus, chain.rate_plus_to_minus};
  for (int si = 0; si < 2; ++si) {
    const auto gamma = limit_rates(si == 0 ? -1 : 1, coupling);
    const std::array<double, 2> to = {gamma.to_minus, gamma.to_plus};
    for (int xi = 0; xi < 2; ++xi) {
      const auto i = idx(si, xi);
      rhs[i] = g[si][xi];
      m(i, i) += lambda + leave[si] + to[1 - xi];
      m(i, idx(1 - si, xi)) -= leave[si];
      m(i, idx(si, 1 - xi)) -= to[1 - xi];
    }
  }
  const auto f = m.solve(rhs);
  return {{{f[0], f[1]}, {f[2], f[3]}}};
}

JointReport verify_joint_condition(const std::vector<MarketParams>& ladder, const CouplingParams& coupling,
                                   double lambda, const JointFunction& g, double target) {
  check_ladder(ladder);
  JointReport report;
  report.lambda = lambda;
  report.g = g;
  report.target = target;
  report.chain = reduced_chain(ladder.front().alpha, ladder.front().r_minus_plus, ladder.front().r_plus_minus);
  const JointFunction& f = report.reduced_solution = solve_reduced_joint_resolvent(report.chain, coupling, lambda, g);

  // (L_X f)(s, x) with the limit observable rates.
  JointFunction lx{};
  for (int si = 0; si < 2; ++si) {
    const auto gamma = limit_rates(si == 0 ? -1 : 1, coupling);
    const std::array<double, 2> to = {gamma.to_minus, gamma.to_plus};
    for (int xi = 0; xi < 2; ++xi) lx[si][xi] = to[1 - xi] * (f[si][1 - xi] - f[si][xi]);
  }
  // Modified reduced equation per x: (lambda - L) f_x = g_x + (L_X f)(., x).
  std::array<WellFunction, 2> modified_rhs{};
  for (int xi = 0; xi < 2; ++xi) {
    modified_rhs[xi] = {g[0][xi] + lx[0][xi], g[1][xi] + lx[1][xi]};
    const auto fx = solve_reduced_resolvent(report.chain, lambda, modified_rhs[xi]);
    for (int si = 0; si < 2; ++si) {
      report.per_x_solution[si][xi] = fx[si];
      report.identity_error = std::max(report.identity_error, std::abs(fx[si] - f[si][xi]));
    }
  }
  report.identity_holds = report.identity_error < 1e-12;

  for (const auto& params : ladder) {
    const auto gen = build_joint_generator(params, coupling);
    std::vector<double> rhs(gen.dimension(), 0.0);
    for (int k = 0; k <= params.n; ++k) {
      const int s = well_sign(classify(k, params));
      if (s == 0) continue;
      for (int xi = 0; xi < 2; ++xi) rhs[joint_index(k, xi == 0 ? -1 : 1)] = g[s > 0 ? 1 : 0][xi];
    }
    const auto sol = solve_resolvent(gen, lambda, rhs);
    const auto market = build_market_generator(params);

    JointRow row;
    row.n = params.n;
    row.ell = params.ell;
    row.residual = sol.residual;
    for (int xi = 0; xi < 2; ++xi) {
      const int x = xi == 0 ? -1 : 1;
      const auto per_x = solve_resolvent(market, lambda, well_indicator_function(params, modified_rhs[xi]));
      for (int k = 0; k <= params.n; ++k) {
        const int s = well_sign(classify(k, params));
        if (s == 0) continue;
        const int si = s > 0 ? 1 : 0;
        const double value = sol.values[joint_index(k, x)];
        row.sup_deviation[si][xi] = std::max(row.sup_deviation[si][xi], std::abs(value - f[si][xi]));
        row.per_x_gap = std::max(row.per_x_gap, std::abs(per_x.values[k] - value));
      }
    }
    for (const auto& r : row.sup_deviation) row.deviation = std::max({row.deviation, r[0], r[1]});
    report.rows.push_back(row);
  }
  std::tie(report.non_increasing, report.strictly_decreasing) = monotonicity(report.rows);
  report.final_below_target = report.rows.back().deviation < target;
  report.pass = report.non_increasing && report.final_below_target && report.identity_holds;
  return report;
}

}  // namespace metamarket
