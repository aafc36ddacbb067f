#include "metamarket/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "metamarket/errors.hpp"

namespace metamarket {

using nlohmann::json;

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json well_pair(const WellFunction& f) { return json::array({num(f[0]), num(f[1])}); }

// Rows s = -1, +1; columns x = -1, +1.
json joint(const JointFunction& f) {
  return json::array({json::array({num(f[0][0]), num(f[0][1])}), json::array({num(f[1][0]), num(f[1][1])})});
}

json chain_json(const ReducedChain& c) {
  return {{"rate_minus_to_plus", num(c.rate_minus_to_plus)}, {"rate_plus_to_minus", num(c.rate_plus_to_minus)}};
}

json rate_json(const RateEstimate& r) {
  return {{"rate", num(r.rate)}, {"standard_error", num(r.standard_error)}, {"count", r.count},
          {"exposure", num(r.exposure)}};
}

json expo_json(const ExponentialityResult& e) {
  return {{"count", e.count}, {"mean", num(e.mean)}, {"cv", num(e.cv)}, {"ks", num(e.ks)},
          {"verdict", to_string(e.verdict)}};
}

json occupation_json(const OccupationReport& o) {
  return {{"time_in_well_minus", num(o.time_in_well_minus)},
          {"time_in_well_plus", num(o.time_in_well_plus)},
          {"time_in_delta", num(o.time_in_delta)},
          {"horizon", num(o.horizon)},
          {"delta_fraction", num(o.delta_fraction())}};
}

json spec_json(const HmmSpec& s) {
  return {{"hidden_states", s.hidden_labels}, {"obs_states", s.obs_labels}, {"transition", s.transition},
          {"emission", s.emission}, {"initial", s.initial}};
}

json fit_json(const HmmFit& f) {
  return {{"estimate", spec_json(f.estimate)},
          {"log_likelihood_trace", f.log_likelihood_trace},
          {"iterations", f.iterations},
          {"converged", f.converged}};
}

double get_double(const json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

template <typename T>
T parse_number(const std::string& field, int line_no) {
  T v{};
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw InputError("line " + std::to_string(line_no) + ": bad number '" + field + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string chomp(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

std::string to_json(const MetastabilityReport& r, int indent) {
  json j = {
      {"sojourns_minus", expo_json(r.minus)},
      {"sojourns_plus", expo_json(r.plus)},
      {"empirical_rates",
       {{"minus_to_plus", rate_json(r.rates.minus_to_plus)}, {"plus_to_minus", rate_json(r.rates.plus_to_minus)}}},
      {"occupation", occupation_json(r.occupation)},
      {"delta_fraction", num(r.delta_fraction)},
      {"reduced_chain", chain_json(r.theoretical)},
      {"crossings",
       {{"crossings", r.crossings.crossings},
        {"mean_crossing_time", num(r.crossings.mean_crossing_time)},
        {"excursions", r.crossings.excursions}}},
      {"conditional_drift",
       {{"rings_minus", r.drift.rings_minus},
        {"rings_plus", r.drift.rings_plus},
        {"rings_delta", r.drift.rings_delta},
        {"mean_minus", num(r.drift.mean_minus)},
        {"mean_plus", num(r.drift.mean_plus)}}},
      {"rates_within_band", r.rates_within_band},
      {"delta_verdict", to_string(r.delta_verdict)},
      {"metastable_verdict", to_string(r.metastable_verdict)},
  };
  if (r.finite_n) j["finite_n_rates"] = chain_json(*r.finite_n);
  return j.dump(indent);
}

std::string to_json(const ConditionReport& r, int indent) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"n", row.n},
                    {"ell", row.ell},
                    {"sup_deviation", well_pair(row.sup_deviation)},
                    {"deviation", num(row.deviation)},
                    {"residual", num(row.residual)},
                    {"max_abs_solution", num(row.max_abs_solution)}});
  }
  json j = {{"lambda", num(r.lambda)},
            {"g", well_pair(r.g)},
            {"reduced_chain", chain_json(r.chain)},
            {"reduced_solution", well_pair(r.reduced_solution)},
            {"target", num(r.target)},
            {"rows", rows},
            {"non_increasing", r.non_increasing},
            {"final_below_target", r.final_below_target},
            {"pass", r.pass}};
  return j.dump(indent);
}

std::string to_json(const JointReport& r, int indent) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"n", row.n},
                    {"ell", row.ell},
                    {"sup_deviation", joint(row.sup_deviation)},
                    {"deviation", num(row.deviation)},
                    {"per_x_gap", num(row.per_x_gap)},
                    {"residual", num(row.residual)}});
  }
  json j = {{"lambda", num(r.lambda)},
            {"g", joint(r.g)},
            {"reduced_chain", chain_json(r.chain)},
            {"reduced_solution", joint(r.reduced_solution)},
            {"per_x_solution", joint(r.per_x_solution)},
            {"identity_error", num(r.identity_error)},
            {"target", num(r.target)},
            {"rows", rows},
            {"non_increasing", r.non_increasing},
            {"strictly_decreasing", r.strictly_decreasing},
            {"final_below_target", r.final_below_target},
            {"identity_holds", r.identity_holds},
            {"pass", r.pass}};
  return j.dump(indent);
}

std::string to_json(const HmmSpec& spec, int indent) { return spec_json(spec).dump(indent); }

std::string to_json(const HmmFit& fit, int indent) { return fit_json(fit).dump(indent); }

std::string to_json(const RestartFit& fit, int indent) {
  json j = {{"best", fit_json(fit.best)},
            {"best_restart", fit.best_restart},
            {"restarts", fit.restart_log_likelihoods.size()},
            {"restart_log_likelihoods", fit.restart_log_likelihoods}};
  return j.dump(indent);
}

HmmSpec hmm_spec_from_json(const std::string& text) {
  HmmSpec s;
  try {
    const json j = json::parse(text);
    s.hidden_labels = j.at("hidden_states").get<std::vector<int>>();
    s.obs_labels = j.at("obs_states").get<std::vector<int>>();
    s.transition = j.at("transition").get<Matrix>();
    s.emission = j.at("emission").get<Matrix>();
    s.initial = j.at("initial").get<std::vector<double>>();
    s.validate();
  } catch (const json::exception& e) {
    throw InputError(std::string("hmm spec: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return s;
}

RunSummary make_summary(const Trajectory& traj, long long s0, std::uint64_t events_written) {
  RunSummary s;
  s.market = traj.market;
  s.coupling = traj.coupling;
  s.seed = traj.seed;
  s.run_index = traj.run_index;
  s.initial_eta_plus = traj.initial_state.eta_plus;
  s.initial_x = traj.initial_x;
  s.s0 = s0;
  s.horizon = traj.horizon;
  s.compacted = traj.compacted;
  switch (traj.status) {
    case SimulationStatus::ReachedHorizon:
      s.status = "reached_horizon";
      break;
    case SimulationStatus::ReachedMaxEvents:
      s.status = "reached_max_events";
      break;
    case SimulationStatus::Absorbed:
      s.status = "absorbed";
      break;
  }
  s.market_jumps = traj.market_jumps;
  s.observable_rings = traj.observable_rings;
  s.events_written = events_written;
  s.occupation = occupation_report(traj, traj.market);
  return s;
}

std::string to_json(const RunSummary& s, int indent) {
  const double days = s.horizon;
  json j = {
      {"market",
       {{"n", s.market.n},
        {"alpha", s.market.alpha},
        {"r_minus_plus", s.market.r_minus_plus},
        {"r_plus_minus", s.market.r_plus_minus},
        {"ell", s.market.ell},
        {"theta", s.market.theta}}},
      {"coupling",
       {{"delta", s.coupling.delta},
        {"a", s.coupling.a},
        {"b", s.coupling.b},
        {"variant", s.coupling.variant == CouplingVariant::Logistic ? "logistic" : "indicator"}}},
      {"seed", s.seed},
      {"run_index", s.run_index},
      {"initial", {{"eta_plus", s.initial_eta_plus}, {"x", s.initial_x}}},
      {"s0", s.s0},
      {"horizon", num(s.horizon)},
      {"status", s.status},
      {"compacted", s.compacted},
      {"market_jumps", s.market_jumps},
      {"observable_rings", s.observable_rings},
      {"events_written", s.events_written},
      {"market_events_per_day", days > 0.0 ? num(static_cast<double>(s.market_jumps) / days) : json(nullptr)},
      {"occupation", occupation_json(s.occupation)},
  };
  return j.dump(indent);
}

RunSummary summary_from_json(const std::string& text) {
  RunSummary s;
  try {
    const json j = json::parse(text);
    const json& m = j.at("market");
    s.market = MarketParams::make(m.at("n").get<int>(), m.at("alpha").get<double>(), m.at("r_minus_plus").get<double>(),
                                  m.at("r_plus_minus").get<double>(), m.at("ell").get<int>());
    const json& c = j.at("coupling");
    const std::string variant = c.at("variant").get<std::string>();
    if (variant != "logistic" && variant != "indicator") throw InputError("summary: unknown coupling variant");
    s.coupling = CouplingParams::make(c.at("delta").get<double>(), c.at("a").get<double>(), c.at("b").get<double>(),
                                      variant == "logistic" ? CouplingVariant::Logistic : CouplingVariant::Indicator);
    s.seed = j.value("seed", std::uint64_t{0});
    s.run_index = j.value("run_index", std::uint64_t{0});
    s.initial_eta_plus = j.at("initial").at("eta_plus").get<int>();
    s.initial_x = j.at("initial").at("x").get<int>();
    s.s0 = j.value("s0", 0LL);
    s.horizon = get_double(j.at("horizon"));
    s.compacted = j.value("compacted", false);
    s.status = j.value("status", std::string("reached_horizon"));
    s.market_jumps = j.value("market_jumps", std::uint64_t{0});
    s.observable_rings = j.value("observable_rings", std::uint64_t{0});
    s.events_written = j.value("events_written", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw InputError(std::string("summary: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("summary: ") + e.what());
  }
  if (!(s.horizon >= 0.0)) throw InputError("summary: horizon must be a non-negative number");
  return s;
}

std::vector<Event> read_event_csv(std::istream& is) {
  std::vector<Event> events;
  std::string line;
  int line_no = 0;
  if (!std::getline(is, line) || chomp(line) != "t,kind,eta_plus,x") {
    throw InputError("line 1: expected header 't,kind,eta_plus,x'");
  }
  ++line_no;
  while (std::getline(is, line)) {
    ++line_no;
    line = chomp(line);
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 4) throw InputError("line " + std::to_string(line_no) + ": expected 4 fields");
    Event e;
    e.t = parse_number<double>(f[0], line_no);
    if (f[1] == "M") {
      e.kind = EventKind::MarketJump;
    } else if (f[1] == "O") {
      e.kind = EventKind::ObservableRing;
    } else {
      throw InputError("line " + std::to_string(line_no) + ": kind must be M or O");
    }
    e.eta_plus_after = parse_number<std::int32_t>(f[2], line_no);
    const int x = parse_number<int>(f[3], line_no);
    if (x != 1 && x != -1) throw InputError("line " + std::to_string(line_no) + ": x must be -1 or 1");
    e.x_after = static_cast<std::int8_t>(x);
    if (!events.empty() && !(e.t >= events.back().t)) {
      throw InputError("line " + std::to_string(line_no) + ": event times must be non-decreasing");
    }
    events.push_back(e);
  }
  return events;
}

const char* label_name(WellLabel label) noexcept {
  switch (label) {
    case WellLabel::WellMinus:
      return "WellMinus";
    case WellLabel::WellPlus:
      return "WellPlus";
    case WellLabel::Delta:
      return "Delta";
  }
  return "Delta";
}

WellLabel parse_label_name(const std::string& name) {
  if (name == "WellMinus") return WellLabel::WellMinus;
  if (name == "WellPlus") return WellLabel::WellPlus;
  if (name == "Delta") return WellLabel::Delta;
  throw InputError("unknown well label '" + name + "'");
}

std::vector<GridRow> grid_rows(const Trajectory& traj, long long s0) {
  std::vector<GridRow> rows;
  rows.reserve(traj.grid.eta_plus.size());
  const double n = traj.market.n > 0 ? traj.market.n : 1;
  long long price = s0;
  std::size_t next = 0;
  for (std::size_t k = 0; k < traj.grid.eta_plus.size(); ++k) {
    const double t = static_cast<double>(k) * traj.grid.dt;
    while (next < traj.events.size() && traj.events[next].t <= t) {
      if (traj.events[next].kind == EventKind::ObservableRing) price += traj.events[next].x_after;
      ++next;
    }
    const int eta = traj.grid.eta_plus[k];
    rows.push_back({t, eta / n, price, classify(eta, traj.market)});
  }
  return rows;
}

void write_grid_csv(std::ostream& os, const std::vector<GridRow>& rows) {
  os << "t,eta_plus_frac,price,well\n";
  char buf[128];
  for (const auto& r : rows) {
    const int len = std::snprintf(buf, sizeof buf, "%.12g,%.12g,%lld,%s\n", r.t, r.eta_fraction, r.price,
                                  label_name(r.label));
    os.write(buf, len);
  }
}

std::vector<GridRow> read_grid_csv(std::istream& is) {
  std::vector<GridRow> rows;
  std::string line;
  if (!std::getline(is, line) || chomp(line) != "t,eta_plus_frac,price,well") {
    throw InputError("line 1: expected header 't,eta_plus_frac,price,well'");
  }
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    line = chomp(line);
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 4) throw InputError("line " + std::to_string(line_no) + ": expected 4 fields");
    rows.push_back({parse_number<double>(f[0], line_no), parse_number<double>(f[1], line_no),
                    parse_number<long long>(f[2], line_no), parse_label_name(f[3])});
  }
  return rows;
}

std::vector<int> read_observations(std::istream& is) {
  std::vector<int> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    std::string token = line.substr(first, last - first + 1);
    if (!token.empty() && token[0] == '+') token.erase(0, 1);
    out.push_back(parse_number<int>(token, line_no));
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace metamarket
