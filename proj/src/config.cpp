#include "metamarket/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "metamarket/errors.hpp"

namespace metamarket {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || std::isnan(out)) throw std::invalid_argument("expected a number, got '" + v + "'");
  return out;
}

template <typename Int>
Int to_int(const std::string& v) {
  Int out = 0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument("expected an integer, got '" + v + "'");
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"n", [](RunConfig& c, const std::string& v) { c.n = to_int<int>(v); }},
      {"alpha", [](RunConfig& c, const std::string& v) { c.alpha = to_double(v); }},
      {"r_minus_plus", [](RunConfig& c, const std::string& v) { c.r_minus_plus = to_double(v); }},
      {"r_plus_minus", [](RunConfig& c, const std::string& v) { c.r_plus_minus = to_double(v); }},
      {"wells", [](RunConfig& c, const std::string& v) { c.wells = parse_well_preset(v); }},
      {"ell", [](RunConfig& c, const std::string& v) { c.ell = to_int<int>(v); }},
      {"delta", [](RunConfig& c, const std::string& v) { c.delta = to_double(v); }},
      {"a", [](RunConfig& c, const std::string& v) { c.a = to_double(v); }},
      {"b", [](RunConfig& c, const std::string& v) { c.b = to_double(v); }},
      {"coupling",
       [](RunConfig& c, const std::string& v) {
         if (v == "logistic") {
           c.coupling = CouplingVariant::Logistic;
         } else if (v == "indicator") {
           c.coupling = CouplingVariant::Indicator;
         } else {
           throw std::invalid_argument("expected logistic or indicator, got '" + v + "'");
         }
       }},
      {"s0", [](RunConfig& c, const std::string& v) { c.s0 = to_int<long long>(v); }},
      {"initial_eta_plus", [](RunConfig& c, const std::string& v) { c.initial_eta_plus = to_int<int>(v); }},
      {"initial_x", [](RunConfig& c, const std::string& v) { c.initial_x = to_int<int>(v); }},
      {"horizon", [](RunConfig& c, const std::string& v) { c.horizon = to_double(v); }},
      {"max_events", [](RunConfig& c, const std::string& v) { c.max_events = to_int<std::uint64_t>(v); }},
      {"grid_dt", [](RunConfig& c, const std::string& v) { c.grid_dt = to_double(v); }},
      {"event_cap", [](RunConfig& c, const std::string& v) { c.event_cap = to_int<std::uint64_t>(v); }},
      {"events_output",
       [](RunConfig& c, const std::string& v) {
         if (v == "full") {
           c.compacted_output = false;
         } else if (v == "compacted") {
           c.compacted_output = true;
         } else {
           throw std::invalid_argument("expected full or compacted, got '" + v + "'");
         }
       }},
      {"seed", [](RunConfig& c, const std::string& v) { c.seed = to_int<std::uint64_t>(v); }},
      {"run_index", [](RunConfig& c, const std::string& v) { c.run_index = to_int<std::uint64_t>(v); }},
      {"discretize_dt", [](RunConfig& c, const std::string& v) { c.discretize_dt = to_double(v); }},
      {"zero_rule", [](RunConfig& c, const std::string& v) { c.zero_rule = parse_zero_rule(v); }},
      {"cv_min", [](RunConfig& c, const std::string& v) { c.thresholds.cv_min = to_double(v); }},
      {"cv_max", [](RunConfig& c, const std::string& v) { c.thresholds.cv_max = to_double(v); }},
      {"ks_max", [](RunConfig& c, const std::string& v) { c.thresholds.ks_max = to_double(v); }},
      {"min_sojourns", [](RunConfig& c, const std::string& v) { c.thresholds.min_sojourns = to_int<std::size_t>(v); }},
      {"delta_fraction_max", [](RunConfig& c, const std::string& v) { c.thresholds.delta_fraction_max = to_double(v); }},
      {"rate_standard_errors",
       [](RunConfig& c, const std::string& v) { c.thresholds.rate_standard_errors = to_double(v); }},
  };
  return table;
}

}  // namespace

std::string to_string(ZeroIncrementRule rule) {
  switch (rule) {
    case ZeroIncrementRule::Previous:
      return "previous";
    case ZeroIncrementRule::Plus:
      return "plus";
    case ZeroIncrementRule::Minus:
      return "minus";
  }
  return "previous";
}

ZeroIncrementRule parse_zero_rule(const std::string& name) {
  if (name == "previous") return ZeroIncrementRule::Previous;
  if (name == "plus") return ZeroIncrementRule::Plus;
  if (name == "minus") return ZeroIncrementRule::Minus;
  throw std::invalid_argument("expected previous, plus or minus, got '" + name + "'");
}

MarketParams RunConfig::market() const {
  try {
    return MarketParams::make(n, alpha, r_minus_plus, r_plus_minus, ell ? *ell : well_margin(n, wells));
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

CouplingParams RunConfig::coupling_params() const {
  try {
    return CouplingParams::make(delta, a, b, coupling);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

SimulationOptions RunConfig::simulation_options() const {
  if (!(horizon >= 0.0)) throw InputError("horizon must be >= 0");
  if (std::isinf(horizon) && max_events == 0) throw InputError("an infinite horizon needs max_events > 0");
  if (initial_x != -1 && initial_x != 1) throw InputError("initial_x must be -1 or 1");
  if (initial_eta_plus < 0 || initial_eta_plus > n) throw InputError("initial_eta_plus must lie in [0, n]");
  SimulationOptions o;
  o.horizon = horizon;
  o.max_events = max_events;
  o.seed = seed;
  o.run_index = run_index;
  o.event_cap = static_cast<std::size_t>(event_cap);
  o.grid_dt = grid_dt;
  return o;
}

bool RunConfig::operator==(const RunConfig& o) const {
  const auto& t = thresholds;
  const auto& u = o.thresholds;
  return n == o.n && alpha == o.alpha && r_minus_plus == o.r_minus_plus && r_plus_minus == o.r_plus_minus &&
         wells == o.wells && ell == o.ell && delta == o.delta && a == o.a && b == o.b && coupling == o.coupling &&
         s0 == o.s0 && initial_eta_plus == o.initial_eta_plus && initial_x == o.initial_x && horizon == o.horizon &&
         max_events == o.max_events && grid_dt == o.grid_dt && event_cap == o.event_cap &&
         compacted_output == o.compacted_output && seed == o.seed && run_index == o.run_index &&
         discretize_dt == o.discretize_dt && zero_rule == o.zero_rule && t.cv_min == u.cv_min &&
         t.cv_max == u.cv_max && t.ks_max == u.ks_max && t.min_sojourns == u.min_sojourns &&
         t.delta_fraction_max == u.delta_fraction_max && t.rate_standard_errors == u.rate_standard_errors;
}

RunConfig parse_config(std::istream& is) {
  RunConfig config;
  std::set<std::string> seen;
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto where = "line " + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError(where + "expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw InputError(where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw InputError(where + "repeated key '" + key + "'");
    if (value.empty()) throw InputError(where + "missing value for '" + key + "'");
    try {
      it->second(config, value);
    } catch (const std::invalid_argument& e) {
      throw InputError(where + key + ": " + e.what());
    }
  }
  return config;
}

RunConfig parse_config_string(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  return parse_config(in);
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  os << "# market\n";
  os << "n = " << c.n << '\n';
  os << "alpha = " << fmt(c.alpha) << '\n';
  os << "r_minus_plus = " << fmt(c.r_minus_plus) << '\n';
  os << "r_plus_minus = " << fmt(c.r_plus_minus) << '\n';
  os << "wells = " << to_string(c.wells) << '\n';
  if (c.ell) os << "ell = " << *c.ell << '\n';
  os << "# coupling\n";
  os << "delta = " << fmt(c.delta) << '\n';
  os << "a = " << fmt(c.a) << '\n';
  os << "b = " << fmt(c.b) << '\n';
  os << "coupling = " << (c.coupling == CouplingVariant::Logistic ? "logistic" : "indicator") << '\n';
  os << "# run\n";
  os << "s0 = " << c.s0 << '\n';
  os << "initial_eta_plus = " << c.initial_eta_plus << '\n';
  os << "initial_x = " << c.initial_x << '\n';
  os << "horizon = " << fmt(c.horizon) << '\n';
  os << "max_events = " << c.max_events << '\n';
  os << "grid_dt = " << fmt(c.grid_dt) << '\n';
  os << "event_cap = " << c.event_cap << '\n';
  os << "events_output = " << (c.compacted_output ? "compacted" : "full") << '\n';
  os << "seed = " << c.seed << '\n';
  os << "run_index = " << c.run_index << '\n';
  os << "discretize_dt = " << fmt(c.discretize_dt) << '\n';
  os << "zero_rule = " << to_string(c.zero_rule) << '\n';
  os << "# analysis thresholds\n";
  os << "cv_min = " << fmt(c.thresholds.cv_min) << '\n';
  os << "cv_max = " << fmt(c.thresholds.cv_max) << '\n';
  os << "ks_max = " << fmt(c.thresholds.ks_max) << '\n';
  os << "min_sojourns = " << c.thresholds.min_sojourns << '\n';
  os << "delta_fraction_max = " << fmt(c.thresholds.delta_fraction_max) << '\n';
  os << "rate_standard_errors = " << fmt(c.thresholds.rate_standard_errors) << '\n';
  return os.str();
}

}  // namespace metamarket
