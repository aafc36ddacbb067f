// metamarket: simulate the coupled market, analyze runs, verify the
// resolvent criterion and fit hidden Markov models.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "metamarket/checks.hpp"
#include "metamarket/config.hpp"
#include "metamarket/errors.hpp"
#include "metamarket/hmm.hpp"
#include "metamarket/io.hpp"
#include "metamarket/resolvent.hpp"
#include "metamarket/svg.hpp"

namespace mm = metamarket;

namespace {

enum Exit { kOk = 0, kInput = 2, kIo = 3, kNumerical = 4 };

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    mm::write_file(path, text);
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw mm::InputError("bad number '" + item + "' in list '" + text + "'");
    }
  }
  if (out.empty()) throw mm::InputError("empty list");
  return out;
}

mm::Trajectory load_trajectory(const std::string& prefix, mm::RunSummary* summary_out = nullptr) {
  const auto summary = mm::summary_from_json(mm::read_file(prefix + ".summary.json"));
  std::istringstream events(mm::read_file(prefix + ".events.csv"));
  mm::Trajectory traj;
  traj.market = summary.market;
  traj.coupling = summary.coupling;
  traj.seed = summary.seed;
  traj.run_index = summary.run_index;
  traj.initial_state = mm::MarketState{summary.initial_eta_plus};
  traj.initial_x = summary.initial_x;
  traj.horizon = summary.horizon;
  traj.events = mm::read_event_csv(events);
  traj.compacted = summary.compacted;
  traj.market_jumps = summary.market_jumps;
  traj.observable_rings = summary.observable_rings;
  for (const auto& e : traj.events) {
    if (e.eta_plus_after < 0 || e.eta_plus_after > traj.market.n) throw mm::InputError("event state out of range");
    if (e.t > traj.horizon) throw mm::InputError("event after the horizon");
  }
  if (summary_out) *summary_out = summary;
  return traj;
}

// --- simulate -------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int cmd_simulate(const SimulateArgs& args) {
  mm::RunConfig config = args.config.empty() ? mm::RunConfig{} : mm::load_config(args.config);
  if (args.seed_set) config.seed = args.seed;
  const auto market = config.market();
  const auto coupling = config.coupling_params();
  auto options = config.simulation_options();

  std::ofstream events(args.out + ".events.csv", std::ios::binary);
  if (!events) throw mm::IoError("cannot open '" + args.out + ".events.csv' for writing");
  std::vector<char> buffer(1 << 20);
  events.rdbuf()->pubsetbuf(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  mm::write_event_csv_header(events);

  std::uint64_t written = 0;
  mm::WellLabel label = mm::classify(config.initial_eta_plus, market);
  const bool compact = config.compacted_output;
  options.sink = [&](const mm::Event& e) {
    if (compact && e.kind == mm::EventKind::MarketJump) {
      const auto next = mm::classify(e.eta_plus_after, market);
      if (next == label) return;
      label = next;
    }
    mm::write_event_csv_row(events, e);
    ++written;
  };

  const auto start = std::chrono::steady_clock::now();
  const auto traj = mm::simulate(market, coupling, mm::MarketState{config.initial_eta_plus}, config.initial_x, options);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  events.flush();
  if (!events) throw mm::IoError("write to '" + args.out + ".events.csv' failed");
  events.close();

  // Compacted event files keep every ring and every label change.
  auto summary = mm::make_summary(traj, config.s0, written);
  summary.compacted = compact || traj.compacted;

  std::ostringstream grid;
  mm::write_grid_csv(grid, mm::grid_rows(traj, config.s0));
  mm::write_file(args.out + ".grid.csv", grid.str());
  mm::write_file(args.out + ".summary.json", mm::to_json(summary) + "\n");
  // Wall-clock time lives in its own file so the summary stays reproducible.
  nlohmann::json timing = {{"runtime_seconds", seconds},
                           {"events_per_second", seconds > 0 ? (traj.market_jumps + traj.observable_rings) / seconds : 0.0}};
  mm::write_file(args.out + ".timing.json", timing.dump(2) + "\n");
  std::cerr << "simulated " << traj.market_jumps << " market jumps and " << traj.observable_rings << " rings in "
            << seconds << " s\n";
  return kOk;
}

// --- analyze --------------------------------------------------------------

std::string text_summary(const mm::MetastabilityReport& r) {
  std::ostringstream os;
  os.precision(6);
  auto rate = [&](const char* name, const mm::RateEstimate& e) {
    os << name << ": " << e.rate << " +- " << e.standard_error << " per day (" << e.count << " sojourns)\n";
  };
  os << "time fraction outside the wells: " << r.delta_fraction << " (" << mm::to_string(r.delta_verdict) << ")\n";
  os << "sojourns in WellMinus: n=" << r.minus.count << " mean=" << r.minus.mean << " cv=" << r.minus.cv
     << " ks=" << r.minus.ks << " (" << mm::to_string(r.minus.verdict) << ")\n";
  os << "sojourns in WellPlus: n=" << r.plus.count << " mean=" << r.plus.mean << " cv=" << r.plus.cv
     << " ks=" << r.plus.ks << " (" << mm::to_string(r.plus.verdict) << ")\n";
  rate("rate WellMinus -> WellPlus", r.rates.minus_to_plus);
  rate("rate WellPlus -> WellMinus", r.rates.plus_to_minus);
  os << "reduced chain rates: " << r.theoretical.rate_minus_to_plus << ", " << r.theoretical.rate_plus_to_minus
     << (r.rates_within_band ? " (within band)\n" : " (outside band)\n");
  if (r.finite_n) {
    os << "exact finite-N trace rates: " << r.finite_n->rate_minus_to_plus << ", " << r.finite_n->rate_plus_to_minus
       << '\n';
  }
  os << "crossings: " << r.crossings.crossings << " mean duration " << r.crossings.mean_crossing_time << " days\n";
  os << "mean price increment: WellMinus " << r.drift.mean_minus << ", WellPlus " << r.drift.mean_plus << '\n';
  os << "verdict: " << mm::to_string(r.metastable_verdict) << '\n';
  return os.str();
}

struct AnalyzeArgs {
  std::string traj;
  std::string out;
  std::string config;
  bool finite_n = false;
};

int cmd_analyze(const AnalyzeArgs& args) {
  const auto traj = load_trajectory(args.traj);
  mm::Thresholds thresholds;
  if (!args.config.empty()) thresholds = mm::load_config(args.config).thresholds;
  const auto report = mm::metastability_report(traj, traj.market, thresholds, args.finite_n);
  const std::string prefix = args.out.empty() ? args.traj : args.out;
  mm::write_file(prefix + ".report.json", mm::to_json(report) + "\n");
  const auto text = text_summary(report);
  mm::write_file(prefix + ".report.txt", text);
  std::cout << text;
  return kOk;
}

// --- verify-resolvent -----------------------------------------------------

struct ResolventArgs {
  double alpha = 1.01;
  double r = 0.1;
  double lambda = 1.0;
  std::string g;
  std::string n_list;
  std::string wells = "theory";
  bool joint = false;
  double delta = 5.0;
  double a = -0.1000835;
  double b = 0.2001669;
  double target = 0.05;
  std::string out;
};

int cmd_verify_resolvent(const ResolventArgs& args) {
  const auto preset = mm::parse_well_preset(args.wells);
  const auto ns = parse_list(args.n_list.empty() ? (args.joint ? "50,100,200" : "100,200,400,800") : args.n_list);
  std::vector<mm::MarketParams> ladder;
  for (double n : ns) {
    if (n != std::floor(n) || n < 3) throw mm::InputError("N values must be integers >= 3");
    const int k = static_cast<int>(n);
    ladder.push_back(mm::MarketParams::make(k, args.alpha, args.r, args.r, mm::well_margin(k, preset)));
  }
  if (!(args.lambda > 0.0)) throw mm::InputError("lambda must be positive");
  if (args.joint) {
    const auto g = parse_list(args.g.empty() ? "1,-1,-1,1" : args.g);
    if (g.size() != 4) throw mm::InputError("--g needs 4 values for --joint: g(-1,-1), g(-1,+1), g(+1,-1), g(+1,+1)");
    const mm::JointFunction gf{{{g[0], g[1]}, {g[2], g[3]}}};
    const auto coupling = mm::CouplingParams::make(args.delta, args.a, args.b, mm::CouplingVariant::Indicator);
    const auto report = mm::verify_joint_condition(ladder, coupling, args.lambda, gf, args.target);
    emit(args.out, mm::to_json(report));
  } else {
    const auto g = parse_list(args.g.empty() ? "0,1" : args.g);
    if (g.size() != 2) throw mm::InputError("--g needs 2 values: g(-1), g(+1)");
    const auto report = mm::verify_condition_R(ladder, args.lambda, {g[0], g[1]}, args.target);
    emit(args.out, mm::to_json(report));
  }
  return kOk;
}

// --- demo-hmm -------------------------------------------------------------

struct DemoArgs {
  long long steps = 100000;
  std::uint64_t seed = 1;
  long long s0 = 0;
  std::string out;
};

int cmd_demo_hmm(const DemoArgs& args) {
  if (args.steps < 1) throw mm::InputError("--steps must be >= 1");
  const auto spec = mm::three_regime_spec();
  const auto sample = mm::simulate_hmm(spec, static_cast<std::size_t>(args.steps), args.seed);
  std::vector<int> increments;
  increments.reserve(sample.obs.size());
  for (int o : sample.obs) increments.push_back(spec.obs_labels[o]);
  const auto prices = mm::accumulate(increments, args.s0);

  std::string csv = "n,y,x,s\n";
  csv += "0,,," + std::to_string(args.s0) + "\n";
  for (std::size_t i = 0; i < sample.obs.size(); ++i) {
    csv += std::to_string(i + 1) + "," + std::to_string(spec.hidden_labels[sample.hidden[i]]) + "," +
           std::to_string(increments[i]) + "," + std::to_string(prices[i + 1]) + "\n";
  }
  mm::write_file(args.out + ".csv", csv);
  mm::write_file(args.out + ".svg", mm::render_hmm_figure(prices, sample.hidden, spec.hidden_labels));

  std::size_t stays = 0, up_plus = 0, in_plus = 0;
  long long drift_plus = 0;
  const std::size_t plus = mm::label_index(spec.hidden_labels, 1);
  for (std::size_t i = 0; i < sample.hidden.size(); ++i) {
    if (i > 0 && sample.hidden[i] == sample.hidden[i - 1]) ++stays;
    if (static_cast<std::size_t>(sample.hidden[i]) == plus) {
      ++in_plus;
      if (increments[i] == 1) ++up_plus;
      drift_plus += increments[i];
    }
  }
  const double pairs = static_cast<double>(sample.hidden.size() - 1);
  nlohmann::json stats = {
      {"steps", args.steps},
      {"seed", args.seed},
      {"stay_probability", pairs > 0 ? stays / pairs : 0.0},
      {"p_up_given_plus", in_plus ? static_cast<double>(up_plus) / in_plus : 0.0},
      {"drift_given_plus", in_plus ? static_cast<double>(drift_plus) / in_plus : 0.0},
      {"final_price", prices.back()},
  };
  mm::write_file(args.out + ".json", stats.dump(2) + "\n");
  std::cout << stats.dump(2) << '\n';
  return kOk;
}

// --- export-figure --------------------------------------------------------

int cmd_export_figure(const std::string& traj, const std::string& out) {
  std::istringstream grid(mm::read_file(traj + ".grid.csv"));
  mm::write_file(out, mm::render_market_figure(mm::read_grid_csv(grid)));
  return kOk;
}

// --- discretize -----------------------------------------------------------

int cmd_discretize(const std::string& prefix, double dt, const std::string& rule, const std::string& out) {
  if (!(dt > 0.0)) throw mm::InputError("--dt must be positive");
  const auto traj = load_trajectory(prefix);
  const auto symbols = mm::discretize(traj, dt, mm::parse_zero_rule(rule));
  std::string text;
  for (int s : symbols) text += s > 0 ? "1\n" : "-1\n";
  emit(out, text);
  return kOk;
}

// --- hmm-fit --------------------------------------------------------------

struct FitArgs {
  std::string obs;
  int states = 2;
  std::uint64_t seed = 1;
  int restarts = 8;
  int max_iter = 1000;
  double tol = 1e-8;
  std::string out;
};

int cmd_hmm_fit(const FitArgs& args) {
  std::istringstream in(mm::read_file(args.obs));
  const auto values = mm::read_observations(in);
  if (values.empty()) throw mm::InputError("observation file '" + args.obs + "' has no symbols");
  if (args.states < 1) throw mm::InputError("--states must be >= 1");
  if (args.restarts < 1) throw mm::InputError("--restarts must be >= 1");
  std::vector<int> labels(values.begin(), values.end());
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  if (labels.size() == 1) labels = labels[0] == 1 || labels[0] == -1 ? std::vector<int>{-1, 1} : labels;
  const auto obs = mm::encode(values, labels);
  auto fit = mm::fit_with_restarts(obs, static_cast<std::size_t>(args.states), labels, args.restarts, args.seed,
                                   args.max_iter, args.tol);
  const auto up = std::find(labels.begin(), labels.end(), 1);
  if (up != labels.end()) {
    fit.best.estimate = mm::sort_by_emission(fit.best.estimate, static_cast<std::size_t>(up - labels.begin()));
  }
  emit(args.out, mm::to_json(fit));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metastable market simulation, verification and regime inference"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate the coupled market and price process");
  simulate->add_option("-c,--config", sim.config, "Config file (key = value lines)");
  simulate->add_option("--out", sim.out, "Output prefix")->required();
  auto* seed_opt = simulate->add_option("--seed", sim.seed, "Master seed (overrides the config)");

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Metastability report for a simulated run");
  analyze->add_option("--traj", an.traj, "Prefix given to simulate")->required();
  analyze->add_option("--out", an.out, "Report prefix (default: the trajectory prefix)");
  analyze->add_option("-c,--config", an.config, "Config file supplying the thresholds");
  analyze->add_flag("--finite-n", an.finite_n, "Also report exact finite-N trace rates");

  ResolventArgs rv;
  auto* verify = app.add_subcommand("verify-resolvent", "Check the resolvent criterion along a ladder of N");
  verify->add_option("--alpha", rv.alpha, "Rate exponent")->capture_default_str();
  verify->add_option("--r", rv.r, "Symmetric jump rate")->capture_default_str();
  verify->add_option("--lambda", rv.lambda, "Resolvent parameter")->capture_default_str();
  verify->add_option("--g", rv.g, "Well values g(-1),g(+1); with --joint g(s,x) for (s,x) in lexicographic order");
  verify->add_option("--N", rv.n_list, "Comma-separated system sizes");
  verify->add_option("--wells", rv.wells, "Well preset: paper or theory")->capture_default_str();
  verify->add_flag("--joint", rv.joint, "Joint market/price resolvent with indicator coupling");
  verify->add_option("--delta", rv.delta, "Observable clock rate (--joint)")->capture_default_str();
  verify->add_option("--a", rv.a, "Logistic intercept (--joint)")->capture_default_str();
  verify->add_option("--b", rv.b, "Logistic slope (--joint)")->capture_default_str();
  verify->add_option("--target", rv.target, "Final deviation target")->capture_default_str();
  verify->add_option("--out", rv.out, "JSON output file (default: stdout)");

  DemoArgs demo;
  auto* demo_hmm = app.add_subcommand("demo-hmm", "Simulate the three-regime example HMM");
  demo_hmm->add_option("--steps", demo.steps, "Number of steps")->capture_default_str();
  demo_hmm->add_option("--seed", demo.seed, "Seed")->capture_default_str();
  demo_hmm->add_option("--s0", demo.s0, "Initial price")->capture_default_str();
  demo_hmm->add_option("--out", demo.out, "Output prefix (.csv, .svg, .json)")->required();

  std::string fig_traj, fig_out;
  auto* figure = app.add_subcommand("export-figure", "Two-panel SVG from a simulated grid");
  figure->add_option("--traj", fig_traj, "Prefix given to simulate")->required();
  figure->add_option("--out", fig_out, "SVG file")->required();

  std::string disc_traj, disc_rule = "previous", disc_out;
  double disc_dt = 1.0;
  auto* disc = app.add_subcommand("discretize", "Price-increment signs per time bin, one per line");
  disc->add_option("--traj", disc_traj, "Prefix given to simulate")->required();
  disc->add_option("--dt", disc_dt, "Bin width in days")->capture_default_str();
  disc->add_option("--rule", disc_rule, "Zero-increment rule: previous, plus or minus")->capture_default_str();
  disc->add_option("--out", disc_out, "Output file (default: stdout)");

  FitArgs fit;
  auto* hmm_fit = app.add_subcommand("hmm-fit", "Baum-Welch with random restarts");
  hmm_fit->add_option("--obs", fit.obs, "Observation file, one symbol per line")->required();
  hmm_fit->add_option("--states", fit.states, "Number of hidden states")->capture_default_str();
  hmm_fit->add_option("--seed", fit.seed, "Seed for the restarts")->capture_default_str();
  hmm_fit->add_option("--restarts", fit.restarts, "Number of random restarts")->capture_default_str();
  hmm_fit->add_option("--max-iter", fit.max_iter, "EM iteration cap")->capture_default_str();
  hmm_fit->add_option("--tol", fit.tol, "Log-likelihood improvement threshold")->capture_default_str();
  hmm_fit->add_option("--out", fit.out, "JSON output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInput;
  }

  try {
    if (*simulate) {
      sim.seed_set = seed_opt->count() > 0;
      return cmd_simulate(sim);
    }
    if (*analyze) return cmd_analyze(an);
    if (*verify) return cmd_verify_resolvent(rv);
    if (*demo_hmm) return cmd_demo_hmm(demo);
    if (*figure) return cmd_export_figure(fig_traj, fig_out);
    if (*disc) return cmd_discretize(disc_traj, disc_dt, disc_rule, disc_out);
    if (*hmm_fit) return cmd_hmm_fit(fit);
  } catch (const mm::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  } catch (const mm::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const mm::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << " (condition estimate " << e.condition_estimate() << ")\n";
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kOk;
}
