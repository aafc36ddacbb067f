#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "metamarket/checks.hpp"
#include "metamarket/config.hpp"
#include "metamarket/coupled.hpp"
#include "metamarket/errors.hpp"
#include "metamarket/hmm.hpp"
#include "metamarket/io.hpp"
#include "metamarket/market.hpp"
#include "metamarket/resolvent.hpp"
#include "metamarket/trajectory.hpp"

namespace py = pybind11;
namespace mm = metamarket;

namespace {

// Reports cross the boundary as plain dicts.
py::object loads(const std::string& text) { return py::module_::import("json").attr("loads")(text); }

mm::WellPreset preset(const std::string& name) { return mm::parse_well_preset(name); }

mm::CouplingVariant variant(const std::string& name) {
  if (name == "logistic") return mm::CouplingVariant::Logistic;
  if (name == "indicator") return mm::CouplingVariant::Indicator;
  throw mm::InputError("coupling must be logistic or indicator, got '" + name + "'");
}

std::vector<mm::MarketParams> ladder(const std::vector<int>& ns, double alpha, double r, const std::string& wells) {
  std::vector<mm::MarketParams> out;
  for (int n : ns) out.push_back(mm::MarketParams::make(n, alpha, r, r, mm::well_margin(n, preset(wells))));
  return out;
}

py::dict events_dict(const mm::Trajectory& traj) {
  std::vector<double> t;
  std::vector<int> eta, x;
  std::vector<std::string> kind;
  for (const auto& e : traj.events) {
    t.push_back(e.t);
    eta.push_back(e.eta_plus_after);
    x.push_back(e.x_after);
    kind.emplace_back(e.kind == mm::EventKind::MarketJump ? "M" : "O");
  }
  py::dict d;
  d["t"] = t;
  d["kind"] = kind;
  d["eta_plus"] = eta;
  d["x"] = x;
  return d;
}

}  // namespace

PYBIND11_MODULE(_metamarket, m) {
  m.doc() = "Metastable zero-range market: simulation, resolvent checks and HMM recovery.";

  py::register_exception<mm::InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<mm::IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<mm::NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<mm::EmptyTraceError>(m, "EmptyTraceError", PyExc_ValueError);

  m.def("rate_g", &mm::rate_g, py::arg("n"), py::arg("alpha"));
  m.def("speedup_theta", &mm::speedup_theta, py::arg("n"), py::arg("alpha"));
  m.def("well_margin", [](int n, const std::string& wells) { return mm::well_margin(n, preset(wells)); },
        py::arg("n"), py::arg("wells") = "paper");
  m.def("logistic", &mm::logistic);
  m.def("beta_integral", &mm::beta_integral, py::arg("alpha"));
  m.def(
      "reduced_chain",
      [](double alpha, double rmp, double rpm) {
        const auto c = mm::reduced_chain(alpha, rmp, rpm);
        return py::make_tuple(c.rate_minus_to_plus, c.rate_plus_to_minus);
      },
      py::arg("alpha"), py::arg("r_minus_plus"), py::arg("r_plus_minus"));
  m.def(
      "well_transition_rates",
      [](int n, double alpha, double r, const std::string& wells) {
        const auto c = mm::well_transition_rates(mm::MarketParams::make(n, alpha, r, r, mm::well_margin(n, preset(wells))));
        return py::make_tuple(c.rate_minus_to_plus, c.rate_plus_to_minus);
      },
      py::arg("n"), py::arg("alpha"), py::arg("r") = 0.1, py::arg("wells") = "theory");
  m.def(
      "stationary_weights",
      [](int n, double alpha, double rmp, double rpm) {
        return mm::stationary_weights(mm::MarketParams::make(n, alpha, rmp, rpm, 0));
      },
      py::arg("n"), py::arg("alpha"), py::arg("r_minus_plus") = 0.1, py::arg("r_plus_minus") = 0.1);

  m.def(
      "default_config", [] { return mm::serialize_config(mm::RunConfig{}); },
      "Canonical text of the default run configuration.");
  m.def(
      "normalize_config", [](const std::string& text) { return mm::serialize_config(mm::parse_config_string(text)); },
      py::arg("text"));

  m.def(
      "simulate",
      [](const std::string& config_text, std::optional<std::uint64_t> seed, bool with_report) {
        auto config = mm::parse_config_string(config_text);
        if (seed) config.seed = *seed;
        const auto params = config.market();
        const auto coupling = config.coupling_params();
        auto options = config.simulation_options();
        mm::Trajectory traj;
        {
          py::gil_scoped_release release;
          traj = mm::simulate(params, coupling, mm::MarketState{config.initial_eta_plus}, config.initial_x, options);
        }
        py::dict out;
        out["summary"] = loads(mm::to_json(mm::make_summary(traj, config.s0, traj.events.size())));
        out["events"] = events_dict(traj);
        out["grid_dt"] = traj.grid.dt;
        out["grid_eta_plus"] = traj.grid.eta_plus;
        const auto order = mm::order_path(traj, params);
        std::vector<py::tuple> segments;
        for (const auto& s : order.segments) segments.push_back(py::make_tuple(s.t_start, s.label));
        out["order_path"] = segments;
        out["observations"] = mm::discretize(traj, config.discretize_dt, config.zero_rule);
        if (with_report) out["report"] = loads(mm::to_json(mm::metastability_report(traj, params, config.thresholds)));
        return out;
      },
      py::arg("config") = "", py::arg("seed") = py::none(), py::arg("report") = true,
      "Simulate from config text (key = value lines); returns events, order path and summary.");

  m.def(
      "verify_condition_r",
      [](const std::vector<int>& ns, double lambda, std::array<double, 2> g, double alpha, double r,
         const std::string& wells, double target) {
        return loads(mm::to_json(mm::verify_condition_R(ladder(ns, alpha, r, wells), lambda, g, target)));
      },
      py::arg("ns") = std::vector<int>{100, 200, 400, 800}, py::arg("lam") = 1.0,
      py::arg("g") = std::array<double, 2>{0.0, 1.0}, py::arg("alpha") = 1.01, py::arg("r") = 0.1,
      py::arg("wells") = "theory", py::arg("target") = 0.05);
  m.def(
      "verify_joint_condition",
      [](const std::vector<int>& ns, double lambda, double delta, double a, double b, const std::string& coupling,
         double alpha, double r, const std::string& wells, double target) {
        const mm::JointFunction g{{{1.0, -1.0}, {-1.0, 1.0}}};
        const auto c = mm::CouplingParams::make(delta, a, b, variant(coupling));
        return loads(mm::to_json(mm::verify_joint_condition(ladder(ns, alpha, r, wells), c, lambda, g, target)));
      },
      py::arg("ns") = std::vector<int>{50, 100, 200}, py::arg("lam") = 1.0, py::arg("delta") = 5.0,
      py::arg("a") = -0.1000835, py::arg("b") = 0.2001669, py::arg("coupling") = "indicator", py::arg("alpha") = 1.01,
      py::arg("r") = 0.1, py::arg("wells") = "theory", py::arg("target") = 0.05,
      "Joint check with g(s, x) = s * x.");

  m.def("three_regime_spec", [] { return loads(mm::to_json(mm::three_regime_spec())); });
  m.def(
      "simulate_hmm",
      [](const std::string& spec_json, std::size_t n, std::uint64_t seed) {
        const auto spec = mm::hmm_spec_from_json(spec_json);
        const auto s = mm::simulate_hmm(spec, n, seed);
        std::vector<int> hidden, obs;
        for (int i : s.hidden) hidden.push_back(spec.hidden_labels[i]);
        for (int i : s.obs) obs.push_back(spec.obs_labels[i]);
        return py::make_tuple(hidden, obs);
      },
      py::arg("spec_json"), py::arg("n"), py::arg("seed") = 1, "Returns (hidden labels, observation labels).");
  m.def(
      "log_likelihood",
      [](const std::string& spec_json, const std::vector<int>& obs) {
        const auto spec = mm::hmm_spec_from_json(spec_json);
        return mm::forward_backward(spec, mm::encode(obs, spec.obs_labels)).log_likelihood;
      },
      py::arg("spec_json"), py::arg("obs"));
  m.def(
      "viterbi",
      [](const std::string& spec_json, const std::vector<int>& obs) {
        const auto spec = mm::hmm_spec_from_json(spec_json);
        std::vector<int> out;
        for (int i : mm::viterbi(spec, mm::encode(obs, spec.obs_labels))) out.push_back(spec.hidden_labels[i]);
        return out;
      },
      py::arg("spec_json"), py::arg("obs"));
  m.def(
      "fit_hmm",
      [](const std::vector<int>& obs, std::size_t states, int restarts, std::uint64_t seed, int max_iter, double tol) {
        std::vector<int> labels = obs;
        std::sort(labels.begin(), labels.end());
        labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
        const auto encoded = mm::encode(obs, labels);
        mm::RestartFit fit;
        {
          py::gil_scoped_release release;
          fit = mm::fit_with_restarts(encoded, states, labels, restarts, seed, max_iter, tol);
        }
        return loads(mm::to_json(fit));
      },
      py::arg("obs"), py::arg("states") = 2, py::arg("restarts") = 8, py::arg("seed") = 1, py::arg("max_iter") = 500,
      py::arg("tol") = 1e-8);
}
