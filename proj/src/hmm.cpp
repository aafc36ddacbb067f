#include "metamarket/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "metamarket/errors.hpp"

namespace metamarket {

namespace {

void check_rows(const Matrix& m, std::size_t rows, std::size_t cols, const char* name) {
  if (m.size() != rows) throw std::invalid_argument(std::string("hmm: ") + name + " has wrong row count");
  for (const auto& row : m) {
    if (row.size() != cols) throw std::invalid_argument(std::string("hmm: ") + name + " has wrong column count");
    double s = 0.0;
    for (double v : row) {
      if (!(v >= 0.0)) throw std::invalid_argument(std::string("hmm: ") + name + " has a negative entry");
      s += v;
    }
    if (s == 0.0) throw std::invalid_argument(std::string("hmm: ") + name + " has an all-zero row");
    if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument(std::string("hmm: ") + name + " row does not sum to 1");
  }
}

std::size_t draw(const std::vector<double>& probs, double u) {
  double c = 0.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    c += probs[i];
    if (u < c) return i;
  }
  return probs.size() - 1;
}

void normalize(std::vector<double>& row) {
  const double s = std::accumulate(row.begin(), row.end(), 0.0);
  for (double& v : row) v /= s;
}

// Sufficient statistics from one scaled forward-backward sweep.
struct Expectations {
  double log_likelihood = 0.0;
  bool zero_probability = false;
  std::vector<double> first;  // gamma_1
  Matrix transitions;         // sum_t xi_t(i, j)
  Matrix emissions;           // sum_{t: o_t = k} gamma_t(j)
  std::vector<double> posteriors;
};

Expectations sweep(const HmmSpec& spec, std::span<const int> obs, bool keep_posteriors) {
  const std::size_t l = spec.num_hidden();
  const std::size_t n = obs.size();
  Expectations ex;
  ex.first.assign(l, 0.0);
  ex.transitions.assign(l, std::vector<double>(l, 0.0));
  ex.emissions.assign(l, std::vector<double>(spec.num_obs(), 0.0));
  if (n == 0) return ex;

  for (int o : obs) {
    if (o < 0 || static_cast<std::size_t>(o) >= spec.num_obs()) throw InputError("hmm: observation index out of range");
  }

  std::vector<double> alpha(n * l);
  std::vector<double> scale(n);
  for (std::size_t t = 0; t < n; ++t) {
    double c = 0.0;
    for (std::size_t j = 0; j < l; ++j) {
      double prior = 0.0;
      if (t == 0) {
        prior = spec.initial[j];
      } else {
        for (std::size_t i = 0; i < l; ++i) prior += alpha[(t - 1) * l + i] * spec.transition[i][j];
      }
      const double v = prior * spec.emission[j][obs[t]];
      alpha[t * l + j] = v;
      c += v;
    }
    if (!(c > 0.0)) {
      ex.zero_probability = true;
      ex.log_likelihood = -std::numeric_limits<double>::infinity();
      return ex;
    }
    for (std::size_t j = 0; j < l; ++j) alpha[t * l + j] /= c;
    scale[t] = c;
    ex.log_likelihood += std::log(c);
  }

  if (keep_posteriors) ex.posteriors.assign(n * l, 0.0);
  std::vector<double> beta(l, 1.0), next(l);
  for (std::size_t t = n; t-- > 0;) {
    double norm = 0.0;
    std::vector<double> gamma(l);
    for (std::size_t i = 0; i < l; ++i) {
      gamma[i] = alpha[t * l + i] * beta[i];
      norm += gamma[i];
    }
    for (std::size_t i = 0; i < l; ++i) {
      gamma[i] /= norm;
      ex.emissions[i][obs[t]] += gamma[i];
      if (keep_posteriors) ex.posteriors[t * l + i] = gamma[i];
    }
    if (t == 0) {
      ex.first = gamma;
      break;
    }
    // xi_{t-1}(i, j) = alpha_{t-1}(i) P_ij b_j(o_t) beta_t(j) / c_t
    for (std::size_t i = 0; i < l; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < l; ++j) {
        const double w = spec.transition[i][j] * spec.emission[j][obs[t]] * beta[j] / scale[t];
        ex.transitions[i][j] += alpha[(t - 1) * l + i] * w;
        s += w;
      }
      next[i] = s;
    }
    std::swap(beta, next);
  }
  return ex;
}

}  // namespace

void HmmSpec::validate() const {
  const std::size_t l = num_hidden();
  const std::size_t k = num_obs();
  if (l == 0 || k == 0) throw std::invalid_argument("hmm: empty state space");
  check_rows(transition, l, l, "transition");
  check_rows(emission, l, k, "emission");
  check_rows(Matrix{initial}, 1, l, "initial");
}

HmmSpec three_regime_spec() {
  HmmSpec s;
  s.hidden_labels = {-1, 0, 1};
  s.obs_labels = {-1, 1};
  s.transition = {{0.8, 0.1, 0.1}, {0.1, 0.8, 0.1}, {0.1, 0.1, 0.8}};
  s.emission = {{0.55, 0.45}, {0.5, 0.5}, {0.45, 0.55}};
  s.initial = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  return s;
}

std::size_t label_index(const std::vector<int>& labels, int value) {
  const auto it = std::find(labels.begin(), labels.end(), value);
  if (it == labels.end()) throw InputError("unknown symbol " + std::to_string(value));
  return static_cast<std::size_t>(it - labels.begin());
}

std::vector<int> encode(std::span<const int> values, const std::vector<int>& labels) {
  std::vector<int> out;
  out.reserve(values.size());
  for (int v : values) out.push_back(static_cast<int>(label_index(labels, v)));
  return out;
}

HmmSample simulate_hmm(const HmmSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  HmmSample out;
  out.hidden.reserve(n);
  out.obs.reserve(n);
  Rng rng(seed, 0);
  std::size_t y = draw(spec.initial, rng.uniform());
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) y = draw(spec.transition[y], rng.uniform());
    out.hidden.push_back(static_cast<int>(y));
    out.obs.push_back(static_cast<int>(draw(spec.emission[y], rng.uniform())));
  }
  return out;
}

std::vector<long long> accumulate(std::span<const int> increments, long long s0) {
  std::vector<long long> out;
  out.reserve(increments.size() + 1);
  out.push_back(s0);
  for (int x : increments) {
    if (x != 1 && x != -1) throw InputError("accumulate: increments must be -1 or +1, got " + std::to_string(x));
    out.push_back(out.back() + x);
  }
  return out;
}

ForwardBackward forward_backward(const HmmSpec& spec, std::span<const int> obs) {
  spec.validate();
  auto ex = sweep(spec, obs, true);
  ForwardBackward fb;
  fb.log_likelihood = ex.log_likelihood;
  fb.zero_probability = ex.zero_probability;
  fb.num_hidden = spec.num_hidden();
  fb.posteriors = std::move(ex.posteriors);
  return fb;
}

HmmFit baum_welch(std::span<const int> obs, const HmmSpec& init, int max_iter, double tol) {
  init.validate();
  if (max_iter < 1) throw std::invalid_argument("baum_welch: max_iter must be >= 1");
  if (obs.empty()) throw std::invalid_argument("baum_welch: empty observation sequence");
  HmmFit fit;
  fit.estimate = init;
  const std::size_t l = init.num_hidden();
  for (int it = 0;; ++it) {
    const auto ex = sweep(fit.estimate, obs, false);
    if (ex.zero_probability) throw InputError("baum_welch: observations have zero probability under the model");
    fit.log_likelihood_trace.push_back(ex.log_likelihood);
    if (it > 0 && ex.log_likelihood - fit.log_likelihood_trace[it - 1] < tol) {
      fit.converged = true;
      break;
    }
    if (it == max_iter) break;

    HmmSpec next = fit.estimate;
    next.initial = ex.first;
    normalize(next.initial);
    for (std::size_t i = 0; i < l; ++i) {
      const double from = std::accumulate(ex.transitions[i].begin(), ex.transitions[i].end(), 0.0);
      if (from > 0.0) {
        next.transition[i] = ex.transitions[i];
        normalize(next.transition[i]);
      }
      const double occupancy = std::accumulate(ex.emissions[i].begin(), ex.emissions[i].end(), 0.0);
      if (occupancy > 0.0) {
        next.emission[i] = ex.emissions[i];
        normalize(next.emission[i]);
      }
    }
    fit.estimate = std::move(next);
    fit.iterations = it + 1;
  }
  return fit;
}

std::vector<int> viterbi(const HmmSpec& spec, std::span<const int> obs) {
  spec.validate();
  const std::size_t l = spec.num_hidden();
  const std::size_t n = obs.size();
  if (n == 0) return {};
  auto lg = [](double p) { return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity(); };
  for (int o : obs) {
    if (o < 0 || static_cast<std::size_t>(o) >= spec.num_obs()) throw InputError("viterbi: observation index out of range");
  }
  Matrix log_p(l, std::vector<double>(l));
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t j = 0; j < l; ++j) log_p[i][j] = lg(spec.transition[i][j]);

  std::vector<double> score(l), next(l);
  std::vector<int> back(n * l, 0);
  for (std::size_t j = 0; j < l; ++j) score[j] = lg(spec.initial[j]) + lg(spec.emission[j][obs[0]]);
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t j = 0; j < l; ++j) {
      std::size_t best = 0;
      double best_score = score[0] + log_p[0][j];
      for (std::size_t i = 1; i < l; ++i) {
        const double s = score[i] + log_p[i][j];
        if (s > best_score) {
          best_score = s;
          best = i;
        }
      }
      next[j] = best_score + lg(spec.emission[j][obs[t]]);
      back[t * l + j] = static_cast<int>(best);
    }
    std::swap(score, next);
  }
  std::vector<int> path(n);
  std::size_t last = 0;
  for (std::size_t j = 1; j < l; ++j) {
    if (score[j] > score[last]) last = j;
  }
  path[n - 1] = static_cast<int>(last);
  for (std::size_t t = n - 1; t > 0; --t) path[t - 1] = back[t * l + path[t]];
  return path;
}

HmmSpec random_spec(std::size_t num_hidden, const std::vector<int>& obs_labels, Rng& rng) {
  auto row = [&](std::size_t k) {
    std::vector<double> r(k);
    for (double& v : r) v = rng.exponential(1.0) + 1e-3;
    normalize(r);
    return r;
  };
  HmmSpec s;
  s.hidden_labels.resize(num_hidden);
  std::iota(s.hidden_labels.begin(), s.hidden_labels.end(), 0);
  s.obs_labels = obs_labels;
  for (std::size_t i = 0; i < num_hidden; ++i) {
    s.transition.push_back(row(num_hidden));
    s.emission.push_back(row(obs_labels.size()));
  }
  s.initial = row(num_hidden);
  return s;
}

HmmSpec sort_by_emission(const HmmSpec& spec, std::size_t obs_index) {
  const std::size_t l = spec.num_hidden();
  std::vector<std::size_t> order(l);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return spec.emission[a][obs_index] < spec.emission[b][obs_index];
  });
  HmmSpec out = spec;
  for (std::size_t i = 0; i < l; ++i) {
    out.hidden_labels[i] = spec.hidden_labels[order[i]];
    out.emission[i] = spec.emission[order[i]];
    out.initial[i] = spec.initial[order[i]];
    for (std::size_t j = 0; j < l; ++j) out.transition[i][j] = spec.transition[order[i]][order[j]];
  }
  return out;
}

RestartFit fit_with_restarts(std::span<const int> obs, std::size_t num_hidden, const std::vector<int>& obs_labels,
                             int restarts, std::uint64_t seed, int max_iter, double tol) {
  if (restarts < 1) throw std::invalid_argument("fit_with_restarts: need at least one restart");
  RestartFit out;
  for (int r = 0; r < restarts; ++r) {
    Rng rng(seed, static_cast<std::uint64_t>(r));
    auto fit = baum_welch(obs, random_spec(num_hidden, obs_labels, rng), max_iter, tol);
    const double ll = fit.log_likelihood_trace.back();
    out.restart_log_likelihoods.push_back(ll);
    if (r == 0 || ll > out.best.log_likelihood_trace.back()) {
      out.best = std::move(fit);
      out.best_restart = static_cast<std::size_t>(r);
    }
  }
  return out;
}

std::vector<int> discretize(const Trajectory& traj, double dt, ZeroIncrementRule rule) {
  if (!(dt > 0.0)) throw std::invalid_argument("discretize: dt must be positive");
  const auto bins = static_cast<std::size_t>(std::floor(traj.horizon / dt));
  std::vector<long long> sums(bins, 0);
  for (const Event& e : traj.events) {
    if (e.kind != EventKind::ObservableRing) continue;
    const auto k = static_cast<std::size_t>(std::floor(e.t / dt));
    if (k < bins) sums[k] += e.x_after;
  }
  std::vector<int> out(bins);
  int previous = 1;
  for (std::size_t k = 0; k < bins; ++k) {
    if (sums[k] > 0) {
      out[k] = 1;
    } else if (sums[k] < 0) {
      out[k] = -1;
    } else {
      out[k] = rule == ZeroIncrementRule::Previous ? previous : rule == ZeroIncrementRule::Plus ? 1 : -1;
    }
    previous = out[k];
  }
  return out;
}

}  // namespace metamarket
