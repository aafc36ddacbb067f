#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "metamarket/coupled.hpp"
#include "metamarket/random.hpp"

namespace metamarket {

using Matrix = std::vector<std::vector<double>>;

/// Discrete-time hidden Markov model. Observations and hidden states are
/// handled as indices; the label vectors give their printed values.
struct HmmSpec {
  std::vector<int> hidden_labels;
  std::vector<int> obs_labels;
  Matrix transition;  // l x l, row-stochastic
  Matrix emission;    // l x k, row-stochastic
  std::vector<double> initial;

  std::size_t num_hidden() const noexcept { return hidden_labels.size(); }
  std::size_t num_obs() const noexcept { return obs_labels.size(); }

  /// Throws std::invalid_argument on shape errors, negative entries, rows
  /// not summing to 1 within 1e-12, or all-zero rows.
  void validate() const;
};

/// Three-regime example: hidden {-1, 0, +1}, stay with probability 0.8,
/// move to each other regime with 0.1; up-tick probability 0.45 / 0.5 / 0.55.
HmmSpec three_regime_spec();

/// Index of a label value; throws InputError if absent.
std::size_t label_index(const std::vector<int>& labels, int value);
std::vector<int> encode(std::span<const int> values, const std::vector<int>& labels);

struct HmmSample {
  std::vector<int> hidden;  // indices
  std::vector<int> obs;     // indices
};

HmmSample simulate_hmm(const HmmSpec& spec, std::size_t n, std::uint64_t seed);

/// S_0 followed by the running sums; entries must be -1 or +1.
std::vector<long long> accumulate(std::span<const int> increments, long long s0);

struct ForwardBackward {
  double log_likelihood = 0.0;
  bool zero_probability = false;
  std::size_t num_hidden = 0;
  std::vector<double> posteriors;  // n x l row-major

  double posterior(std::size_t t, std::size_t i) const { return posteriors[t * num_hidden + i]; }
};

/// Scaled recursions; the log-likelihood is the sum of log normalizers.
ForwardBackward forward_backward(const HmmSpec& spec, std::span<const int> obs);

struct HmmFit {
  HmmSpec estimate;
  std::vector<double> log_likelihood_trace;
  int iterations = 0;
  bool converged = false;
};

/// Expectation-maximization. Stops when the log-likelihood improves by less
/// than `tol` or after `max_iter` updates.
HmmFit baum_welch(std::span<const int> obs, const HmmSpec& init, int max_iter, double tol);

/// Most probable hidden path. Ties go to the lower state index.
std::vector<int> viterbi(const HmmSpec& spec, std::span<const int> obs);

/// Random row-stochastic spec for restarts.
HmmSpec random_spec(std::size_t num_hidden, const std::vector<int>& obs_labels, Rng& rng);

/// States reordered by increasing emission probability of `obs_index`.
HmmSpec sort_by_emission(const HmmSpec& spec, std::size_t obs_index);

struct RestartFit {
  HmmFit best;
  std::size_t best_restart = 0;
  std::vector<double> restart_log_likelihoods;
};

RestartFit fit_with_restarts(std::span<const int> obs, std::size_t num_hidden, const std::vector<int>& obs_labels,
                             int restarts, std::uint64_t seed, int max_iter, double tol);

enum class ZeroIncrementRule { Previous, Plus, Minus };

/// Sign of the price increment over [k dt, (k+1) dt) for k < floor(horizon/dt).
/// Under the Previous rule a zero increment repeats the previous symbol and
/// the first one becomes +1.
std::vector<int> discretize(const Trajectory& traj, double dt, ZeroIncrementRule rule = ZeroIncrementRule::Previous);

}  // namespace metamarket
