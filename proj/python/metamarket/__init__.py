"""Python front end to the metamarket C++ core."""

import json

from ._metamarket import (
    EmptyTraceError,
    InputError,
    IoError,
    NumericalError,
    beta_integral,
    default_config,
    three_regime_spec,
    fit_hmm,
    logistic,
    normalize_config,
    rate_g,
    reduced_chain,
    simulate,
    speedup_theta,
    stationary_weights,
    verify_condition_r,
    verify_joint_condition,
    well_margin,
    well_transition_rates,
)
from . import _metamarket


def _spec_text(spec):
    return spec if isinstance(spec, str) else json.dumps(spec)


def simulate_hmm(spec, n, seed=1):
    return _metamarket.simulate_hmm(_spec_text(spec), n, seed)


def log_likelihood(spec, obs):
    return _metamarket.log_likelihood(_spec_text(spec), list(obs))


def viterbi(spec, obs):
    return _metamarket.viterbi(_spec_text(spec), list(obs))


__all__ = [
    "EmptyTraceError",
    "InputError",
    "IoError",
    "NumericalError",
    "beta_integral",
    "default_config",
    "three_regime_spec",
    "fit_hmm",
    "log_likelihood",
    "logistic",
    "normalize_config",
    "rate_g",
    "reduced_chain",
    "simulate",
    "simulate_hmm",
    "speedup_theta",
    "stationary_weights",
    "verify_condition_r",
    "verify_joint_condition",
    "viterbi",
    "well_margin",
    "well_transition_rates",
]
