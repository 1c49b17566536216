"""On/off traffic sources.

Every source produces a binary series, one symbol per time slot (1 = a
packet is sent in that slot).  Markov-modulated sources also expose their
underlying chain path through :func:`generate_states`.
"""
from __future__ import annotations

import os

import numpy as np

from ._sampling import make_rng, spawn_seeds
from .arrowsmith import (AcfAsymptote, ArrowsmithBarencoParams, ab_acf_asymptote,
                         ab_fit_from_empirical, ab_mean, run_lengths)
from .baselines import (BernoulliParams, FgnParams, bernoulli_generate, fgn,
                        fgn_autocovariance, fgn_onoff_generate)
from .cleggdodson import CleggDodsonParams, cd_equilibrium_tail, cd_threshold, cd_transition_prob
from .errors import InfeasibleParameters
from .psst import PsstParams, psst_equilibrium, psst_fit_q, psst_mean
from .wang import WangParams, wang_equilibrium, wang_fit_a, wang_mean, wang_transition_prob, zeta

#: Slots discarded from the start of every Markov-chain path.
DEFAULT_WARMUP = 10_000

CHAIN_MODELS = (WangParams, CleggDodsonParams, PsstParams, ArrowsmithBarencoParams)


def generate_states(model, n: int, seed, warmup: int = DEFAULT_WARMUP) -> np.ndarray:
    """Chain path of ``n`` slots after ``warmup`` slots started in state 0."""
    if not isinstance(model, CHAIN_MODELS):
        raise TypeError(f"{type(model).__name__} has no underlying Markov chain")
    if n < 1:
        raise ValueError("n must be at least 1")
    states = model.state_path(warmup + n, make_rng(seed))
    return states[warmup:]


def generate(model, n: int, seed, warmup: int = DEFAULT_WARMUP) -> np.ndarray:
    """Binary on/off series of length ``n`` (int8 array of 0/1).

    A pure function of ``(model, n, seed, warmup)``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if isinstance(model, BernoulliParams):
        return bernoulli_generate(model, n, seed)
    if isinstance(model, FgnParams):
        return fgn_onoff_generate(model, n, seed)
    return model.emit(generate_states(model, n, seed, warmup))


def write_series(series, path: str | os.PathLike) -> None:
    """Write a series as a newline-free string of '0'/'1' characters."""
    x = np.asarray(series, dtype=np.uint8)
    if x.size and x.max() > 1:
        raise ValueError("series must contain only 0 and 1")
    with open(path, "wb") as fh:
        fh.write((x + ord("0")).tobytes())


def read_series(path: str | os.PathLike) -> np.ndarray:
    raw = np.frombuffer(open(path, "rb").read().strip(), dtype=np.uint8)
    x = raw - ord("0")
    if x.size and x.max() > 1:
        raise ValueError(f"{path}: series file may only contain '0' and '1'")
    return x.astype(np.int8)


__all__ = [
    "AcfAsymptote", "ArrowsmithBarencoParams", "BernoulliParams", "CleggDodsonParams",
    "DEFAULT_WARMUP", "FgnParams", "InfeasibleParameters", "PsstParams", "WangParams",
    "ab_acf_asymptote", "ab_fit_from_empirical", "ab_mean", "bernoulli_generate",
    "cd_equilibrium_tail", "cd_threshold", "cd_transition_prob", "fgn",
    "fgn_autocovariance", "fgn_onoff_generate", "generate", "generate_states",
    "make_rng", "psst_equilibrium", "psst_fit_q", "psst_mean", "read_series",
    "run_lengths", "spawn_seeds", "wang_equilibrium", "wang_fit_a", "wang_mean",
    "wang_transition_prob", "write_series", "zeta",
]
