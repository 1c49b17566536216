"""Arrowsmith/Barenco model: two-sided companion chain.

Off runs (gaps) and on runs (packet trains) have their own length laws
``f^L`` and ``f^R``.  Both are stored as finite histograms indexed by run
length, with index 0 unused.

Chain states are signed countdowns: ``-k`` is an off slot with ``k`` slots of
the current gap remaining (this one included), ``+k`` the same for a train.
"""
from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from ._sampling import sample_jumps

DEFAULT_MAX_SUPPORT = 10**6


def _as_pmf(hist, max_support: int) -> np.ndarray:
    if isinstance(hist, Mapping):
        if not hist:
            raise ValueError("empty run-length histogram")
        if min(hist) < 1:
            raise ValueError("run lengths must be positive integers")
        arr = np.zeros(max(hist) + 1)
        for length, weight in hist.items():
            arr[int(length)] += weight
    else:
        arr = np.asarray(hist, dtype=float).copy()
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError("histogram must be 1-D and indexed by run length")
        if arr[0] != 0:
            raise ValueError("histogram index 0 (length-0 runs) must be empty")
    if np.any(arr < 0):
        raise ValueError("histogram weights must be nonnegative")
    total = arr.sum()
    if total <= 0:
        raise ValueError("empty run-length histogram")
    arr = np.trim_zeros(arr, "b") / total
    if arr.size - 1 > max_support:
        raise ValueError(f"run lengths beyond max support {max_support}")
    return arr


def _log_tail_fn(pmf: np.ndarray):
    suffix = np.cumsum(pmf[::-1])[::-1]  # suffix[k] = P(X >= k)
    with np.errstate(divide="ignore"):
        log_suffix = np.log(np.append(suffix, 0.0))
    last = pmf.size

    def log_tail(k: np.ndarray) -> np.ndarray:
        return log_suffix[np.minimum(k, last)]

    return log_tail


@dataclass(frozen=True, eq=False)
class ArrowsmithBarencoParams:
    off_pmf: np.ndarray
    on_pmf: np.ndarray
    max_support: int = field(default=DEFAULT_MAX_SUPPORT)

    def __post_init__(self):
        for name in ("off_pmf", "on_pmf"):
            pmf = np.asarray(getattr(self, name), dtype=float)
            if pmf.ndim != 1 or pmf.size < 2 or pmf[0] != 0 or np.any(pmf < 0):
                raise ValueError(f"{name} must be a 1-D pmf over lengths 1.. with pmf[0] == 0")
            if abs(pmf.sum() - 1.0) > 1e-12:
                raise ValueError(f"{name} sums to {pmf.sum()!r}, not 1")
            if pmf.size - 1 > self.max_support:
                raise ValueError(f"{name} support exceeds max_support={self.max_support}")
            object.__setattr__(self, name, pmf)

    @classmethod
    def from_histograms(cls, train_lengths, gap_lengths,
                        max_support: int = DEFAULT_MAX_SUPPORT) -> "ArrowsmithBarencoParams":
        return ab_fit_from_empirical(train_lengths, gap_lengths, max_support)

    @classmethod
    def from_series(cls, series, max_support: int = DEFAULT_MAX_SUPPORT) -> "ArrowsmithBarencoParams":
        trains, gaps = run_lengths(series)
        if trains.size == 0 or gaps.size == 0:
            raise ValueError("series needs at least one on run and one off run")
        return ab_fit_from_empirical(np.bincount(trains), np.bincount(gaps), max_support)

    @property
    def mean_off(self) -> float:
        return float(np.arange(self.off_pmf.size) @ self.off_pmf)

    @property
    def mean_on(self) -> float:
        return float(np.arange(self.on_pmf.size) @ self.on_pmf)

    def mean(self) -> float:
        return ab_mean(self)

    def successors(self, state: int) -> dict[int, float]:
        """Next-state distribution of the signed-countdown chain."""
        if state == 0:
            raise ValueError("state 0 is not part of the two-sided chain")
        if state > 1:
            return {state - 1: 1.0}
        if state < -1:
            return {state + 1: 1.0}
        pmf, sign = (self.off_pmf, -1) if state == 1 else (self.on_pmf, 1)
        return {sign * int(k): float(pmf[k]) for k in np.flatnonzero(pmf)}

    def state_path(self, n: int, rng: np.random.Generator) -> np.ndarray:
        off_tail = _log_tail_fn(self.off_pmf)
        on_tail = _log_tail_fn(self.on_pmf)
        s_off, s_on = self.mean_off, self.mean_on
        start_on = rng.random() >= s_off / (s_off + s_on)
        runs, covered = [], 0
        while covered < n:
            m = int((n - covered) / (s_off + s_on) * 1.05) + 16
            off = np.minimum(sample_jumps(off_tail, m, rng), n)
            on = np.minimum(sample_jumps(on_tail, m, rng), n)
            pair = np.column_stack((on, off) if start_on else (off, on)).ravel()
            runs.append(pair)
            covered += int(pair.sum())
        full = np.concatenate(runs)
        stop = int(np.searchsorted(np.cumsum(full), n, side="left")) + 1
        full = full[:stop]
        lengths = full.copy()
        lengths[-1] -= int(lengths.sum()) - n
        sign = np.where((np.arange(stop) % 2 == 0) == start_on, 1, -1)
        starts = np.concatenate(([0], np.cumsum(lengths)[:-1]))
        run_of = np.repeat(np.arange(stop), lengths)
        remaining = full[run_of] - (np.arange(n) - starts[run_of])
        return sign[run_of] * remaining

    @staticmethod
    def emit(states: np.ndarray) -> np.ndarray:
        return (states > 0).astype(np.int8)


def run_lengths(series) -> tuple[np.ndarray, np.ndarray]:
    """Lengths of maximal runs of ones (trains) and zeros (gaps), in order."""
    x = np.asarray(series).astype(np.int8)
    if x.size == 0:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    change = np.flatnonzero(np.diff(x)) + 1
    bounds = np.concatenate(([0], change, [x.size]))
    lengths = np.diff(bounds)
    values = x[bounds[:-1]]
    return lengths[values == 1], lengths[values == 0]


def ab_mean(p: ArrowsmithBarencoParams) -> float:
    """Expected packets per slot, ``S_R / (S_R + S_L)``."""
    return p.mean_on / (p.mean_on + p.mean_off)


def ab_fit_from_empirical(train_lengths, gap_lengths,
                          max_support: int = DEFAULT_MAX_SUPPORT) -> ArrowsmithBarencoParams:
    """Model whose run-length laws are the normalised input histograms.

    Histograms are either ``{length: weight}`` mappings or arrays indexed by
    run length (``np.bincount`` output works directly).
    """
    return ArrowsmithBarencoParams(_as_pmf(gap_lengths, max_support),
                                   _as_pmf(train_lengths, max_support), max_support)


@dataclass(frozen=True)
class AcfAsymptote:
    """``rho(k) ~ K k^beta`` as printed for the two-sided model.

    ``K`` follows the printed three-case formula, whose ``(alpha - 1)``
    factor makes it negative for exponents in (0, 1); only ``beta`` is
    meaningful as a decay rate.
    """
    beta: float
    K: float
    case: str


def ab_acf_asymptote(alpha_l: float, alpha_r: float, k_l: float, k_r: float,
                     mu: float, s: float) -> AcfAsymptote:
    if not (0 < alpha_l < 1 and 0 < alpha_r < 1):
        raise ValueError("alpha_l and alpha_r must lie in (0, 1)")
    if not (k_l > 0 and k_r > 0):
        raise ValueError("k_l and k_r must be positive")
    if not (0 < mu < 1 and s > 0):
        raise ValueError("need 0 < mu < 1 and s > 0")
    beta = min(alpha_l, alpha_r)
    if alpha_r < alpha_l:
        K, case = k_r * (1 - mu) / (s * (alpha_r - 1) * mu), "right"
    elif alpha_l < alpha_r:
        K, case = k_l * mu / (s * (alpha_l - 1) * (1 - mu)), "left"
    else:
        K = k_r * (1 - mu) * k_l * mu / (mu * (1 - mu) * s * (alpha_l - 1))
        case = "equal"
        if not np.isfinite(K):
            raise ValueError("equal-exponent amplitude is not finite")
    return AcfAsymptote(beta, float(K), case)
