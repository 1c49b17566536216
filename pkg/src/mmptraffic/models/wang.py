"""Wang model: companion-matrix chain with power-law train lengths.

``f_0 = 1 - a`` and ``f_k = a k^-(alpha+1) - a (k+1)^-(alpha+1)`` for
``k >= 1``, so the probability of a train of at least ``k`` packets is
``a k^-(alpha+1)``.  For ``alpha`` in (0, 1) the on/off series is long-range
dependent with ``H = 1 - alpha/2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .companion import CompanionChain
from .errors import InfeasibleParameters

_ZETA_TERMS = 100


def zeta(s: float, terms: int = _ZETA_TERMS) -> float:
    """Riemann zeta for real ``s > 1``.

    Sums the first ``terms - 1`` terms exactly and adds the Euler-Maclaurin
    tail through the sixth Bernoulli number.  Absolute error is below 1e-13
    for ``s`` in (1, 2] with the default number of terms.
    """
    if s <= 1:
        raise ValueError("zeta(s) requires s > 1")
    n = float(terms)
    k = np.arange(terms - 1, 0, -1, dtype=float)  # smallest terms first
    head = float(np.sum(k ** -s))
    tail = (n ** (1 - s) / (s - 1) + 0.5 * n ** -s
            + s * n ** (-s - 1) / 12
            - s * (s + 1) * (s + 2) * n ** (-s - 3) / 720
            + s * (s + 1) * (s + 2) * (s + 3) * (s + 4) * n ** (-s - 5) / 30240)
    return head + tail


@dataclass(frozen=True)
class WangParams(CompanionChain):
    a: float
    alpha: float

    def __post_init__(self):
        if not 0 < self.a < 1:
            raise ValueError(f"Wang model needs 0 < a < 1, got a={self.a}")
        if not self.alpha > 0:
            raise ValueError(f"Wang model needs alpha > 0, got alpha={self.alpha}")

    @classmethod
    def from_mean(cls, mu: float, alpha: float) -> "WangParams":
        return cls(wang_fit_a(mu, alpha), alpha)

    @classmethod
    def from_hurst(cls, hurst: float, mu: float) -> "WangParams":
        return cls.from_mean(mu, 2.0 - 2.0 * hurst)

    @property
    def hurst(self) -> float:
        return 1.0 - self.alpha / 2.0

    def transition_prob(self, k):
        return wang_transition_prob(self, k)

    def log_jump_tail(self, k: np.ndarray) -> np.ndarray:
        return np.log(self.a) - (self.alpha + 1.0) * np.log(k.astype(float))

    def mean(self) -> float:
        return wang_mean(self)

    def equilibrium(self, k):
        return wang_equilibrium(self, k)


def wang_transition_prob(p: WangParams, k):
    """``f_k``, the probability that state 0 jumps to state ``k``."""
    k_arr = np.asarray(k)
    if np.any(k_arr < 0):
        raise ValueError("k must be nonnegative")
    kf = np.maximum(k_arr, 1).astype(float)
    e = p.alpha + 1.0
    # a (k^-e - (k+1)^-e) written to avoid cancellation for large k
    pos = -p.a * kf ** -e * np.expm1(-e * np.log1p(1.0 / kf))
    out = np.where(k_arr == 0, 1.0 - p.a, pos)
    return float(out) if out.ndim == 0 else out


def wang_mean(p: WangParams) -> float:
    """Long-run fraction of on slots, ``1 - 1/(1 + a zeta(alpha + 1))``."""
    return 1.0 - 1.0 / (1.0 + p.a * zeta(p.alpha + 1.0))


def wang_fit_a(mu: float, alpha: float) -> float:
    """Value of ``a`` giving mean ``mu`` for the given ``alpha``.

    Raises :class:`InfeasibleParameters` when the required ``a`` is outside
    (0, 1), i.e. the requested mean cannot be reached with this ``alpha``.
    """
    if not 0 < mu < 1:
        raise ValueError(f"mean must lie in (0, 1), got {mu}")
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    a = mu / ((1.0 - mu) * zeta(alpha + 1.0))
    if not 0 < a < 1:
        raise InfeasibleParameters(
            f"mean {mu} needs a={a:.6g} for alpha={alpha}; a must lie in (0, 1)")
    return a


def wang_equilibrium(p: WangParams, k):
    """Stationary probability of state ``k``.

    ``pi_k = pi_0 * sum_{j >= k} f_j``, which telescopes to
    ``pi_0 a k^-(alpha+1)`` for ``k >= 1``.
    """
    k_arr = np.asarray(k)
    if np.any(k_arr < 0):
        raise ValueError("k must be nonnegative")
    pi0 = 1.0 - wang_mean(p)
    kf = np.maximum(k_arr, 1).astype(float)
    out = np.where(k_arr == 0, pi0, pi0 * p.a * kf ** -(p.alpha + 1.0))
    return float(out) if out.ndim == 0 else out
