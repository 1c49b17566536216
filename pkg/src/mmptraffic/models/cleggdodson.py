"""Clegg/Dodson model: Wang topology, jump law chosen so that the
stationary tail ``sum_{i >= k} pi_i`` is exactly ``(1 - pi_0) k^-alpha``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .companion import CompanionChain


def cd_threshold(alpha: float) -> float:
    """Smallest admissible ``pi_0`` (exclusive) for a given ``alpha``."""
    return (2.0 ** alpha - 1.0) / (2.0 ** (alpha + 1.0) - 1.0)


@dataclass(frozen=True)
class CleggDodsonParams(CompanionChain):
    pi0: float
    alpha: float

    def __post_init__(self):
        if not 0 < self.pi0 < 1:
            raise ValueError(f"pi0 must lie in (0, 1), got {self.pi0}")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.pi0 > cd_threshold(self.alpha):
            raise ValueError(
                f"pi0={self.pi0} does not give a valid Markov chain for "
                f"alpha={self.alpha}: need pi0 > {cd_threshold(self.alpha):.6g}")

    @classmethod
    def from_hurst(cls, hurst: float, mu: float) -> "CleggDodsonParams":
        return cls(1.0 - mu, 2.0 - 2.0 * hurst)

    @property
    def hurst(self) -> float:
        return 1.0 - self.alpha / 2.0

    @property
    def _ratio(self) -> float:
        return (1.0 - self.pi0) / self.pi0

    def log_jump_tail(self, k: np.ndarray) -> np.ndarray:
        # P(J >= k) = c (k^-alpha - (k+1)^-alpha) for k >= 1
        kf = k.astype(float)
        return (np.log(self._ratio) - self.alpha * np.log(kf)
                + np.log(-np.expm1(-self.alpha * np.log1p(1.0 / kf))))

    def transition_prob(self, k):
        return cd_transition_prob(self, k)

    def mean(self) -> float:
        return 1.0 - self.pi0

    def equilibrium(self, k):
        k_arr = np.asarray(k)
        kf = np.maximum(k_arr, 1).astype(float)
        pos = -(1.0 - self.pi0) * kf ** -self.alpha * np.expm1(-self.alpha * np.log1p(1.0 / kf))
        out = np.where(k_arr == 0, self.pi0, pos)
        return float(out) if out.ndim == 0 else out


def cd_transition_prob(p: CleggDodsonParams, k):
    k_arr = np.asarray(k)
    if np.any(k_arr < 0):
        raise ValueError("k must be nonnegative")
    kk = np.maximum(k_arr, 1).astype(np.int64)
    lt = p.log_jump_tail(kk)
    # f_k = T(k) - T(k+1), a second difference of k^-alpha
    pos = np.exp(lt) * -np.expm1(p.log_jump_tail(kk + 1) - lt)
    f0 = 1.0 - p._ratio * (1.0 - 2.0 ** -p.alpha)
    out = np.where(k_arr == 0, f0, pos)
    return float(out) if out.ndim == 0 else out


def cd_equilibrium_tail(p: CleggDodsonParams, k):
    """``sum_{i >= k} pi_i = (1 - pi_0) k^-alpha`` for ``k >= 1``."""
    k_arr = np.asarray(k)
    if np.any(k_arr < 1):
        raise ValueError("k must be at least 1")
    out = (1.0 - p.pi0) * k_arr.astype(float) ** -p.alpha
    return float(out) if out.ndim == 0 else out
