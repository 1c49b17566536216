"""Comparison sources: i.i.d. Bernoulli slots and thresholded FGN."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

# largest circulant the FGN synthesiser will build (2 * 2**27 complex points)
MAX_FGN_LENGTH = 2**27


@dataclass(frozen=True)
class BernoulliParams:
    mu: float

    def __post_init__(self):
        if not 0 <= self.mu <= 1:
            raise ValueError(f"mu must lie in [0, 1], got {self.mu}")

    def mean(self) -> float:
        return self.mu


@dataclass(frozen=True)
class FgnParams:
    hurst: float
    mu: float

    def __post_init__(self):
        if not 0.5 < self.hurst < 1:
            raise ValueError(f"hurst must lie in (1/2, 1), got {self.hurst}")
        if not 0 < self.mu < 1:
            raise ValueError(f"mu must lie in (0, 1), got {self.mu}")

    def mean(self) -> float:
        return self.mu

    @property
    def threshold(self) -> float:
        return float(norm.ppf(1.0 - self.mu))


def bernoulli_generate(p: BernoulliParams, n: int, seed) -> np.ndarray:
    from ._sampling import make_rng
    return (make_rng(seed).random(n) < p.mu).astype(np.int8)


def fgn_autocovariance(hurst: float, n: int) -> np.ndarray:
    """Unit-variance fGn autocovariance at lags ``0..n-1``."""
    k = np.arange(n, dtype=float)
    h2 = 2.0 * hurst
    return 0.5 * (np.abs(k + 1) ** h2 - 2.0 * k ** h2 + np.abs(k - 1) ** h2)


def fgn(n: int, hurst: float, rng: np.random.Generator) -> np.ndarray:
    """Exact unit-variance fractional Gaussian noise by circulant embedding.

    The embedding length is the next power of two at or above ``n``; the
    sample is the first ``n`` points.
    """
    if n < 2:
        raise ValueError("FGN synthesis needs n >= 2")
    if not 0 < hurst < 1:
        raise ValueError(f"hurst must lie in (0, 1), got {hurst}")
    m = 1 << int(np.ceil(np.log2(n)))
    if m > MAX_FGN_LENGTH:
        raise ValueError(f"n={n} exceeds the supported FGN length {MAX_FGN_LENGTH}")
    gamma = fgn_autocovariance(hurst, m + 1)
    row = np.concatenate((gamma, gamma[-2:0:-1]))  # length 2m
    eig = np.fft.rfft(row).real
    if eig.min() < -1e-10 * eig.max():
        raise ValueError("circulant embedding is not nonnegative definite")
    eig = np.clip(eig, 0.0, None)
    size = 2 * m
    # Hermitian Gaussian vector with the right per-frequency variances
    w = np.empty(m + 1, dtype=complex)
    w[0] = rng.standard_normal() * np.sqrt(eig[0])
    w[m] = rng.standard_normal() * np.sqrt(eig[m])
    z = rng.standard_normal((m - 1, 2))
    w[1:m] = (z[:, 0] + 1j * z[:, 1]) * np.sqrt(eig[1:m] / 2.0)
    x = np.fft.irfft(w, n=size) * np.sqrt(size)
    return x[:n]


def fgn_onoff_generate(p: FgnParams, n: int, seed, gaussian: bool = False):
    """On/off series from FGN thresholded at the ``1 - mu`` normal quantile.

    With ``gaussian=True`` the underlying Gaussian sample is returned as well.
    """
    from ._sampling import make_rng
    x = fgn(n, p.hurst, make_rng(seed))
    series = (x > p.threshold).astype(np.int8)
    return (series, x) if gaussian else series
