"""Hurst-parameter estimation on binned traffic counts.

Five estimators are provided: rescaled range, aggregated variance,
periodogram regression, wavelet (Abry-Veitch style log-scale diagram) and
local Whittle.  Every estimator standardises its input first, so results
are invariant to adding a constant to, or rescaling, the counts.
"""
from __future__ import annotations

import csv
import enum
import math
import os
from dataclasses import dataclass

import numpy as np
import pywt

from .trace import PacketTrace

MIN_LENGTH = 256
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class Method(enum.Enum):
    RS = "rs"
    AGGVAR = "aggvar"
    PERIODOGRAM = "periodogram"
    WAVELET = "wavelet"
    LOCAL_WHITTLE = "local_whittle"

    @classmethod
    def parse(cls, name) -> "Method":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("-", "_")
        for m in cls:
            if key in (m.value, m.name.lower()):
                return m
        raise ValueError(f"unknown Hurst method {name!r}")


METHODS = tuple(Method)


@dataclass(frozen=True, eq=False)
class BinnedSeries:
    counts: np.ndarray
    bin_width: float

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=float).reshape(-1)
        if c.size < 2:
            raise ValueError("a binned series needs at least two bins")
        if np.any(c < 0) or not np.all(np.isfinite(c)):
            raise ValueError("counts must be finite and nonnegative")
        if not self.bin_width > 0:
            raise ValueError("bin width must be positive")
        object.__setattr__(self, "counts", c)

    def __len__(self) -> int:
        return self.counts.size

    @classmethod
    def from_slots(cls, series, slots_per_bin: int, dt: float = 1.0) -> "BinnedSeries":
        """Sum a per-slot series over consecutive groups of ``slots_per_bin`` slots.

        A trailing partial group is dropped.
        """
        x = np.asarray(series, dtype=float)
        if slots_per_bin < 1:
            raise ValueError("slots_per_bin must be at least 1")
        n = x.size // slots_per_bin
        return cls(x[:n * slots_per_bin].reshape(n, slots_per_bin).sum(axis=1),
                   slots_per_bin * dt)


@dataclass(frozen=True)
class HurstEstimate:
    method: Method
    H: float
    fit_lo: float
    fit_hi: float
    slope: float
    residual: float
    points: int

    @property
    def alpha(self) -> float:
        """ACF decay exponent implied by ``H = 1 - alpha/2``."""
        return 2.0 * (1.0 - self.H)


@dataclass(frozen=True)
class EstimateFailure:
    method: Method
    reason: str


def bin_series(trace: PacketTrace, bin_width: float, duration: float | None = None,
               unit: str = "bits") -> BinnedSeries:
    """Bits (or packets) arriving in each ``[i w, (i+1) w)`` bin.

    The number of bins is ``ceil(duration / w)``; a packet landing exactly
    on the end of the trace is put in the last bin.
    """
    if len(trace) == 0:
        raise ValueError("cannot bin an empty trace")
    if not bin_width > 0:
        raise ValueError("bin width must be positive")
    if unit not in ("bits", "packets"):
        raise ValueError("unit must be 'bits' or 'packets'")
    duration = trace.duration if duration is None else float(duration)
    nbins = max(int(math.ceil(duration / bin_width - 1e-9)), 1)
    idx = np.floor(trace.times / bin_width + 1e-9).astype(np.int64)
    if idx[-1] > nbins:
        raise ValueError("trace extends beyond the requested duration")
    idx = np.minimum(idx, nbins - 1)
    weights = trace.lengths if unit == "bits" else None
    return BinnedSeries(np.bincount(idx, weights=weights, minlength=nbins).astype(float),
                        bin_width)


def _prepare(x) -> np.ndarray:
    x = np.asarray(x.counts if isinstance(x, BinnedSeries) else x, dtype=float)
    if x.ndim != 1:
        raise ValueError("series must be one-dimensional")
    if x.size < MIN_LENGTH:
        raise ValueError(f"series too short: {x.size} < {MIN_LENGTH}")
    if not np.all(np.isfinite(x)):
        raise ValueError("series contains non-finite values")
    sd = x.std()
    if not sd > 0 or np.ptp(x) <= 1e-12 * max(abs(x).max(), 1.0):
        raise ValueError("series is constant (zero variance)")
    return (x - x.mean()) / sd


def _fit(u, v, w=None):
    """Weighted least squares ``v = c + slope u``; returns (slope, rms residual)."""
    u, v = np.asarray(u, float), np.asarray(v, float)
    if u.size < 2:
        raise ValueError("not enough points in the fit range")
    w = np.ones_like(u) if w is None else np.asarray(w, float)
    sw = w.sum()
    ub, vb = (w @ u) / sw, (w @ v) / sw
    du = u - ub
    slope = float((w * du) @ (v - vb) / ((w * du) @ du))
    res = v - vb - slope * du
    return slope, float(math.sqrt((w @ res**2) / sw))


def _log_sizes(lo: float, hi: float, count: int = 20) -> np.ndarray:
    return np.unique(np.floor(np.geomspace(lo, hi, count)).astype(np.int64))


def rescaled_range(x, min_block: int = 8, blocks: int = 20) -> HurstEstimate:
    x = _prepare(x)
    n = x.size
    sizes = _log_sizes(min_block, n / 10, blocks)
    rs = []
    for m in sizes:
        k = n // m
        b = x[:k * m].reshape(k, m)
        z = np.cumsum(b - b.mean(axis=1, keepdims=True), axis=1)
        r = np.maximum(z.max(axis=1), 0) - np.minimum(z.min(axis=1), 0)
        s = b.std(axis=1)
        ok = s > 0
        rs.append((r[ok] / s[ok]).mean() if ok.any() else np.nan)
    rs = np.asarray(rs)
    # skip the smallest decade of block sizes, keeping at least half a decade to fit
    lo = min(10 * min_block, (n / 10) / math.sqrt(10))
    keep = (sizes >= lo) & np.isfinite(rs) & (rs > 0)
    slope, resid = _fit(np.log10(sizes[keep]), np.log10(rs[keep]))
    return HurstEstimate(Method.RS, slope, float(sizes[keep][0]), float(sizes[keep][-1]),
                         slope, resid, int(keep.sum()))


def aggregated_variance(x, min_block: int = 10, blocks: int = 20) -> HurstEstimate:
    x = _prepare(x)
    n = x.size
    sizes = _log_sizes(min_block, n / 10, blocks)
    var = np.array([x[:(n // m) * m].reshape(n // m, m).mean(axis=1).var(ddof=1)
                    for m in sizes])
    keep = var > 0
    slope, resid = _fit(np.log10(sizes[keep]), np.log10(var[keep]))
    return HurstEstimate(Method.AGGVAR, 1.0 + slope / 2.0, float(sizes[keep][0]),
                         float(sizes[keep][-1]), slope, resid, int(keep.sum()))


def periodogram(x) -> tuple[np.ndarray, np.ndarray]:
    """Fourier frequencies ``2 pi j / n`` (j >= 1) and ``|DFT|^2 / (2 pi n)``."""
    x = np.asarray(x, float)
    n = x.size
    f = np.fft.rfft(x)
    j = np.arange(1, (n - 1) // 2 + 1)
    return 2.0 * np.pi * j / n, np.abs(f[j]) ** 2 / (2.0 * np.pi * n)


def periodogram_regression(x, fraction: float = 0.1) -> HurstEstimate:
    x = _prepare(x)
    lam, pgram = periodogram(x)
    m = max(int(fraction * lam.size), 4)
    lam, pgram = lam[:m], pgram[:m]
    keep = pgram > 0
    slope, resid = _fit(np.log10(lam[keep]), np.log10(pgram[keep]))
    return HurstEstimate(Method.PERIODOGRAM, (1.0 - slope) / 2.0, float(lam[keep][0]),
                         float(lam[keep][-1]), slope, resid, int(keep.sum()))


def wavelet(x, wavelet_name: str = "db3", j1: int = 3, j2: int | None = None) -> HurstEstimate:
    """Slope of log2 detail energy against octave, weighted by coefficient count.

    Octaves run from ``j1`` to ``floor(log2 n) - 4`` unless ``j2`` is given;
    ``H = (slope + 1) / 2``.
    """
    x = _prepare(x)
    n = x.size
    top = int(math.floor(math.log2(n)))
    j2 = top - 4 if j2 is None else j2
    w = pywt.Wavelet(wavelet_name)
    level = min(j2, pywt.dwt_max_level(n, w.dec_len))
    if level < j1 + 1:
        raise ValueError("series too short for the wavelet octave range")
    coeffs = pywt.wavedec(x, w, mode="periodization", level=level)
    details = coeffs[:0:-1]  # finest (octave 1) first
    octaves = np.arange(j1, level + 1)
    energy = np.array([np.mean(details[j - 1] ** 2) for j in octaves])
    counts = np.array([details[j - 1].size for j in octaves], dtype=float)
    keep = energy > 0
    slope, resid = _fit(octaves[keep], np.log2(energy[keep]), counts[keep])
    return HurstEstimate(Method.WAVELET, (slope + 1.0) / 2.0, float(octaves[keep][0]),
                         float(octaves[keep][-1]), slope, resid, int(keep.sum()))


def golden_section(f, lo: float, hi: float, tol: float = 1e-6) -> float:
    """Minimiser of a unimodal ``f`` on ``[lo, hi]`` to within ``tol``."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def local_whittle(x, exponent: float = 0.65, tol: float = 1e-6) -> HurstEstimate:
    x = _prepare(x)
    n = x.size
    lam, pgram = periodogram(x)
    m = min(int(math.floor(n ** exponent)), lam.size)
    lam, pgram = lam[:m], pgram[:m]
    log_lam = np.log(lam)
    mean_log = log_lam.mean()

    def objective(h):
        d = 2.0 * h - 1.0
        return math.log(float(np.mean(np.exp(d * log_lam) * pgram))) - d * float(mean_log)

    h = golden_section(objective, 0.0, 1.0, tol)
    return HurstEstimate(Method.LOCAL_WHITTLE, h, float(lam[0]), float(lam[-1]),
                         1.0 - 2.0 * h, float(objective(h)), m)


_ESTIMATORS = {
    Method.RS: rescaled_range,
    Method.AGGVAR: aggregated_variance,
    Method.PERIODOGRAM: periodogram_regression,
    Method.WAVELET: wavelet,
    Method.LOCAL_WHITTLE: local_whittle,
}


def estimate(series, method) -> HurstEstimate:
    """Hurst estimate of ``series`` (a BinnedSeries or 1-D array) by one method."""
    m = Method.parse(method)
    est = _ESTIMATORS[m](series)
    if not math.isfinite(est.H):
        raise ValueError(f"{m.value} produced a non-finite estimate")
    return est


def estimate_all(series, methods=METHODS) -> tuple[dict[Method, HurstEstimate],
                                                    dict[Method, EstimateFailure]]:
    """Run every method; failures are collected rather than raised."""
    ok, failed = {}, {}
    for m in methods:
        m = Method.parse(m)
        try:
            ok[m] = estimate(series, m)
        except (ValueError, FloatingPointError, ZeroDivisionError) as exc:
            failed[m] = EstimateFailure(m, str(exc))
    return ok, failed


HURST_COLUMNS = ("source", "bin_width", "method", "H", "fit_lo", "fit_hi",
                 "slope", "residual", "error")


def hurst_rows(source: str, bin_width: float, results) -> list[list[str]]:
    ok, failed = results
    rows = []
    for m in METHODS:
        if m in ok:
            e = ok[m]
            rows.append([source, repr(float(bin_width)), m.value, repr(e.H), repr(e.fit_lo),
                         repr(e.fit_hi), repr(e.slope), repr(e.residual), ""])
        elif m in failed:
            rows.append([source, repr(float(bin_width)), m.value, "", "", "", "", "",
                         failed[m].reason])
    return rows


def write_hurst_csv(rows, path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HURST_COLUMNS)
        w.writerows(rows)
