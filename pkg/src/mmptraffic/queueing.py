"""Single-server FIFO queue fed by a packet trace, plus digitisation.

A packet of ``L`` bits occupies the server for ``L/b`` seconds and counts as
queued (in packets and in bits) from its arrival until it has completely
left.  Queue statistics are exact time averages of the piecewise-constant
number-in-system process over ``[0, horizon]``.
"""
from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .trace import PacketTrace

BELLCORE_BANDWIDTH = 1.96e6
CAIDA_BANDWIDTH = 1.28e8

SWEEP_COLUMNS = ("occupancy", "bandwidth_bps", "mean_q_packets", "mean_q_bits",
                 "p_ge_5", "p_ge_20", "horizon_s")

# occupancies 0.10, 0.15, ..., 0.60
DEFAULT_OCCUPANCIES = tuple(round(0.1 + 0.05 * i, 2) for i in range(11))


@dataclass(frozen=True)
class QueueConfig:
    bandwidth: float  # bits per second

    def __post_init__(self):
        if not (np.isfinite(self.bandwidth) and self.bandwidth > 0):
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")


@dataclass(frozen=True)
class DigitiserConfig:
    packet_bits: float
    dt: float

    def __post_init__(self):
        if not self.packet_bits > 0:
            raise ValueError("packet length must be positive")
        if not self.dt > 0:
            raise ValueError("slot width must be positive")

    @classmethod
    def from_bandwidth(cls, packet_bits: float, bandwidth: float) -> "DigitiserConfig":
        """Slot width ``dt = l / b``: one packet per slot fills the link."""
        QueueConfig(bandwidth)
        return cls(packet_bits, packet_bits / bandwidth)

    @property
    def bandwidth(self) -> float:
        return self.packet_bits / self.dt


@dataclass(frozen=True, eq=False)
class QueueStats:
    mean_q_packets: float
    mean_q_bits: float
    exceedance: np.ndarray  # exceedance[q] = fraction of time with >= q packets
    occupancy: float
    horizon: float
    bandwidth: float
    bits_in: float
    bits_out: float
    bits_queued: float
    mean_delay: float

    def p_ge(self, q: int) -> float:
        if q < 0:
            raise ValueError("threshold must be nonnegative")
        return float(self.exceedance[q]) if q < self.exceedance.size else 0.0


@dataclass(frozen=True)
class QueueResult:
    stats: QueueStats
    departures: PacketTrace


def departure_times(times: np.ndarray, service: np.ndarray) -> np.ndarray:
    """FIFO departures ``d_i = max(a_i, d_{i-1}) + s_i`` without a Python loop.

    With ``C_i`` the cumulative service, ``d_i = C_i + max_{j<=i}(a_j - C_{j-1})``.
    """
    if times.size == 0:
        return np.zeros(0)
    c = np.cumsum(service)
    c_prev = np.concatenate(([0.0], c[:-1]))
    return c + np.maximum.accumulate(times - c_prev)


def _level_times(arrivals, departures, horizon):
    """Time spent at each number-in-system level on ``[0, horizon]``."""
    n = arrivals.size
    t = np.concatenate((departures, arrivals))
    kind = np.concatenate((np.zeros(n, np.int8), np.ones(n, np.int8)))
    step = np.concatenate((-np.ones(n, np.int64), np.ones(n, np.int64)))
    # departures before arrivals at equal times
    order = np.lexsort((kind, t))
    t, step = t[order], step[order]
    level = np.cumsum(step)
    span = np.diff(np.append(t, horizon))
    np.clip(span, 0.0, None, out=span)
    head = t[0] if t.size else horizon
    occ = np.bincount(level, weights=span)
    occ[0] += head
    return occ


def simulate_queue(trace: PacketTrace, cfg: QueueConfig,
                   horizon: float | None = None) -> QueueResult:
    """Run the trace through an infinite-buffer FIFO queue of bandwidth ``cfg.bandwidth``.

    ``horizon`` defaults to the trace's own horizon, or to the last departure
    when the trace has none.  ``occupancy`` is offered bits over
    ``bandwidth * horizon`` and so exceeds 1 for an overloaded link.
    """
    b = cfg.bandwidth
    a, lengths = trace.times, trace.lengths
    d = departure_times(a, lengths / b)
    if horizon is None:
        horizon = trace.horizon if trace.horizon is not None else (float(d[-1]) if d.size else 0.0)
    horizon = float(horizon)
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    if a.size and a[-1] > horizon:
        raise ValueError(f"packet arrives at {a[-1]} after the horizon {horizon}")
    departures = PacketTrace(d, lengths)
    if a.size == 0 or horizon == 0:
        zero = QueueStats(0.0, 0.0, np.zeros(1), 0.0, horizon, b,
                          float(lengths.sum()), 0.0, float(lengths.sum()), 0.0)
        return QueueResult(zero, departures)
    sojourn = np.minimum(d, horizon) - a
    level = _level_times(a, np.minimum(d, horizon), horizon)
    exceed = np.cumsum(level[::-1])[::-1] / horizon
    exceed[0] = 1.0
    done = d <= horizon
    bits_in = float(lengths.sum())
    bits_out = float(lengths[done].sum())
    stats = QueueStats(
        mean_q_packets=float(sojourn.sum() / horizon),
        mean_q_bits=float(lengths @ sojourn / horizon),
        exceedance=np.append(exceed, 0.0),
        occupancy=bits_in / (b * horizon),
        horizon=horizon,
        bandwidth=b,
        bits_in=bits_in,
        bits_out=bits_out,
        bits_queued=bits_in - bits_out,
        mean_delay=float((d - a).mean()),
    )
    return QueueResult(stats, departures)


def pk_expected_queue(rho: float) -> float:
    """Mean number in an M/D/1 system, ``rho + rho^2 / (2 (1 - rho))``."""
    if not 0 <= rho < 1:
        raise ValueError(f"utilisation must lie in [0, 1), got {rho}")
    return rho + rho * rho / (2.0 * (1.0 - rho))


def _slot_index(times: np.ndarray, dt: float) -> np.ndarray:
    # an arrival at exactly n*dt is available at slot n
    return np.maximum(np.ceil(times / dt - 1e-9), 0).astype(np.int64)


def digitise(trace: PacketTrace, cfg: DigitiserConfig) -> PacketTrace:
    """Re-emit the trace as fixed-length packets on the slot grid ``n * dt``.

    At each slot boundary one packet of ``l`` bits leaves if at least ``l``
    undelivered bits have arrived (arrivals exactly on the boundary count).
    Bits left over at the end (fewer than ``l``) are never sent.
    """
    l, dt = cfg.packet_bits, cfg.dt
    if len(trace) == 0:
        return PacketTrace(np.zeros(0), np.zeros(0), trace.horizon)
    slots = _slot_index(trace.times, dt)
    arrived = np.cumsum(np.bincount(slots, weights=trace.lengths))
    ready = np.floor_divide(arrived, l).astype(np.int64)
    n = np.arange(ready.size)
    # emitted by the end of slot n: E_n = min(E_{n-1} + 1, ready_n), E_{-1} = 0
    emitted = n + np.minimum(1, np.minimum.accumulate(ready - n))
    tail = int(ready[-1] - emitted[-1])
    counts = np.concatenate((emitted, emitted[-1] + np.arange(1, tail + 1)))
    fire = np.flatnonzero(np.diff(np.concatenate(([0], counts))) > 0)
    times = fire * dt
    horizon = trace.horizon
    if horizon is not None and times.size and times[-1] > horizon:
        horizon = None
    return PacketTrace(times, np.full(times.size, float(l)), horizon)


def binary_to_trace(series, cfg: DigitiserConfig) -> PacketTrace:
    """Slot ``i`` holding a 1 becomes a packet of ``l`` bits at ``i * dt``."""
    x = np.asarray(series)
    if x.ndim != 1:
        raise ValueError("series must be one-dimensional")
    if x.size and not np.isin(x, (0, 1)).all():
        raise ValueError("series must contain only 0 and 1")
    idx = np.flatnonzero(x)
    return PacketTrace(idx * cfg.dt, np.full(idx.size, float(cfg.packet_bits)), x.size * cfg.dt)


@dataclass(frozen=True)
class SweepRow:
    occupancy: float
    stats: QueueStats

    @property
    def bandwidth(self) -> float:
        return self.stats.bandwidth

    def as_record(self) -> dict[str, float]:
        s = self.stats
        return {"occupancy": self.occupancy, "bandwidth_bps": s.bandwidth,
                "mean_q_packets": s.mean_q_packets, "mean_q_bits": s.mean_q_bits,
                "p_ge_5": s.p_ge(5), "p_ge_20": s.p_ge(20), "horizon_s": s.horizon}


def bandwidth_for_occupancy(trace: PacketTrace, occupancy: float,
                            horizon: float | None = None) -> float:
    if not 0 < occupancy < 1:
        raise ValueError(f"occupancy must lie in (0, 1), got {occupancy}")
    horizon = trace.duration if horizon is None else horizon
    if len(trace) == 0 or horizon <= 0:
        raise ValueError("occupancy is undefined for an empty or zero-length trace")
    return trace.total_bits / (occupancy * horizon)


def occupancy_sweep(trace: PacketTrace, occupancies=DEFAULT_OCCUPANCIES,
                    horizon: float | None = None, workers: int = 1) -> list[SweepRow]:
    """Queue the trace at each target occupancy by solving for the bandwidth."""
    occupancies = [float(o) for o in occupancies]
    for o in occupancies:
        if not 0 < o < 1:
            raise ValueError(f"occupancy must lie in (0, 1), got {o}")
    if len(trace) == 0:
        raise ValueError("cannot sweep an empty trace")
    horizon = trace.duration if horizon is None else float(horizon)

    def one(o):
        b = bandwidth_for_occupancy(trace, o, horizon)
        return SweepRow(o, simulate_queue(trace, QueueConfig(b), horizon).stats)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(one, occupancies))
    return [one(o) for o in occupancies]


def fmt(x) -> str:
    """Shortest round-tripping text for CSV cells."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_sweep_csv(rows: list[SweepRow], path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            rec = r.as_record()
            w.writerow([fmt(rec[c]) for c in SWEEP_COLUMNS])


def write_exceedance_csv(rows: list[SweepRow], path: str | os.PathLike,
                         max_q: int = 50) -> None:
    """Long-format ``occupancy, q, p_ge_q`` for ``q = 1..max_q``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["occupancy", "q", "p_ge_q"])
        for r in rows:
            for q in range(1, max_q + 1):
                w.writerow([fmt(r.occupancy), q, fmt(r.stats.p_ge(q))])
