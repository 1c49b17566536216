"""Packet traces: ``(arrival time in seconds, length in bits)`` records.

The on-disk format is plain text, one ``time length`` pair per line, with
``#`` comment lines allowed.  Lengths are stored either in bits or bytes and
the unit is always declared by the caller.
"""
from __future__ import annotations

import enum
import os
from dataclasses import dataclass

import numpy as np


class TraceFormat(enum.Enum):
    SECONDS_BITS = "seconds-bits"
    SECONDS_BYTES = "seconds-bytes"

    @classmethod
    def parse(cls, name) -> "TraceFormat":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("_", "-")
        for fmt in cls:
            if key in (fmt.value, fmt.name.lower().replace("_", "-")):
                return fmt
        raise ValueError(f"unknown trace format {name!r} (use seconds-bits or seconds-bytes)")


@dataclass(frozen=True, eq=False)
class PacketTrace:
    """Arrival times (s, nondecreasing) and packet lengths (bits, > 0).

    ``horizon`` optionally records the observation window; when absent the
    trace ends at its last arrival.
    """
    times: np.ndarray
    lengths: np.ndarray
    horizon: float | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float).reshape(-1)
        length = np.asarray(self.lengths, dtype=float).reshape(-1)
        if t.shape != length.shape:
            raise ValueError("times and lengths must have the same length")
        if t.size:
            if not np.all(np.isfinite(t)) or not np.all(np.isfinite(length)):
                raise ValueError("trace contains non-finite values")
            if t[0] < 0:
                raise ValueError("arrival times must be nonnegative")
            if np.any(np.diff(t) < 0):
                i = int(np.flatnonzero(np.diff(t) < 0)[0]) + 1
                raise ValueError(f"arrival times decrease at record {i}")
            if np.any(length <= 0):
                raise ValueError("packet lengths must be positive")
        if self.horizon is not None:
            if not self.horizon >= 0:
                raise ValueError("horizon must be nonnegative")
            if t.size and t[-1] > self.horizon:
                raise ValueError("trace has arrivals after its horizon")
        t.flags.writeable = False
        length.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "lengths", length)

    def __len__(self) -> int:
        return self.times.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, PacketTrace):
            return NotImplemented
        return (np.array_equal(self.times, other.times)
                and np.array_equal(self.lengths, other.lengths)
                and self.horizon == other.horizon)

    @property
    def duration(self) -> float:
        if self.horizon is not None:
            return float(self.horizon)
        return float(self.times[-1]) if self.times.size else 0.0

    @property
    def total_bits(self) -> float:
        return float(self.lengths.sum())

    def head(self, count: int) -> "PacketTrace":
        """First ``count`` packets; the horizon is dropped."""
        if count < 0:
            raise ValueError("count must be nonnegative")
        return PacketTrace(self.times[:count], self.lengths[:count])

    def segment(self, start: int, stop: int) -> "PacketTrace":
        """Packets ``start:stop`` with times shifted to begin at the segment's first arrival."""
        t = self.times[start:stop]
        if t.size == 0:
            return PacketTrace(t, self.lengths[start:stop])
        return PacketTrace(t - t[0], self.lengths[start:stop])


def empty_trace(horizon: float | None = None) -> PacketTrace:
    return PacketTrace(np.zeros(0), np.zeros(0), horizon)


def load_trace(path: str | os.PathLike, format=TraceFormat.SECONDS_BITS,
               first: int | None = None) -> PacketTrace:
    """Read a text trace.  ``first`` keeps only the first N packets."""
    fmt = TraceFormat.parse(format)
    if first is not None and first < 1:
        raise ValueError("first must be a positive packet count")
    times, lengths = [], []
    prev = -np.inf
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'time length', got {s!r}")
            try:
                t, length = float(parts[0]), float(parts[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: cannot parse {s!r}") from None
            if not (np.isfinite(t) and np.isfinite(length)) or length <= 0 or t < 0:
                raise ValueError(f"{path}:{lineno}: invalid record {s!r}")
            if t < prev:
                raise ValueError(f"{path}:{lineno}: timestamp {t} is earlier than {prev}")
            prev = t
            times.append(t)
            lengths.append(length)
            if first is not None and len(times) == first:
                break
    if not times:
        raise ValueError(f"{path}: no packet records")
    lengths = np.asarray(lengths)
    if fmt is TraceFormat.SECONDS_BYTES:
        lengths = lengths * 8
    return PacketTrace(np.asarray(times), lengths)


def _format_length(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def save_trace(trace: PacketTrace, path: str | os.PathLike,
               format=TraceFormat.SECONDS_BITS) -> None:
    """Write ``time length`` lines, times with 9 decimals.

    Byte output requires every length to be a whole number of bytes.
    """
    fmt = TraceFormat.parse(format)
    lengths = trace.lengths
    if fmt is TraceFormat.SECONDS_BYTES:
        if np.any(np.mod(lengths, 8) != 0):
            raise ValueError("lengths that are not whole bytes cannot be saved as bytes")
        lengths = lengths / 8
    lines = [f"{t:.9f} {_format_length(x)}\n" for t, x in zip(trace.times, lengths)]
    with open(path, "w", newline="\n") as fh:
        fh.writelines(lines)
