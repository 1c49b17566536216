"""Experiment pipeline: source -> trace -> occupancy sweep -> Hurst tables.

An :class:`ExperimentConfig` describes one run.  It is read from a
``key = value`` file (``#`` starts a comment) and may be overridden field by
field.  Recognised keys:

    profile        bellcore | caida (sets packet_bits, bandwidth, duration)
    model          wang | cd | psst | ab | bernoulli | fgn  (or leave unset with trace)
    mu, hurst, alpha, a, q, pi0, variant     model parameters
    trace, format, first, input              trace file source; input = raw | digitised
    packet_bits, bandwidth, duration, packets, seed, warmup
    occupancies    comma-separated targets in (0, 1)
    bins           comma-separated Hurst bin widths in seconds
    segment_packets, workers, label, out_dir

Every output file is a deterministic function of the config, so two runs of
the same config produce byte-identical CSVs.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import hurst as hurst_mod
from . import models
from .queueing import (DEFAULT_OCCUPANCIES, DigitiserConfig, QueueConfig, SweepRow, binary_to_trace,
                       digitise, fmt, occupancy_sweep, simulate_queue, write_exceedance_csv,
                       write_sweep_csv)
from .trace import PacketTrace, TraceFormat, load_trace

OUT_DIR_ENV = "MMPTRAFFIC_OUT_DIR"


class StageError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class Profile:
    packet_bits: float
    bandwidth: float
    duration: float


PROFILES = {
    "bellcore": Profile(464.0, 1.96e6, 252.0),
    # mean packet length is quoted as both 493 and 496 bits; the queueing runs use 496
    "caida": Profile(496.0, 1.28e8, 4.02),
}

MODELS = ("wang", "cd", "psst", "ab", "bernoulli", "fgn")


def _floats(value) -> tuple[float, ...]:
    if isinstance(value, str):
        parts = [p for p in value.replace(";", ",").split(",") if p.strip()]
        return tuple(float(p) for p in parts)
    return tuple(float(v) for v in value)


@dataclass(frozen=True)
class ExperimentConfig:
    profile: str = "bellcore"
    model: str | None = None
    mu: float | None = None
    hurst: float | None = None
    alpha: float | None = None
    a: float | None = None
    q: float | None = None
    pi0: float | None = None
    variant: str = "B"
    trace: str | None = None
    format: str = "seconds-bits"
    first: int | None = None
    input: str = "raw"
    packet_bits: float | None = None
    bandwidth: float | None = None
    duration: float | None = None
    packets: int | None = None
    seed: int = 0
    warmup: int = models.DEFAULT_WARMUP
    occupancies: tuple[float, ...] = DEFAULT_OCCUPANCIES
    bins: tuple[float, ...] = (0.1, 0.01, 0.001)
    segment_packets: int | None = None
    workers: int = 1
    label: str | None = None
    out_dir: str | None = None

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ValueError(f"unknown profile {self.profile!r}; choose from {sorted(PROFILES)}")
        prof = PROFILES[self.profile]
        for name in ("packet_bits", "bandwidth", "duration"):
            if getattr(self, name) is None:
                object.__setattr__(self, name, getattr(prof, name))
        object.__setattr__(self, "occupancies", _floats(self.occupancies))
        object.__setattr__(self, "bins", _floats(self.bins))
        if self.model is not None and self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; choose from {', '.join(MODELS)}")
        if self.model is None and self.trace is None:
            raise ValueError("config needs a model or a trace")
        if self.model not in (None, "ab") and self.trace is not None:
            raise ValueError("a trace source can only be combined with model = ab")
        if not self.packet_bits > 0:
            raise ValueError("packet_bits must be positive")
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if not self.occupancies:
            raise ValueError("occupancies must not be empty")
        for o in self.occupancies:
            if not 0 < o < 1:
                raise ValueError(f"occupancy {o} outside (0, 1)")
        for w in self.bins:
            if not w > 0:
                raise ValueError(f"bin width {w} must be positive")
        if self.packets is not None and self.packets < 1:
            raise ValueError("packets must be positive")
        if self.first is not None and self.first < 1:
            raise ValueError("first must be positive")
        if self.input not in ("raw", "digitised"):
            raise ValueError("input must be 'raw' or 'digitised'")
        if self.segment_packets is not None and self.segment_packets < 1:
            raise ValueError("segment_packets must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        TraceFormat.parse(self.format)

    @property
    def dt(self) -> float:
        return self.packet_bits / self.bandwidth

    @property
    def digitiser(self) -> DigitiserConfig:
        return DigitiserConfig(self.packet_bits, self.dt)

    def replace(self, **changes) -> "ExperimentConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return dataclasses.replace(self, **changes)

    def items(self) -> list[tuple[str, str]]:
        out = []
        for f in dataclasses.fields(self):
            if f.name == "out_dir":
                continue
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(repr(x) for x in v)
            elif isinstance(v, float):
                v = repr(v)
            out.append((f.name, "" if v is None else str(v)))
        return out


_INT_KEYS = {"first", "packets", "seed", "warmup", "segment_packets", "workers"}
_FLOAT_KEYS = {"mu", "hurst", "alpha", "a", "q", "pi0", "packet_bits", "bandwidth", "duration"}


def coerce(key: str, value: str):
    """Convert a config-file string to the field's type."""
    key = key.strip().replace("-", "_")
    names = {f.name for f in dataclasses.fields(ExperimentConfig)}
    if key not in names:
        raise ValueError(f"unknown config key {key!r}")
    value = value.strip()
    if value == "":
        return key, None
    try:
        if key in _INT_KEYS:
            return key, int(value)
        if key in _FLOAT_KEYS:
            return key, float(value)
    except ValueError:
        raise ValueError(f"config key {key!r}: cannot parse {value!r}") from None
    return key, value


def read_config_file(path: str | os.PathLike) -> dict:
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.split("#", 1)[0].strip()
            if not s:
                continue
            if "=" not in s:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            k, v = s.split("=", 1)
            try:
                k, v = coerce(k, v)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            values[k] = v
    return values


def load_config(path: str | os.PathLike | None = None, **overrides) -> ExperimentConfig:
    """Config from an optional file, with non-None ``overrides`` taking precedence."""
    values = read_config_file(path) if path is not None else {}
    values.update({k: v for k, v in overrides.items() if v is not None})
    values = {k: v for k, v in values.items() if v is not None}
    return ExperimentConfig(**values)


def resolve_out_dir(cfg: ExperimentConfig, flag: str | None = None) -> Path:
    """Flag, then the environment variable, then the config, then ``./out``."""
    return Path(flag or os.environ.get(OUT_DIR_ENV) or cfg.out_dir or "out")


def build_model(cfg: ExperimentConfig, series=None):
    """Model parameters from the config; ``ab`` is fitted to ``series``."""
    name = cfg.model

    def alpha_from(default_h=None):
        if cfg.alpha is not None:
            return cfg.alpha
        h = cfg.hurst if cfg.hurst is not None else default_h
        if h is None:
            raise ValueError(f"{name} needs alpha or hurst")
        return 2.0 - 2.0 * h

    def need_mu():
        if cfg.mu is None:
            raise ValueError(f"{name} needs mu")
        return cfg.mu

    if name == "wang":
        alpha = alpha_from()
        if cfg.a is not None:
            return models.WangParams(cfg.a, alpha)
        return models.WangParams.from_mean(need_mu(), alpha)
    if name == "cd":
        alpha = alpha_from()
        pi0 = cfg.pi0 if cfg.pi0 is not None else 1.0 - need_mu()
        return models.CleggDodsonParams(pi0, alpha)
    if name == "psst":
        q = cfg.q if cfg.q is not None else models.psst_fit_q(need_mu(), cfg.variant)
        return models.PsstParams(cfg.a if cfg.a is not None else 500.0, q, cfg.variant)
    if name == "bernoulli":
        return models.BernoulliParams(need_mu())
    if name == "fgn":
        if cfg.hurst is None:
            raise ValueError("fgn needs hurst")
        return models.FgnParams(cfg.hurst, need_mu())
    if name == "ab":
        if series is None:
            raise ValueError("ab is fitted to a trace; give a trace file")
        return models.ArrowsmithBarencoParams.from_series(series)
    raise ValueError(f"unknown model {name!r}")


def slot_count(cfg: ExperimentConfig, model) -> int:
    """Slots to generate: enough for ``packets`` on average, else ``duration / dt``."""
    if cfg.packets is not None:
        return int(math.ceil(cfg.packets / model.mean()))
    return int(round(cfg.duration / cfg.dt))


def trace_to_slots(trace: PacketTrace, dig: DigitiserConfig) -> np.ndarray:
    """Binary slot series of an already digitised trace."""
    idx = np.rint(trace.times / dig.dt).astype(np.int64)
    n = int(math.ceil(trace.duration / dig.dt - 1e-9)) if len(trace) else 0
    series = np.zeros(max(n, idx[-1] + 1 if idx.size else 0), dtype=np.int8)
    series[idx] = 1
    return series


@dataclass
class Source:
    trace: PacketTrace
    series: np.ndarray | None
    info: dict = field(default_factory=dict)


def obtain_trace(cfg: ExperimentConfig) -> Source:
    """The packet trace an experiment runs on, plus what produced it."""
    dig = cfg.digitiser
    if cfg.trace is not None:
        raw_in = load_trace(cfg.trace, cfg.format, cfg.first)
        info = {"trace_packets_in": len(raw_in), "trace_bits_in": raw_in.total_bits}
        # the baseline queue at bandwidth b gives the "raw" input
        base = simulate_queue(raw_in, QueueConfig(cfg.bandwidth))
        info["baseline_occupancy"] = base.stats.occupancy
        digitised = digitise(raw_in, dig)
        if cfg.model == "ab":
            series = trace_to_slots(digitised, dig)
            model = build_model(cfg, series)
            return _from_model(cfg, model, {**info, "fitted_mean": model.mean()})
        if cfg.input == "digitised":
            return Source(digitised, trace_to_slots(digitised, dig), info)
        dep = base.departures
        return Source(PacketTrace(dep.times, dep.lengths), None, info)
    return _from_model(cfg, build_model(cfg), {})


def _from_model(cfg, model, info) -> Source:
    n = slot_count(cfg, model)
    series = models.generate(model, n, cfg.seed, cfg.warmup)
    info = {**info, "model_params": _describe(model), "model_mean": model.mean(),
            "slots": n, "sample_mean": float(series.mean())}
    return Source(binary_to_trace(series, cfg.digitiser), series, info)


def _describe(model) -> str:
    if isinstance(model, models.ArrowsmithBarencoParams):
        return f"ArrowsmithBarenco(mean_off={model.mean_off!r}, mean_on={model.mean_on!r})"
    return repr(model)


@dataclass
class RunBundle:
    out_dir: Path
    rows: list[SweepRow]
    hurst: list[list[str]]
    files: dict[str, Path]


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(path: Path, cfg: ExperimentConfig, info: dict, files: dict[str, Path]) -> None:
    from . import __version__
    lines = [f"version = {__version__}"]
    lines += [f"{k} = {v}" for k, v in cfg.items()]
    for k in sorted(info):
        v = info[k]
        lines.append(f"{k} = {fmt(v) if isinstance(v, (float, int, np.floating, np.integer)) else v}")
    for name in sorted(files):
        lines.append(f"sha256.{name} = {_sha256(files[name])}")
    path.write_text("\n".join(lines) + "\n")


def run_experiment(cfg: ExperimentConfig, out_dir: str | os.PathLike | None = None) -> RunBundle:
    """Generate or load the trace, sweep occupancies and estimate H; write CSVs."""
    out = Path(out_dir) if out_dir is not None else resolve_out_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)

    def stage(name, fn, *args, **kw):
        try:
            return fn(*args, **kw)
        except (ValueError, OSError) as exc:
            raise StageError(name, exc) from exc

    src = stage("source", obtain_trace, cfg)
    trace = src.trace
    rows = stage("sweep", occupancy_sweep, trace, cfg.occupancies, workers=cfg.workers)
    files = {"sweep.csv": out / "sweep.csv", "exceedance.csv": out / "exceedance.csv",
             "hurst.csv": out / "hurst.csv"}
    write_sweep_csv(rows, files["sweep.csv"])
    write_exceedance_csv(rows, files["exceedance.csv"])
    label = cfg.label or cfg.model or Path(cfg.trace).name
    hrows = []
    for w in cfg.bins:
        try:
            series = hurst_mod.bin_series(trace, w)
        except ValueError as exc:
            hrows.append([label, repr(float(w)), "", "", "", "", "", "", str(exc)])
            continue
        hrows += hurst_mod.hurst_rows(label, w, hurst_mod.estimate_all(series))
    hurst_mod.write_hurst_csv(hrows, files["hurst.csv"])
    info = dict(src.info, run_label=label, trace_packets=len(trace),
                trace_bits=trace.total_bits, trace_duration_s=trace.duration, dt_s=cfg.dt)
    write_manifest(out / "manifest.txt", cfg, info, files)
    return RunBundle(out, rows, hrows, files)


def _read_sweep(path: Path) -> tuple[list[str], list[dict[str, str]]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return reader.fieldnames or [], list(reader)


def _bundle_label(d: Path) -> str:
    man = d / "manifest.txt"
    if man.exists():
        for line in man.read_text().splitlines():
            if line.startswith("run_label = "):
                return line[len("run_label = "):]
    return d.name


def compare_runs(bundle_dirs, out_path: str | os.PathLike, labels=None) -> Path:
    """Merge several ``sweep.csv`` files into one row per occupancy.

    Column groups follow the input order; the occupancy grids must match.
    """
    dirs = [Path(d) for d in bundle_dirs]
    if len(dirs) < 2:
        raise ValueError("compare needs at least two runs")
    labels = list(labels) if labels is not None else [_bundle_label(d) for d in dirs]
    if len(labels) != len(dirs):
        raise ValueError("one label per run is required")
    # make repeated labels distinct by position
    seen: dict[str, int] = {}
    unique = []
    for lab in labels:
        seen[lab] = seen.get(lab, 0) + 1
        unique.append(lab if seen[lab] == 1 else f"{lab}#{seen[lab]}")
    tables = []
    for d in dirs:
        path = d / "sweep.csv" if d.is_dir() else d
        tables.append(_read_sweep(path))
    grid = [r["occupancy"] for r in tables[0][1]]
    for d, (_, rows) in zip(dirs, tables):
        if [r["occupancy"] for r in rows] != grid:
            raise ValueError(f"{d}: occupancy grid differs from {dirs[0]}")
    value_cols = [c for c in tables[0][0] if c != "occupancy"]
    header = ["occupancy"] + [f"{lab}:{c}" for lab in unique for c in value_cols]
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i, occ in enumerate(grid):
            row = [occ]
            for _, rows in tables:
                row += [rows[i][c] for c in value_cols]
            w.writerow(row)
    return out


@dataclass(frozen=True)
class SegmentResult:
    index: int
    packets: int
    start: float
    span: float
    occupancy: float
    rows: list[SweepRow]


def split_segments(trace: PacketTrace, segment_packets: int) -> list[tuple[PacketTrace, float, float]]:
    """Consecutive segments of ``segment_packets`` packets as (trace, start, span).

    A segment spans from its first arrival to the next segment's first
    arrival; the last one ends at the trace's end.  Leftover packets that do
    not fill a segment are dropped.
    """
    if segment_packets < 1:
        raise ValueError("segment size must be positive")
    count = len(trace) // segment_packets
    if count < 2:
        raise ValueError(f"trace of {len(trace)} packets holds fewer than two segments "
                         f"of {segment_packets}")
    out = []
    t = trace.times
    end = trace.duration
    for i in range(count):
        lo, hi = i * segment_packets, (i + 1) * segment_packets
        start = float(t[lo])
        stop = float(t[hi]) if hi < len(trace) else end
        span = stop - start
        if span <= 0:
            raise ValueError(f"segment {i} has zero duration")
        seg = PacketTrace(t[lo:hi] - start, trace.lengths[lo:hi], span)
        out.append((seg, start, span))
    return out


def segment_analysis(trace: PacketTrace, segment_packets: int, bandwidth: float,
                     occupancies=DEFAULT_OCCUPANCIES, out_dir: str | os.PathLike | None = None,
                     workers: int = 1) -> list[SegmentResult]:
    """Per-segment occupancy at ``bandwidth`` and per-segment occupancy sweeps."""
    QueueConfig(bandwidth)
    results = []
    for i, (seg, start, span) in enumerate(split_segments(trace, segment_packets)):
        rows = occupancy_sweep(seg, occupancies, workers=workers)
        results.append(SegmentResult(i, len(seg), start, span,
                                     seg.total_bits / (bandwidth * span), rows))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "segments.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["segment", "packets", "start_s", "duration_s", "occupancy"])
            for r in results:
                w.writerow([r.index, r.packets, fmt(r.start), fmt(r.span), fmt(r.occupancy)])
        for r in results:
            write_sweep_csv(r.rows, out / f"segment_{r.index}_sweep.csv")
    return results


def relative_spread(values) -> float:
    """``(max - min) / mean``."""
    v = np.asarray(values, dtype=float)
    return float((v.max() - v.min()) / v.mean())


__all__ = [
    "ExperimentConfig", "OUT_DIR_ENV", "PROFILES", "Profile", "RunBundle", "SegmentResult",
    "StageError", "build_model", "compare_runs", "load_config", "obtain_trace",
    "read_config_file", "relative_spread", "resolve_out_dir", "run_experiment",
    "segment_analysis", "slot_count", "split_segments", "trace_to_slots",
]
