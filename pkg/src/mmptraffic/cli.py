"""Command-line entry point.

Exit status: 0 on success, 1 for invalid input or parameters, 2 when a run
fails for any other reason.  ``MMPTRAFFIC_OUT_DIR`` sets the output
directory when ``--out-dir`` is not given.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

from . import harness, models, psst_tail
from .hurst import bin_series, estimate_all, hurst_rows, write_hurst_csv
from .queueing import QueueConfig, SweepRow, digitise, simulate_queue, write_sweep_csv
from .trace import load_trace, save_trace

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("source and run options")
    g.add_argument("--config", help="key = value experiment file")
    g.add_argument("--profile", choices=sorted(harness.PROFILES))
    g.add_argument("--model", choices=harness.MODELS)
    g.add_argument("--mu", type=float)
    g.add_argument("--hurst", type=float)
    g.add_argument("--alpha", type=float)
    g.add_argument("--a", type=float)
    g.add_argument("--q", type=float)
    g.add_argument("--pi0", type=float)
    g.add_argument("--variant", choices=("A", "B"))
    g.add_argument("--seed", type=int)
    g.add_argument("--packets", type=int, help="packets to generate (on average)")
    g.add_argument("--packet-bits", type=float)
    g.add_argument("--bandwidth", type=float, help="bits per second")
    g.add_argument("--occupancies", help="comma-separated, each in (0, 1)")
    g.add_argument("--bins", help="comma-separated Hurst bin widths (s)")
    g.add_argument("--trace", help="packet trace file ('time length' per line)")
    g.add_argument("--first", type=int, help="keep only the first N packets of the trace")
    g.add_argument("--format", choices=("seconds-bits", "seconds-bytes"))
    g.add_argument("--input", choices=("raw", "digitised"))
    g.add_argument("--workers", type=int)
    g.add_argument("--label")
    g.add_argument("--out-dir")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="mmptraffic", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("generate", parents=[common], help="generate an on/off series and its trace")
    sub.add_parser("queue", parents=[common], help="queue a trace at --bandwidth")
    sub.add_parser("digitise", parents=[common], help="digitise a trace onto the slot grid")
    sub.add_parser("sweep", parents=[common],
                   help="full run: occupancy sweep, exceedance and Hurst tables")
    sub.add_parser("hurst", parents=[common], help="Hurst estimates at each bin width")
    p = sub.add_parser("psst-tail", parents=[common], help="exact PSST return-time tail")
    p.add_argument("--n", type=int, help="number of states (default: infinite chain)")
    p.add_argument("--k-max", type=int, default=200)
    p.add_argument("--epsilon", type=float, help="also write P(R0 > k) exp(epsilon k)")
    p = sub.add_parser("compare", parents=[common], help="merge sweep.csv files of several runs")
    p.add_argument("runs", nargs="+", help="run directories (or sweep.csv files)")
    p = sub.add_parser("segments", parents=[common], help="per-segment occupancy and sweeps")
    p.add_argument("--segment-packets", type=int, default=100_000)
    return parser


_CFG_KEYS = ("profile", "model", "mu", "hurst", "alpha", "a", "q", "pi0", "variant", "seed",
             "packets", "packet_bits", "bandwidth", "occupancies", "bins", "trace", "first",
             "format", "input", "workers", "label")


def _config(args) -> harness.ExperimentConfig:
    overrides = {k: getattr(args, k, None) for k in _CFG_KEYS}
    return harness.load_config(args.config, **overrides)


def _out(args, cfg) -> Path:
    out = harness.resolve_out_dir(cfg, args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _need_trace(cfg):
    if cfg.trace is None:
        raise ValueError("this command needs --trace")
    return load_trace(cfg.trace, cfg.format, cfg.first)


def cmd_generate(args) -> int:
    cfg = _config(args)
    if cfg.model is None or cfg.model == "ab":
        raise ValueError("generate needs --model (one of wang, cd, psst, bernoulli, fgn)")
    src = harness.obtain_trace(cfg)
    out = _out(args, cfg)
    models.write_series(src.series, out / "series.txt")
    save_trace(src.trace, out / "trace.txt")
    harness.write_manifest(out / "manifest.txt", cfg, src.info,
                           {"series.txt": out / "series.txt", "trace.txt": out / "trace.txt"})
    print(f"{src.info['slots']} slots, {len(src.trace)} packets, "
          f"sample mean {src.info['sample_mean']:.6f} -> {out}")
    return EXIT_OK


def cmd_queue(args) -> int:
    cfg = _config(args)
    trace = _need_trace(cfg) if cfg.model is None else harness.obtain_trace(cfg).trace
    res = simulate_queue(trace, QueueConfig(cfg.bandwidth))
    out = _out(args, cfg)
    s = res.stats
    write_sweep_csv([SweepRow(s.occupancy, s)], out / "queue.csv")
    save_trace(res.departures, out / "departures.txt")
    print(f"occupancy {s.occupancy:.6f}  mean queue {s.mean_q_packets:.6f} packets "
          f"({s.mean_q_bits:.3f} bits)  P(Q>=5) {s.p_ge(5):.6f}  P(Q>=20) {s.p_ge(20):.6f}")
    return EXIT_OK


def cmd_digitise(args) -> int:
    cfg = _config(args)
    trace = _need_trace(cfg)
    dig = digitise(trace, cfg.digitiser)
    out = _out(args, cfg)
    save_trace(dig, out / "digitised.txt")
    print(f"{len(trace)} packets ({trace.total_bits:.0f} bits) -> {len(dig)} packets of "
          f"{cfg.packet_bits:g} bits, residual {trace.total_bits - dig.total_bits:.0f} bits")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _config(args)
    bundle = harness.run_experiment(cfg, _out(args, cfg))
    for r in bundle.rows:
        print(f"occupancy {r.occupancy:.3f}  b={r.bandwidth:.6g}  "
              f"E[q]={r.stats.mean_q_packets:.6f}  P(Q>=5)={r.stats.p_ge(5):.6f}")
    print(f"wrote {', '.join(sorted(bundle.files))} and manifest.txt to {bundle.out_dir}")
    return EXIT_OK


def cmd_hurst(args) -> int:
    cfg = _config(args)
    trace = harness.obtain_trace(cfg).trace
    label = cfg.label or cfg.model or Path(cfg.trace).name
    rows = []
    for w in cfg.bins:
        rows += hurst_rows(label, w, estimate_all(bin_series(trace, w)))
    out = _out(args, cfg)
    write_hurst_csv(rows, out / "hurst.csv")
    for r in rows:
        print(f"{r[1]:>8} {r[2]:>14} {r[3] or 'failed: ' + r[8]}")
    return EXIT_OK


def cmd_psst_tail(args) -> int:
    if args.a is None or args.q is None:
        raise ValueError("psst-tail needs --a and --q")
    out = Path(args.out_dir or os.environ.get(harness.OUT_DIR_ENV) or "out")
    out.mkdir(parents=True, exist_ok=True)
    psst_tail.write_loglog_csv(args.a, args.q, args.k_max, out / "psst_tail.csv", args.n)
    if args.epsilon is not None:
        lo = max(args.k_max // 2, 1)
        probe = psst_tail.heavy_tail_probe(args.a, args.q, args.epsilon,
                                           range(lo, args.k_max + 1), args.n)
        with open(out / "psst_probe.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "tail_times_exp"])
            w.writerows([k, repr(v)] for k, v in probe)
    print(f"wrote {out / 'psst_tail.csv'}")
    return EXIT_OK


def cmd_compare(args) -> int:
    out = Path(args.out_dir or os.environ.get(harness.OUT_DIR_ENV) or "out")
    path = harness.compare_runs(args.runs, out / "compare.csv")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_segments(args) -> int:
    cfg = _config(args)
    trace = harness.obtain_trace(cfg).trace
    out = _out(args, cfg)
    res = harness.segment_analysis(trace, args.segment_packets, cfg.bandwidth,
                                   cfg.occupancies, out, cfg.workers)
    for r in res:
        print(f"segment {r.index}: {r.packets} packets over {r.span:.6g} s, "
              f"occupancy {r.occupancy:.6f}")
    print(f"relative spread of occupancy: {harness.relative_spread([r.occupancy for r in res]):.4f}")
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate, "queue": cmd_queue, "digitise": cmd_digitise,
    "sweep": cmd_sweep, "hurst": cmd_hurst, "psst-tail": cmd_psst_tail,
    "compare": cmd_compare, "segments": cmd_segments,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    try:
        return COMMANDS[args.command](args)
    except harness.StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID if isinstance(exc.cause, ValueError) else EXIT_RUNTIME
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
