"""Hurst estimates on synthetic traffic at several time scales.

Fractional Gaussian noise gives roughly the same answer at every scale
(the aggregated series is shorter, so noisier).  The PSST
source does not: its apparent H moves with the bin width, which is the
signature of a process that only looks self-similar over a range of scales.

Run:  python demos/04_hurst_estimates.py
"""
from __future__ import annotations

import math

from mmptraffic.hurst import bin_series, estimate_all
from mmptraffic.models import PsstParams, fgn, generate, make_rng
from mmptraffic.queueing import DigitiserConfig, binary_to_trace


def show(label, series):
    ok, failed = estimate_all(series)
    cells = [f"{m.value}={e.H:.3f}" for m, e in ok.items()]
    cells += [f"{m.value}=failed" for m in failed]
    print(f"{label:<22} " + "  ".join(cells))


x = fgn(2**18, 0.8, make_rng(1))
show("fgn H=0.8", x)
show("fgn H=0.8, 16x agg", x.reshape(-1, 16).sum(axis=1))

cfg = DigitiserConfig.from_bandwidth(464.0, 1.96e6)
p = PsstParams(500.0, 10.4)
trace = binary_to_trace(generate(p, math.ceil(5e5 / p.mean()), 1), cfg)
for w in (0.1, 0.01, 0.001):
    show(f"psst, {w:g} s bins", bin_series(trace, w))
