"""Exact return-time tail of the PSST chain, and why floats are not enough.

The alternating binomial sum cancels catastrophically in double precision;
exact rationals recover every digit.  The probe P(R0 > k) e^(eps k) keeps
rising for the infinite chain and turns over once the chain is truncated.

Run:  python demos/02_psst_return_tail.py
"""
from __future__ import annotations

import math

from mmptraffic.psst_tail import (format_decimal, heavy_tail_probe, loglog_table,
                                  return_tail_finite, return_tail_infinite)

a, q = "20.8", "10.4"

print("k    exact tail                       naive float sum")
for k in (10, 40, 80, 120):
    exact = return_tail_infinite(a, q, k)
    naive = sum(math.comb(k, j) * (-1) ** j / (20.8 * 2.0 ** j - 1) for j in range(k + 1))
    print(f"{k:<4} {format_decimal(exact, 20):<32} {naive: .6e}")

print("\ninfinite vs 2000-state chain at k = 50:")
inf = return_tail_infinite(a, q, 50)
fin = return_tail_finite(a, q, 2000, 50)
print(f"  relative gap {float(abs(inf - fin) / inf):.3e}")

print("\nlog-log slope between k = 100 and k = 200 (straight line = power law):")
rows = loglog_table(a, q, 200)
(k1, _, x1, y1), (k2, _, x2, y2) = rows[100], rows[200]
print(f"  slope {(y2 - y1) / (x2 - x1):.3f}")

print("\nprobe with eps = 0.01:")
for label, n in (("infinite chain", None), ("3-state chain", 3)):
    vals = heavy_tail_probe(a, q, 0.01, [500, 750, 1000], n=n)
    print(f"  {label:<16}" + "  ".join(f"k={k}: {v:.3e}" for k, v in vals))
