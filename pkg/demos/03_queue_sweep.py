"""Queue a Bernoulli source and two long-range dependent sources on a Bellcore-like link.

The Bernoulli source should sit close to the M/D/1 mean; the heavy-tailed
sources build much longer queues at the same occupancy.

Run:  python demos/03_queue_sweep.py
"""
from __future__ import annotations

from mmptraffic.models import BernoulliParams, CleggDodsonParams, generate
from mmptraffic.queueing import (DigitiserConfig, binary_to_trace, occupancy_sweep,
                                 pk_expected_queue)

cfg = DigitiserConfig.from_bandwidth(464.0, 1.96e6)
mu = 0.094
sources = {
    "bernoulli": BernoulliParams(mu),
    "cd H=0.7": CleggDodsonParams.from_hurst(0.7, mu),
    "cd H=0.9": CleggDodsonParams.from_hurst(0.9, mu),
}
occ = (0.2, 0.4, 0.6)

print(f"{'source':<10}" + "".join(f"   E[q] @ {o:.1f}" for o in occ))
for name, model in sources.items():
    trace = binary_to_trace(generate(model, 2 * 10**6, 7), cfg)
    rows = occupancy_sweep(trace, occ, workers=3)
    print(f"{name:<10}" + "".join(f"{r.stats.mean_q_packets:>14.3f}" for r in rows))
print(f"{'M/D/1':<10}" + "".join(f"{pk_expected_queue(o):>14.3f}" for o in occ))
