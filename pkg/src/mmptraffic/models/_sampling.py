"""Random-number plumbing and the range-halving jump sampler.

Every chain in this package leaves a "hub" state by a jump whose size has a
very long tail.  Inverting the CDF directly underflows once the tail
probability drops below machine epsilon, so jumps are drawn by first deciding
which dyadic range ``[k, 2k)`` the jump falls in, conditional on it being at
least ``k``, and then bisecting inside that range.  Each decision only needs
ratios of tail probabilities, which are computed in log space.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

#: Upper cap on any single jump.  Jumps are clipped to the requested path
#: length anyway, so the cap only needs to stay clear of int64 overflow.
JUMP_CAP = 2**52

LogTail = Callable[[np.ndarray], np.ndarray]


def make_rng(seed: int | np.random.SeedSequence | None) -> np.random.Generator:
    """PCG64 generator for ``seed``.

    Parallel runs should derive independent streams with
    :func:`spawn_seeds` rather than using consecutive integer seeds.
    """
    return np.random.Generator(np.random.PCG64(seed))


def spawn_seeds(seed: int, count: int) -> list[np.random.SeedSequence]:
    """Split ``seed`` into ``count`` statistically independent child streams."""
    return np.random.SeedSequence(seed).spawn(count)


def sample_jumps(log_tail: LogTail, size: int, rng: np.random.Generator,
                 cap: int = JUMP_CAP) -> np.ndarray:
    """Draw ``size`` nonnegative integers from the law with ``log P(X >= k)``.

    ``log_tail`` is evaluated on int64 arrays with ``k >= 1`` and may return
    ``-inf`` beyond a finite support.  ``P(X >= 0)`` is taken to be one.
    """
    out = np.zeros(size, dtype=np.int64)
    if size == 0:
        return out
    u = rng.random(size)
    first = log_tail(np.ones(1, dtype=np.int64))[0]
    idx = np.flatnonzero(np.log(u) < first) if first < 0 else np.arange(size)
    if idx.size == 0:
        return out

    # doubling: find [lo, hi) with hi = 2 lo containing the jump
    lo = np.ones(idx.size, dtype=np.int64)
    hi = np.zeros(idx.size, dtype=np.int64)
    active = np.arange(idx.size)
    while active.size:
        k = lo[active]
        lt_k = log_tail(k)
        lt_2k = log_tail(2 * k)
        p_inside = -np.expm1(lt_2k - lt_k)
        inside = rng.random(active.size) < p_inside
        hi[active[inside]] = 2 * k[inside]
        rest = active[~inside]
        lo[rest] *= 2
        capped = lo[rest] >= cap
        if capped.any():
            lo[rest[capped]] = cap
            hi[rest[capped]] = cap + 1
            rest = rest[~capped]
        active = rest

    # bisection inside [lo, hi)
    active = np.flatnonzero(hi - lo > 1)
    while active.size:
        a, b = lo[active], hi[active]
        mid = (a + b) // 2
        lt_a = log_tail(a)
        p_left = np.expm1(log_tail(mid) - lt_a) / np.expm1(log_tail(b) - lt_a)
        left = rng.random(active.size) < p_left
        hi[active[left]] = mid[left]
        lo[active[~left]] = mid[~left]
        active = active[hi[active] - lo[active] > 1]

    out[idx] = lo
    return out


def exponential_geometric(p: np.ndarray, rng: np.random.Generator,
                          cap: int = JUMP_CAP) -> np.ndarray:
    """Geometric variates on ``{1, 2, ...}`` with success probability ``p``.

    Uses ``ceil(E / -log(1 - p))`` with ``E ~ Exp(1)`` so that success
    probabilities far below ``1e-18`` neither underflow nor overflow.
    """
    p = np.asarray(p, dtype=float)
    e = rng.standard_exponential(p.shape)
    rate = -np.log1p(-p)
    g = np.ceil(np.minimum(e / rate, float(cap)))
    return np.maximum(g, 1.0).astype(np.int64)


def excursion_path(n_total: int, rng: np.random.Generator,
                   draw_block: Callable[[int, np.random.Generator], tuple[np.ndarray, np.ndarray]],
                   countdown: bool, block_hint: float) -> np.ndarray:
    """State path of a chain that alternates hub visits and excursions.

    The path starts in the hub state 0.  ``draw_block(m, rng)`` returns the
    excursion targets ``j`` and excursion lengths ``r`` of ``m`` consecutive
    hub departures (``r == 0`` when the chain stays at the hub).  With
    ``countdown`` the excursion visits ``j, j-1, ..., 1`` (companion-matrix
    topology), otherwise it sits in state ``j`` for ``r`` steps.
    """
    targets, lengths = [], []
    covered = 0
    while covered < n_total:
        m = int(max(64, (n_total - covered) / block_hint * 1.05 + 64))
        j, r = draw_block(m, rng)
        r = np.minimum(r, n_total)
        blocks = 1 + r
        cum = np.cumsum(blocks)
        stop = int(np.searchsorted(cum, n_total - covered, side="left")) + 1
        stop = min(stop, m)
        targets.append(j[:stop])
        lengths.append(r[:stop])
        covered += int(cum[stop - 1])
    j = np.concatenate(targets)
    r = np.concatenate(lengths)
    blocks = 1 + r
    blocks[-1] -= int(blocks.sum()) - n_total
    starts = np.concatenate(([0], np.cumsum(blocks)[:-1]))
    total = n_total
    block_of = np.repeat(np.arange(j.size), blocks)
    offset = np.arange(total, dtype=np.int64) - starts[block_of]
    if countdown:
        states = np.where(offset == 0, 0, j[block_of] + 1 - offset)
    else:
        states = np.where(offset == 0, 0, j[block_of])
    return states
