"""Exact tail of the PSST first-return time to state 0.

For the chain truncated to ``n`` states the tail is

    P(R0 > k) = sum_{i=1}^{n} a^-i (1 - (q/a)^i)^k,

and for the infinite chain it becomes the alternating binomial sum

    P(R0 > k) = sum_{j=0}^{k} C(k, j) (-1)^j / (a (a/q)^j - 1).

Both are evaluated in exact rational arithmetic (GMP through ``gmpy2``); the
alternating sum loses every significant digit in floating point long before
``k`` reaches a few hundred.

These expressions count the steps spent away from state 0 *after* the first
jump: the value returned for ``k`` is the probability that a sojourn away
from state 0 lasts more than ``k`` slots, which equals ``P(R0 > k + 1)`` when
``R0`` includes the step that leaves state 0.  Consequently the value at
``k = 0`` is ``1/(a - 1)``, the probability of leaving state 0 at all, rather
than 1.
"""
from __future__ import annotations

import csv
import decimal
import math
import os
from fractions import Fraction
from typing import Iterable, Iterator

import gmpy2
from gmpy2 import mpq, mpz

INFINITE = None

#: Working precision (bits) for turning exact values into floats and logs.
_PREC = 256


def exact(x) -> mpq:
    """Exact rational from an int, Fraction, decimal string or float.

    Floats go through their shortest decimal representation, so ``20.8``
    becomes 104/5 rather than the nearest binary fraction.
    """
    if isinstance(x, float):
        x = Fraction(repr(x))
    elif isinstance(x, str):
        x = Fraction(x)
    return mpq(x)


def _check(a: mpq, q: mpq) -> None:
    if not a > q > 1:
        raise ValueError(f"need a > q > 1, got a={a}, q={q}")


def _split(a, q):
    """Integers with ``a = A/B`` and ``q/a = N/D``, both in lowest terms."""
    a, q = exact(a), exact(q)
    _check(a, q)
    r = q / a
    return a, q, mpz(a.numerator), mpz(a.denominator), mpz(r.numerator), mpz(r.denominator)


def return_tail_finite(a, q, n: int, k: int) -> mpq:
    """``sum_{i=1}^n a^-i (1 - (q/a)^i)^k`` for the ``n``-state chain, exactly."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if k < 0:
        raise ValueError("k must be nonnegative")
    a, q, A, B, N, D = _split(a, q)
    # common denominator A^n D^(nk); Horner in x = A D^k
    x = A * D ** k
    acc = mpz(0)
    bi, di, ni = mpz(1), mpz(1), mpz(1)
    for _ in range(n):
        bi *= B
        di *= D
        ni *= N
        acc = acc * x + bi * (di - ni) ** k
    return mpq(acc, x ** n)


def return_tail_finite_many(a, q, n: int, ks: Iterable[int],
                            precision: int = _PREC) -> dict[int, gmpy2.mpfr]:
    """Finite-chain tails for several ``k`` in ``precision``-bit floating point.

    Every term of the finite sum is positive, so rounding error stays at the
    working precision; this is much cheaper than the exact rational for
    large ``n * k``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    ks = sorted(set(int(k) for k in ks))
    if ks and ks[0] < 0:
        raise ValueError("k must be nonnegative")
    a, q = exact(a), exact(q)
    _check(a, q)
    with gmpy2.context(gmpy2.get_context(), precision=precision):
        inv_a = 1 / gmpy2.mpfr(a)
        r = gmpy2.mpfr(q) / gmpy2.mpfr(a)
        weights, bases = [], []
        wi, ri = gmpy2.mpfr(1), gmpy2.mpfr(1)
        for _ in range(n):
            wi *= inv_a
            ri *= r
            weights.append(wi)
            bases.append(1 - ri)
        return {k: gmpy2.fsum([w * b ** k for w, b in zip(weights, bases)]) for k in ks}


class _AlternatingSum:
    """Precomputed terms ``1/(a (a/q)^j - 1)`` over one common denominator."""

    def __init__(self, a, q, j_max: int):
        a, q, A, B, N, D = _split(a, q)
        dens, nums = [], []
        dj, nj = mpz(1), mpz(1)
        for _ in range(j_max + 1):
            # 1/(a (a/q)^j - 1) = N^j B / (D^j A - N^j B)
            dens.append(dj * A - nj * B)
            nums.append(nj * B)
            dj *= D
            nj *= N
        common = mpz(1)
        for d in dens:
            common = gmpy2.lcm(common, d)
        self.common = common
        self.terms = [nj * (common // d) for nj, d in zip(nums, dens)]

    def numerator(self, k: int, binom: list[int], paired: bool) -> mpz:
        t = self.terms
        if paired:
            # k odd: pair j even with k - j
            return sum((binom[j] * (t[j] - t[k - j]) for j in range(0, k, 2)), mpz(0))
        total = mpz(0)
        for j in range(k + 1):
            term = binom[j] * t[j]
            total = total - term if j & 1 else total + term
        return total


def _binomial_rows(ks: list[int]) -> Iterator[tuple[int, list[int]]]:
    want = set(ks)
    row = [1]
    for k in range(max(ks) + 1):
        if k > 0:
            row = [1] + [row[j - 1] + row[j] for j in range(1, k)] + [1]
        if k in want:
            yield k, row


def _infinite_numerators(a, q, ks: Iterable[int], form: str = "auto"):
    ks = sorted(set(int(k) for k in ks))
    if not ks:
        return
    if ks[0] < 0:
        raise ValueError("k must be nonnegative")
    if form not in ("auto", "direct", "paired"):
        raise ValueError(f"unknown form {form!r}")
    alt = _AlternatingSum(a, q, ks[-1])
    for k, row in _binomial_rows(ks):
        paired = k % 2 == 1 and form != "direct"
        if form == "paired" and k % 2 == 0:
            raise ValueError("the paired form only exists for odd k")
        yield k, alt.numerator(k, row, paired), alt.common


def return_tail_infinite(a, q, k: int, form: str = "auto") -> mpq:
    """Tail for the infinite chain via the alternating binomial sum.

    ``form="auto"`` uses the paired-difference form for odd ``k`` and the
    direct sum otherwise; ``"direct"`` and ``"paired"`` force one of them.
    """
    (_, num, den), = _infinite_numerators(a, q, [k], form)
    return mpq(num, den)


def return_tail_infinite_many(a, q, ks: Iterable[int]) -> dict[int, mpq]:
    """Exact tails for several ``k`` sharing one set of precomputed terms."""
    return {k: mpq(num, den) for k, num, den in _infinite_numerators(a, q, ks)}


def return_tail(a, q, k: int, n: int | None = INFINITE) -> mpq:
    return return_tail_infinite(a, q, k) if n is INFINITE else return_tail_finite(a, q, n, k)


def _ratio(num, den) -> gmpy2.mpfr:
    with gmpy2.context(gmpy2.get_context(), precision=_PREC):
        return gmpy2.mpfr(num) / gmpy2.mpfr(den)


def _tails_mpfr(a, q, ks: list[int], n: int | None) -> dict[int, gmpy2.mpfr]:
    if n is INFINITE:
        return {k: _ratio(num, den) for k, num, den in _infinite_numerators(a, q, ks)}
    out = {}
    for k in ks:
        v = return_tail_finite(a, q, n, k)
        out[k] = _ratio(v.numerator, v.denominator)
    return out


def heavy_tail_probe(a, q, epsilon: float, ks: Iterable[int],
                     n: int | None = INFINITE) -> list[tuple[int, float]]:
    """``(k, P(R0 > k) e^(epsilon k))`` over ``ks``.

    For a heavy-tailed return time this product grows without bound for
    every ``epsilon > 0``; for the finite chain it eventually decays.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    ks = sorted(set(int(k) for k in ks))
    tails = _tails_mpfr(a, q, ks, n)
    with gmpy2.context(gmpy2.get_context(), precision=_PREC):
        return [(k, float(tails[k] * gmpy2.exp(gmpy2.mpfr(epsilon) * k))) for k in ks]


def loglog_table(a, q, k_max: int, n: int | None = INFINITE) -> list[tuple[int, float, float, float]]:
    """Rows ``(k, tail, log10 k, log10 tail)`` for ``k = 0..k_max``.

    ``log10 k`` is ``-inf`` on the ``k = 0`` row.
    """
    if not 0 <= k_max <= 10**4:
        raise ValueError("k_max must lie in [0, 10000]")
    ks = list(range(k_max + 1))
    tails = _tails_mpfr(a, q, ks, n)
    rows = []
    with gmpy2.context(gmpy2.get_context(), precision=_PREC):
        for k in ks:
            t = tails[k]
            rows.append((k, float(t), -math.inf if k == 0 else math.log10(k),
                         float(gmpy2.log10(t))))
    return rows


def format_decimal(value, digits: int = 30) -> str:
    """Render an exact or mpfr value with ``digits`` significant digits."""
    if isinstance(value, float):
        value = exact(value)
    elif not isinstance(value, (mpq, Fraction)):
        # mpfr keeps its own precision; as_integer_ratio is exact
        value = mpq(*value.as_integer_ratio())
    with decimal.localcontext() as ctx:
        ctx.prec = digits
        d = decimal.Decimal(int(value.numerator)) / decimal.Decimal(int(value.denominator))
    return f"{d:.{digits - 1}e}"


def write_loglog_csv(a, q, k_max: int, path: str | os.PathLike,
                     n: int | None = INFINITE) -> None:
    """CSV with columns ``k, tail, log10_k, log10_tail``."""
    ks = list(range(k_max + 1))
    tails = _tails_mpfr(a, q, ks, n)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "tail", "log10_k", "log10_tail"])
        with gmpy2.context(gmpy2.get_context(), precision=_PREC):
            for k in ks:
                t = tails[k]
                log_k = "-inf" if k == 0 else repr(math.log10(k))
                w.writerow([k, format_decimal(t), log_k, repr(float(gmpy2.log10(t)))])
