from __future__ import annotations

import csv
import math
from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from mmptraffic import psst_tail
from mmptraffic.psst_tail import (exact, format_decimal, heavy_tail_probe, loglog_table,
                                  return_tail, return_tail_finite, return_tail_finite_many,
                                  return_tail_infinite, return_tail_infinite_many,
                                  write_loglog_csv)


def brute_infinite(a: Fraction, q: Fraction, k: int, terms: int = 400) -> Fraction:
    """Truncated geometric-series form, summed by hand in Fractions."""
    r = q / a
    total = Fraction(0)
    for j in range(k + 1):
        total += math.comb(k, j) * (-1) ** j * (r ** j) / a / (1 - r ** j / a)
    return total


class TestClosedForms:
    # hand-derived: sum_i 3^-i (1 - (2/3)^i)^k for k = 0, 1, 2
    @pytest.mark.parametrize("k, value", [(0, mpq(1, 2)), (1, mpq(3, 14)), (2, mpq(33, 322))])
    def test_small_k(self, k, value):
        assert return_tail_infinite(3, 2, k) == value

    def test_k0_is_leave_probability(self):
        assert return_tail_infinite("20.8", "10.4", 0) == mpq(1) / (exact("20.8") - 1)

    @pytest.mark.parametrize("k", [0, 1, 2, 5, 11])
    def test_against_fraction_oracle(self, k):
        a, q = Fraction(104, 5), Fraction(52, 5)
        assert Fraction(int(return_tail_infinite("20.8", "10.4", k).numerator),
                        int(return_tail_infinite("20.8", "10.4", k).denominator)) \
            == brute_infinite(a, q, k)

    def test_direct_and_paired_agree(self):
        for k in (1, 3, 9, 51):
            assert return_tail_infinite(3, 2, k, "direct") == return_tail_infinite(3, 2, k, "paired")
        with pytest.raises(ValueError):
            return_tail_infinite(3, 2, 4, "paired")
        with pytest.raises(ValueError):
            return_tail_infinite(3, 2, 4, "sideways")

    def test_many_matches_single(self):
        many = return_tail_infinite_many(3, 2, [0, 3, 10, 40])
        for k, v in many.items():
            assert v == return_tail_infinite(3, 2, k)


class TestFiniteChain:
    def test_single_state(self):
        # one state: weight 1/a, base 1 - q/a
        assert return_tail_finite(3, 2, 1, 4) == mpq(1, 3) * mpq(1, 3) ** 4

    def test_converges_to_infinite(self):
        for k in (0, 5, 30):
            inf = return_tail_infinite(3, 2, k)
            fin = return_tail_finite(3, 2, 200, k)
            assert fin < inf
            assert float((inf - fin) / inf) < 1e-60

    def test_mpfr_version(self):
        many = return_tail_finite_many(3, 2, 50, [0, 7, 20])
        for k, v in many.items():
            ex = return_tail_finite(3, 2, 50, k)
            assert abs(float(v) - float(ex)) <= 1e-15 * float(ex)

    def test_validation(self):
        with pytest.raises(ValueError):
            return_tail_finite(3, 2, 0, 1)
        with pytest.raises(ValueError):
            return_tail_finite(3, 2, 5, -1)
        with pytest.raises(ValueError):
            return_tail_infinite(2, 3, 1)
        with pytest.raises(ValueError):
            return_tail_finite_many(3, 2, 5, [-1])

    def test_dispatch(self):
        assert return_tail(3, 2, 4) == return_tail_infinite(3, 2, 4)
        assert return_tail(3, 2, 4, n=10) == return_tail_finite(3, 2, 10, 4)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(3, 60), st.integers(2, 40), st.integers(1, 40))
    def test_monotone_in_k(self, a, q_frac, k):
        q = Fraction(a - 1) * q_frac / 41 + 1  # 1 < q < a
        t = return_tail_infinite_many(a, q, [k - 1, k])
        assert 0 < t[k] < t[k - 1]


class TestProbe:
    def test_infinite_grows(self):
        vals = [v for _, v in heavy_tail_probe(3, 2, 0.05, range(100, 160))]
        assert all(y > x for x, y in zip(vals, vals[1:]))

    def test_finite_eventually_decays(self):
        vals = [v for _, v in heavy_tail_probe(3, 2, 0.05, range(100, 110), n=5)]
        assert all(y < x for x, y in zip(vals, vals[1:]))

    def test_rejects_negative_epsilon(self):
        with pytest.raises(ValueError):
            heavy_tail_probe(3, 2, -0.1, [1])


class TestOutput:
    def test_format_decimal(self):
        assert format_decimal(mpq(1, 3), 5) == "3.3333e-1"
        assert format_decimal(0.5, 3) == "5.00e-1"
        tiny = return_tail_infinite(3, 2, 600)
        text = format_decimal(tiny)
        assert float(text) == pytest.approx(float(tiny), rel=1e-14)

    def test_loglog_table(self):
        rows = loglog_table(3, 2, 10)
        assert rows[0][2] == -math.inf
        assert rows[0][1] == pytest.approx(0.5)
        assert rows[10][3] == pytest.approx(math.log10(rows[10][1]))
        with pytest.raises(ValueError):
            loglog_table(3, 2, 10**5)

    def test_csv(self, tmp_path):
        write_loglog_csv(3, 2, 5, tmp_path / "t.csv")
        with open(tmp_path / "t.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["k", "tail", "log10_k", "log10_tail"]
        assert len(rows) == 7
        assert float(rows[2][1]) == pytest.approx(3 / 14, rel=1e-15)
        assert rows[1][2] == "-inf"

    def test_exact_parses_decimal_strings(self):
        assert exact(20.8) == mpq(104, 5)
        assert exact("10.4") == mpq(52, 5)
        assert psst_tail.exact(7) == 7
