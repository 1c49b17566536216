from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmptraffic.models import (ArrowsmithBarencoParams, BernoulliParams, CleggDodsonParams,
                               FgnParams, InfeasibleParameters, PsstParams, WangParams,
                               ab_acf_asymptote, ab_fit_from_empirical, ab_mean,
                               cd_equilibrium_tail, cd_threshold, cd_transition_prob, fgn,
                               fgn_autocovariance, generate, generate_states, make_rng,
                               psst_equilibrium, psst_fit_q, psst_mean, read_series, run_lengths,
                               wang_equilibrium, wang_fit_a, wang_mean, wang_transition_prob,
                               write_series, zeta)
from mmptraffic.models._sampling import sample_jumps

# Reference values computed with mpmath at 50 digits and frozen here.
ZETA_1_5 = 2.6123753486854883
ZETA_1_4 = 3.1055472779775810
ZETA_1_1 = 10.584448464950810


class TestZeta:
    @pytest.mark.parametrize("s, ref", [(1.5, ZETA_1_5), (1.4, ZETA_1_4), (1.1, ZETA_1_1),
                                        (2.0, math.pi ** 2 / 6)])
    def test_values(self, s, ref):
        assert zeta(s) == pytest.approx(ref, rel=1e-12)

    def test_rejects_pole(self):
        with pytest.raises(ValueError):
            zeta(1.0)


class TestWang:
    def test_transition_probs(self):
        p = WangParams(0.5, 0.5)
        assert wang_transition_prob(p, 0) == pytest.approx(0.5)
        assert wang_transition_prob(p, 1) == pytest.approx(0.5 * (1 - 2 ** -1.5), rel=1e-14)
        assert wang_transition_prob(p, 1) == pytest.approx(0.3232233, abs=1e-7)

    def test_partial_sums_telescope(self):
        p = WangParams(0.5, 0.5)
        total = math.fsum(wang_transition_prob(p, np.arange(10**6 + 1)))
        assert total == pytest.approx(1 - 0.5 / (10**6 + 1) ** 1.5, abs=1e-12)

    def test_rejects_negative_k(self):
        with pytest.raises(ValueError):
            wang_transition_prob(WangParams(0.5, 0.5), -1)

    def test_mean(self):
        assert wang_mean(WangParams(0.5, 0.5)) == pytest.approx(1 - 1 / (1 + 0.5 * ZETA_1_5), rel=1e-12)
        # quoted as 0.56636 to five figures; the zeta oracle gives 0.566384
        assert wang_mean(WangParams(0.5, 0.5)) == pytest.approx(0.56636, abs=1e-4)
        assert wang_mean(WangParams(0.03341, 0.4)) == pytest.approx(0.094, abs=1e-4)
        assert wang_mean(WangParams(1e-12, 0.5)) == pytest.approx(0.0, abs=1e-11)

    def test_fit(self):
        assert wang_fit_a(0.094, 0.4) == pytest.approx(0.094 / (0.906 * ZETA_1_4), rel=1e-12)
        assert wang_fit_a(0.094, 0.4) == pytest.approx(0.03341, abs=1e-5)
        assert wang_fit_a(1e-9, 0.4) < 1e-9

    def test_fit_feasibility(self):
        # 9 / zeta(1.1) = 0.850 is still inside (0, 1)
        assert wang_fit_a(0.9, 0.1) == pytest.approx(9 / ZETA_1_1, rel=1e-12)
        with pytest.raises(InfeasibleParameters):
            wang_fit_a(0.95, 0.1)

    @given(st.floats(0.01, 0.6), st.floats(0.05, 1.5))
    def test_fit_inverts_mean(self, mu, alpha):
        try:
            a = wang_fit_a(mu, alpha)
        except InfeasibleParameters:
            return
        assert wang_mean(WangParams(a, alpha)) == pytest.approx(mu, abs=1e-10)

    def test_equilibrium(self):
        p = WangParams(0.5, 0.5)
        pi0 = 1 - wang_mean(p)
        assert wang_equilibrium(p, 0) == pytest.approx(pi0)
        assert wang_equilibrium(p, 1) == pytest.approx(pi0 * 0.5)
        k = np.arange(10**5 + 1)
        # remaining tail mass beyond 10^5 is pi0 * a * zeta-tail ~ 3e-3 * pi0, so
        # compare with the closed form including that tail
        head = math.fsum(wang_equilibrium(p, k))
        tail = pi0 * 0.5 * (zeta(1.5) - math.fsum(np.arange(1, 10**5 + 1, dtype=float) ** -1.5))
        assert head + tail == pytest.approx(1.0, abs=1e-9)

    def test_validation(self):
        for a, alpha in ((0.0, 0.5), (1.0, 0.5), (0.5, 0.0), (-0.1, 0.5)):
            with pytest.raises(ValueError):
                WangParams(a, alpha)

    def test_hurst_roundtrip(self):
        p = WangParams.from_hurst(0.8, 0.094)
        assert p.alpha == pytest.approx(0.4)
        assert p.mean() == pytest.approx(0.094, abs=1e-12)


class TestCleggDodson:
    def test_transition_probs(self):
        p = CleggDodsonParams(0.906, 0.4)
        assert cd_transition_prob(p, 0) == pytest.approx(0.9748771, abs=1e-7)
        assert cd_transition_prob(p, 1) == pytest.approx(0.0133506, abs=1e-7)
        c = 0.094 / 0.906
        assert cd_transition_prob(p, 5) == pytest.approx(
            c * (5 ** -0.4 - 2 * 6 ** -0.4 + 7 ** -0.4), rel=1e-10)

    def test_threshold(self):
        assert cd_threshold(0.4) == pytest.approx(0.1949389, abs=1e-7)
        t = cd_threshold(0.4)
        with pytest.raises(ValueError):
            CleggDodsonParams(t, 0.4)
        p = CleggDodsonParams(t + 1e-9, 0.4)
        assert cd_transition_prob(p, 0) >= 0

    def test_normalisation(self):
        p = CleggDodsonParams(0.906, 0.4)
        k = np.arange(10**6 + 1)
        # sum f_0..f_K = 1 - c((K+1)^-a - (K+2)^-a)
        c = 0.094 / 0.906
        K = 10**6
        expect = 1 - c * ((K + 1) ** -0.4 - (K + 2) ** -0.4)
        assert math.fsum(cd_transition_prob(p, k)) == pytest.approx(expect, abs=1e-12)

    def test_equilibrium_tail(self):
        p = CleggDodsonParams(0.9, 0.5)
        assert cd_equilibrium_tail(p, 1) == pytest.approx(0.1)
        assert cd_equilibrium_tail(p, 2) == pytest.approx(0.0707107, abs=1e-7)
        # per-state pi_i summed from k matches the closed form
        i = np.arange(2, 10**6)
        partial = math.fsum(p.equilibrium(i))
        assert partial + cd_equilibrium_tail(p, 10**6) == pytest.approx(cd_equilibrium_tail(p, 2), rel=1e-9)
        with pytest.raises(ValueError):
            cd_equilibrium_tail(p, 0)

    def test_off_runs_match_closed_form(self):
        # an excursion to state j is an on run of length j
        p = CleggDodsonParams(0.906, 0.4)
        s = generate(p, 10**6, 2024)
        on, _ = run_lengths(s)
        assert (on >= 1).all()
        for k in (2, 5, 20, 100):
            expect = math.exp(p.log_jump_tail(np.array([k]))[0]) / (1 - cd_transition_prob(p, 0))
            se = math.sqrt(expect * (1 - expect) / on.size)
            assert abs((on >= k).mean() - expect) < 4 * se

    def test_mean_dispersion_at_high_hurst(self):
        p = CleggDodsonParams(0.5, 0.1)
        means = [generate(p, 10**6, s).mean() for s in (1, 2, 3)]
        assert max(means) - min(means) > 0.01


class TestPsst:
    def test_means(self):
        assert psst_mean(PsstParams(500, 10.4)) == pytest.approx(0.0961538, abs=1e-7)
        assert psst_mean(PsstParams(500, 10.2)) == pytest.approx(0.0980392, abs=1e-7)
        assert psst_mean(PsstParams(3, 2, "A")) == pytest.approx(0.5)

    def test_fit(self):
        assert psst_fit_q(1 / 10.4, "B") == pytest.approx(10.4)
        assert psst_fit_q(0.5, "A") == pytest.approx(2.0)
        assert psst_fit_q(0.094, "A") == pytest.approx(1.1037528, abs=1e-7)
        with pytest.raises(ValueError):
            psst_fit_q(0.5, "C")

    def test_equilibrium(self):
        assert psst_equilibrium(PsstParams(3, 2), 0) == pytest.approx(0.5)
        assert psst_equilibrium(PsstParams(500, 10.4), 2) == pytest.approx(0.0083566, abs=1e-7)
        assert math.fsum(psst_equilibrium(PsstParams(3, 2), np.arange(201))) == pytest.approx(1, abs=1e-12)

    def test_validation(self):
        for a, q in ((2.0, 1.5), (3, 3), (3, 1), (1.9, 1.2)):
            with pytest.raises(ValueError):
                PsstParams(a, q)

    def test_stay_probability_is_row_stochastic(self):
        p = PsstParams(20.8, 10.4)
        row, rest = p.transition_row(0, 2000)
        assert row[0] == pytest.approx(1 - 1 / 19.8)
        assert row.sum() + rest == pytest.approx(1.0, abs=1e-12)

    def test_variants_are_complements(self):
        a = PsstParams(50, 3, "A")
        b = PsstParams(50, 3, "B")
        states = generate_states(b, 10**5, 9)
        assert np.array_equal(a.emit(states), 1 - b.emit(states))
        assert np.array_equal(generate(a, 10**5, 9), 1 - generate(b, 10**5, 9))


class TestTransitions:
    @pytest.mark.parametrize("model", [WangParams(0.5, 0.5), CleggDodsonParams(0.906, 0.4),
                                       PsstParams(500, 10.4)])
    def test_rows_sum_to_one(self, model):
        k_max = 10**4
        for state in list(range(0, 50)) + [999, 5000, 10**4]:
            row, rest = model.transition_row(state, k_max)
            assert np.all(row >= 0) and rest >= 0
            assert row.sum() + rest == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("model", [WangParams(0.5, 0.5), CleggDodsonParams(0.906, 0.4)])
    def test_companion_steps_down(self, model):
        s = generate_states(model, 10**5, 3)
        i = np.flatnonzero(s[:-1] > 0)
        assert np.all(s[i + 1] == s[i] - 1)

    def test_ab_successors(self):
        p = ab_fit_from_empirical({1: 1, 3: 1}, {2: 1})
        assert p.successors(3) == {2: 1.0}
        assert p.successors(-2) == {-1: 1.0}
        assert p.successors(1) == {-2: 1.0}
        assert p.successors(-1) == {1: 0.5, 3: 0.5}


class TestSampler:
    def test_tail_law(self):
        p = WangParams(0.3, 0.4)
        j = sample_jumps(p.log_jump_tail, 10**6, make_rng(5))
        for k in (1, 10, 1000):
            expect = 0.3 * k ** -1.4
            se = math.sqrt(expect * (1 - expect) / j.size)
            assert abs((j >= k).mean() - expect) < 4 * se

    def test_tail_law_near_threshold(self):
        # small alpha pushes most of the mass far out; check deep tail frequencies
        p = CleggDodsonParams(0.5, 0.05)
        j = sample_jumps(p.log_jump_tail, 10**6, make_rng(6))
        assert np.all(j >= 0)
        for k in (10, 1000, 10**5):
            expect = math.exp(p.log_jump_tail(np.array([k]))[0])
            se = math.sqrt(expect * (1 - expect) / j.size)
            assert abs((j >= k).mean() - expect) < 4 * se + 1e-12


class TestArrowsmithBarenco:
    def test_means(self):
        assert ab_mean(ab_fit_from_empirical({1: 1}, {1: 1})) == pytest.approx(0.5)
        assert ab_mean(ab_fit_from_empirical({1: 1}, {3: 1})) == pytest.approx(0.25)
        assert ab_mean(ab_fit_from_empirical({2: 5}, {2: 7})) == pytest.approx(0.5)
        assert ab_mean(ab_fit_from_empirical({1: 0.5, 3: 0.5}, {1: 1.0})) == pytest.approx(2 / 3)

    def test_empirical_mean(self):
        p = ab_fit_from_empirical({1: 1}, {3: 1})
        s = generate(p, 10**6, 4)
        assert abs(s.mean() - 0.25) < 0.002

    def test_validation(self):
        with pytest.raises(ValueError):
            ab_fit_from_empirical({}, {1: 1})
        with pytest.raises(ValueError):
            ArrowsmithBarencoParams(np.array([0, 0.5, 0.4]), np.array([0, 1.0]))
        with pytest.raises(ValueError):
            ArrowsmithBarencoParams(np.array([0.1, 0.9]), np.array([0, 1.0]))

    def test_refit_roundtrip(self):
        rng = make_rng(8)
        trains = rng.geometric(0.3, 5000)
        gaps = rng.geometric(0.05, 5000)
        p = ab_fit_from_empirical(np.bincount(trains), np.bincount(gaps))
        s = generate(p, 10**6, 11)
        q = ArrowsmithBarencoParams.from_series(s)
        assert q.mean_on == pytest.approx(p.mean_on, rel=0.05)
        assert q.mean_off == pytest.approx(p.mean_off, rel=0.05)

    def test_acf_asymptote(self):
        assert ab_acf_asymptote(0.3, 0.7, 1, 1, 0.5, 4).beta == 0.3
        eq = ab_acf_asymptote(0.5, 0.5, 1, 2, 0.3, 4)
        assert eq.case == "equal"
        r = ab_acf_asymptote(0.6, 0.4, 1, 1, 0.5, 4)
        assert r.case == "right"
        assert r.K == pytest.approx(0.5 / (4 * (0.4 - 1) * 0.5))
        assert r.K < 0
        with pytest.raises(ValueError):
            ab_acf_asymptote(1.2, 0.5, 1, 1, 0.5, 4)


class TestBaselines:
    def test_bernoulli(self):
        assert generate(BernoulliParams(1.0), 1000, 1).all()
        assert not generate(BernoulliParams(0.0), 1000, 1).any()
        s = generate(BernoulliParams(0.094), 10**6, 3)
        assert abs(s.mean() - 0.094) < 3 * math.sqrt(0.094 * 0.906 / 10**6)
        x = s - s.mean()
        r1 = (x[1:] @ x[:-1]) / (x @ x)
        assert abs(r1) < 3 / math.sqrt(s.size)

    def test_fgn_covariance(self):
        g = fgn_autocovariance(0.8, 4)
        assert g[0] == 1.0
        assert g[1] == pytest.approx(0.5 * (2 ** 1.6 - 2))
        x = np.stack([fgn(64, 0.8, make_rng(i)) for i in range(4000)])
        emp = np.mean(x[:, :-1] * x[:, 1:])
        assert emp == pytest.approx(g[1], abs=0.03)

    def test_fgn_length_checks(self):
        with pytest.raises(ValueError):
            fgn(1, 0.8, make_rng(0))

    def test_fgn_onoff(self):
        assert FgnParams(0.8, 0.5).threshold == pytest.approx(0.0, abs=1e-12)
        s = generate(FgnParams(0.8, 0.094), 10**6, 12)
        assert abs(s.mean() - 0.094) < 0.01
        with pytest.raises(ValueError):
            FgnParams(0.4, 0.5)


class TestGenerate:
    @pytest.mark.parametrize("model", [WangParams(0.5, 0.5), CleggDodsonParams(0.906, 0.4),
                                       PsstParams(500, 10.4), BernoulliParams(0.3),
                                       FgnParams(0.7, 0.3),
                                       ab_fit_from_empirical({1: 1, 4: 1}, {2: 1, 9: 1})])
    def test_pure_function(self, model):
        a = generate(model, 5000, 42)
        b = generate(model, 5000, 42)
        assert a.size == 5000 and set(np.unique(a)) <= {0, 1}
        assert np.array_equal(a, b)
        assert not np.array_equal(a, generate(model, 5000, 43)) or a.std() == 0

    def test_series_io(self, tmp_path):
        s = generate(BernoulliParams(0.5), 1000, 1)
        write_series(s, tmp_path / "s.txt")
        raw = (tmp_path / "s.txt").read_bytes()
        assert b"\n" not in raw and len(raw) == 1000
        assert np.array_equal(read_series(tmp_path / "s.txt"), s)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 3000), st.integers(0, 2**32))
    def test_length_and_alphabet(self, n, seed):
        s = generate(WangParams(0.4, 0.7), n, seed, warmup=100)
        assert s.size == n and s.dtype == np.int8
        assert np.isin(s, (0, 1)).all()
