"""Riesz potential and the three embedding experiments."""

import numpy as np
import pytest

from martree.filtration import FiltrationSpec, Martingale
from martree.norms import (
    lorentz_p1_norm,
    lp_norm,
    martingale_difference,
    martingale_level,
    weak_lp_norm,
)
from martree.riesz import (
    delta_counterexample,
    delta_martingale,
    hls_experiment,
    lorentz_sum_lhs,
    main_inequality_experiment,
    riesz_potential,
)
from martree.spacew import SubspaceW, delta_vector, random_w_martingale
from tests.test_filtration import random_martingale


class TestRieszPotential:
    def test_alpha_zero_is_identity(self):
        spec = FiltrationSpec(3, 3, 2)
        F = random_martingale(spec, 0)
        G = riesz_potential(F, 0.0)
        assert np.array_equal(G.f0, F.f0)
        for a, b in zip(G.diffs, F.diffs):
            assert np.array_equal(a, b)

    def test_levelwise_scaling(self):
        spec = FiltrationSpec(3, 4, 1)
        F = random_martingale(spec, 1)
        alpha = 0.7
        G = riesz_potential(F, alpha)
        for n in range(4):
            assert np.allclose(G.diffs[n], 3.0 ** (-alpha * (n + 1)) * F.diffs[n], rtol=1e-15)

    def test_semigroup_property(self):
        spec = FiltrationSpec(3, 4, 2)
        F = random_martingale(spec, 2)
        a, b = 0.3, 0.45
        lhs = riesz_potential(riesz_potential(F, a), b)
        rhs = riesz_potential(F, a + b)
        for x, y in zip(lhs.diffs, rhs.diffs):
            assert np.allclose(x, y, rtol=1e-12)

    def test_linear(self):
        spec = FiltrationSpec(3, 3, 1)
        F, G = random_martingale(spec, 3), random_martingale(spec, 4)
        s = riesz_potential(F + G, 0.5)
        t = riesz_potential(F, 0.5) + riesz_potential(G, 0.5)
        for x, y in zip(s.diffs, t.diffs):
            assert np.allclose(x, y, atol=1e-14)

    def test_rejects_negative_alpha(self):
        spec = FiltrationSpec(3, 2, 1)
        with pytest.raises(ValueError):
            riesz_potential(Martingale.zero(spec), -0.1)


class TestDeltaConstruction:
    def test_l1_stays_below_two(self):
        for depth in (4, 8, 11):
            spec = FiltrationSpec(3, depth, 1)
            F = delta_martingale(spec)
            for n in range(1, depth + 1):
                l1 = lp_norm(martingale_level(F.truncated(n), n), 1.0)
                assert l1 == pytest.approx(2.0 * (1.0 - 3.0 ** (-n)), rel=1e-12)

    def test_difference_norms_match_closed_form(self):
        # ||f_n||_p = m^{((p-1)/p) n} * c with c^p = m^{-p}((m-1)^p + (m-1)).
        spec = FiltrationSpec(3, 8, 1)
        F = delta_martingale(spec)
        p = 2.0
        c = (3.0 ** (-p) * (2.0**p + 2.0)) ** (1 / p)
        for n in range(1, 9):
            expected = 3.0 ** ((p - 1) / p * n) * c
            assert lp_norm(martingale_difference(F, n), p) == pytest.approx(expected, rel=1e-12)

    def test_counterexample_growth_report(self):
        spec = FiltrationSpec(3, 12, 1)
        report = delta_counterexample(2.0, spec, depths=range(4, 13))
        assert report.verdict == "GROWING"
        assert report.details["l1_bounded_by_two"]
        # increments of the power sum are exactly the derived constant 2/3
        terms = report.details["per_level_terms"]
        assert np.allclose(terms, report.details["per_level_constant"], rtol=1e-12)
        assert report.details["per_level_constant"] == pytest.approx(2 / 3, rel=1e-12)
        slope = np.polyfit(report.depths, report.ratios, 1)[0]
        assert slope == pytest.approx(2 / 3, rel=1e-12)


class TestHls:
    def test_parameter_validation(self):
        spec = FiltrationSpec(3, 6, 1)
        with pytest.raises(ValueError):
            hls_experiment(2.0, 2.0, spec)
        with pytest.raises(ValueError):
            hls_experiment(1.0, 2.0, spec)

    def test_single_scale_ratio_at_most_one(self):
        # One nonzero difference level: the local embedding gives ratio <= 1,
        # with the v_delta block keeping it bounded below across levels.
        p, q = 2.0, 4.0
        alpha = (q - p) / (q * p)
        spec = FiltrationSpec(3, 6, 1)
        ratios = []
        for n in range(1, 6):
            diffs = [np.zeros((3**k, 3, 1)) for k in range(6)]
            block = np.zeros((3**n, 3, 1))
            block[0, :, 0] = delta_vector(3)
            diffs[n] = block
            F = Martingale(spec, np.zeros(1), diffs)
            num = lp_norm(martingale_level(riesz_potential(F, alpha), 6), q)
            den = lp_norm(martingale_level(F, 6), p)
            ratios.append(num / den)
        ratios = np.array(ratios)
        assert np.all(ratios <= 1.0 + 1e-12)
        # sharpness of the exponent: the ratio does not decay with the level
        assert ratios.max() / ratios.min() == pytest.approx(1.0, rel=1e-10)

    def test_random_inputs_bounded(self):
        spec = FiltrationSpec(3, 8, 1)
        report = hls_experiment(2.0, 4.0, spec, trials=10, seed=0, depths=range(4, 9))
        assert report.verdict == "BOUNDED"


class TestMainInequality:
    def test_single_level_bounded_by_p(self):
        # One nonzero difference level reduces to the local Lorentz embedding
        # with constant p.
        p = 2.0
        spec = FiltrationSpec(3, 5, 2)
        W = SubspaceW.random(3, 2, 2, seed=1)
        rng = np.random.default_rng(2)
        for n in range(5):
            diffs = [np.zeros((3**k, 3, 2)) for k in range(5)]
            coeffs = rng.standard_normal((3**n, W.dim))
            diffs[n] = np.tensordot(coeffs, W.basis, axes=(1, 0))
            F = Martingale(spec, np.zeros(2), diffs)
            lhs = lorentz_sum_lhs(F, p)
            l1 = lp_norm(martingale_level(F, 5), 1.0)
            assert lhs <= p * l1 * (1 + 1e-10)

    def test_triangle_route(self):
        # The Lorentz norm of the Riesz image is controlled by the weighted sum
        # of difference norms: our normalization is subadditive, constant 1.
        p = 2.0
        spec = FiltrationSpec(3, 6, 2)
        W = SubspaceW.random(3, 2, 2, seed=3)
        for seed in range(5):
            F = random_w_martingale(W, spec, seed=seed)
            img = martingale_level(riesz_potential(F, (p - 1) / p), 6)
            img.values = img.values - img.values.mean(axis=0)  # drop F_0 = 0 anyway
            assert lorentz_p1_norm(img, p) <= 2.0 * lorentz_sum_lhs(F, p) + 1e-12

    def test_weak_type_endpoint(self):
        # I_{(p-1)/p} maps L_1 into weak L_p: ratios stay flat across depths.
        p = 2.0
        spec = FiltrationSpec(3, 9, 1)
        rng = np.random.default_rng(5)
        from martree.filtration import TreeMeasure, measure_to_martingale

        per_depth = []
        for d in range(4, 10):
            sub = spec.truncated(d)
            worst = 0.0
            for _ in range(5):
                mass = rng.random(sub.leaves)
                mass /= mass.sum()
                F = measure_to_martingale(TreeMeasure(sub, mass))
                img = martingale_level(riesz_potential(F, (p - 1) / p), d)
                worst = max(worst, weak_lp_norm(img, p))
            per_depth.append(worst)
        per_depth = np.array(per_depth)
        assert per_depth[-1] <= per_depth.max() * (1 + 1e-9)
        assert per_depth.max() / per_depth.min() < 2.0

    def test_delta_mode_grows(self):
        spec = FiltrationSpec(3, 10, 1)
        W = SubspaceW.from_blocks([delta_vector(3)[:, None]], 3, 1)
        report = main_inequality_experiment(W, 2.0, spec, depths=range(4, 11), use_delta=True)
        assert report.verdict == "GROWING"
        assert report.ratios[-1] / report.ratios[0] > 1.5

    def test_second_condition_w_bounded(self):
        spec = FiltrationSpec(3, 8, 2)
        W = SubspaceW.random(3, 2, 2, seed=7)
        from martree.spacew import check_second_condition

        assert check_second_condition(W)[0]
        report = main_inequality_experiment(W, 2.0, spec, trials=20, seed=0, depths=range(4, 9))
        assert report.verdict == "BOUNDED"
        running_max = np.maximum.accumulate(report.ratios)
        # no new records at the deep end
        assert running_max[-1] <= running_max[2] * (1 + 1e-9)
