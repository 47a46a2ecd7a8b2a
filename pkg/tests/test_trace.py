"""Frostman constants, trace embedding experiments, and the divergent pair."""

import numpy as np
import pytest

from martree.filtration import (
    FiltrationSpec,
    TreeMeasure,
    measure_to_martingale,
)
from martree.kappa import kappa_of
from martree.norms import lp_norm, lp_nu_norm, martingale_level
from martree.riesz import riesz_potential
from martree.spacew import SubspaceW, check_second_condition, delta_vector
from martree.trace import (
    build_sharpness_trace_measure,
    capped_cascade_measure,
    frostman_constant,
    trace_experiment_l1,
    trace_experiment_p,
)


def delta_w():
    return SubspaceW.from_blocks([delta_vector(3)[:, None]], 3, 1)


def span_w():
    return SubspaceW.from_blocks([np.array([1.0, -1.0, 0.0])[:, None]], 3, 1)


class TestFrostmanConstant:
    def test_uniform_alpha_zero(self):
        spec = FiltrationSpec(3, 5, 1)
        nu = TreeMeasure(spec, np.full(spec.leaves, 1.0 / spec.leaves))
        assert frostman_constant(nu, 0.0, 1.0) == pytest.approx(1.0, rel=1e-12)

    def test_unit_leaf_mass_grows(self):
        for depth in (3, 5, 7):
            spec = FiltrationSpec(3, depth, 1)
            mass = np.zeros(spec.leaves)
            mass[0] = 1.0
            nu = TreeMeasure(spec, mass)
            alpha = 0.5
            assert frostman_constant(nu, alpha, 1.0) == pytest.approx(
                3.0 ** ((1 - alpha) * depth), rel=1e-12
            )

    def test_monotone_in_alpha(self):
        spec = FiltrationSpec(3, 4, 1)
        rng = np.random.default_rng(0)
        mass = rng.random(spec.leaves)
        mass /= mass.sum()
        nu = TreeMeasure(spec, mass)
        values = [frostman_constant(nu, a, 2.0) for a in (0.9, 0.6, 0.3, 0.0)]
        assert all(x <= y * (1 + 1e-12) for x, y in zip(values, values[1:]))

    def test_rejects_signed(self):
        spec = FiltrationSpec(3, 2, 1)
        with pytest.raises(ValueError):
            frostman_constant(TreeMeasure(spec, np.linspace(-1, 1, 9)), 0.5, 1.0)

    def test_root_atom_lower_bound(self):
        # the level-0 atom forces C >= nu(T)^{1/p}
        spec = FiltrationSpec(3, 4, 1)
        rng = np.random.default_rng(4)
        for _ in range(10):
            nu = TreeMeasure(spec, rng.random(spec.leaves))
            for alpha, p in ((0.3, 1.0), (0.7, 2.0)):
                assert frostman_constant(nu, alpha, p) >= nu.total() ** (1 / p) * (1 - 1e-12)


class TestCappedCascade:
    def test_cap_and_mass(self):
        spec = FiltrationSpec(3, 8, 1)
        for seed in range(10):
            nu = capped_cascade_measure(spec, alpha=0.9, p=1.0, seed=seed)
            assert nu.total() == pytest.approx(1.0, abs=1e-12)
            assert np.all(nu.leaf_mass >= 0)
            assert frostman_constant(nu, 0.9, 1.0) <= 1.0 + 1e-9

    def test_cap_p_two(self):
        spec = FiltrationSpec(3, 6, 1)
        nu = capped_cascade_measure(spec, alpha=0.8, p=2.0, seed=3)
        assert frostman_constant(nu, 0.8, 2.0) <= 1.0 + 1e-9

    def test_deterministic(self):
        spec = FiltrationSpec(3, 5, 1)
        a = capped_cascade_measure(spec, 0.9, 1.0, seed=7)
        b = capped_cascade_measure(spec, 0.9, 1.0, seed=7)
        assert np.array_equal(a.leaf_mass, b.leaf_mass)

    def test_infeasible_cap_rejected(self):
        spec = FiltrationSpec(3, 4, 1)
        with pytest.raises(ValueError):
            capped_cascade_measure(spec, alpha=0.2, p=2.0, seed=0)


class TestTraceP:
    def test_zero_measure_zero_ratios(self):
        spec = FiltrationSpec(3, 6, 1)
        nu = TreeMeasure(spec, np.zeros(spec.leaves))
        report = trace_experiment_p(nu, span_w(), alpha=0.5, p=2.0, trials=3, seed=0, depths=range(4, 7))
        assert np.all(report.ratios == 0.0)

    def test_uniform_reference_reduces_to_plain_lp(self):
        p = 2.0
        alpha = (p - 1) / p
        spec = FiltrationSpec(3, 6, 1)
        nu = TreeMeasure(spec, np.full(spec.leaves, 1.0 / spec.leaves))
        W = span_w()
        from martree.spacew import random_w_martingale

        F = random_w_martingale(W, spec, seed=1)
        img = martingale_level(riesz_potential(F, alpha), 6)
        assert lp_nu_norm(img, nu, p) == pytest.approx(lp_norm(img, p), rel=1e-12)

    def test_cascade_reference_bounded(self):
        p = 2.0
        spec = FiltrationSpec(3, 9, 2)
        nu = capped_cascade_measure(FiltrationSpec(3, 9, 1), alpha=(p - 1) / p + 0.1, p=p, seed=5)
        W = SubspaceW.random(3, 2, 2, seed=7)
        assert check_second_condition(W)[0]
        report = trace_experiment_p(nu, W, alpha=(p - 1) / p + 0.1, p=p, trials=10, seed=2, depths=range(4, 10))
        assert report.verdict == "BOUNDED"


class TestTraceL1:
    def test_zero_subspace_vacuous(self):
        spec = FiltrationSpec(3, 6, 1)
        nu = capped_cascade_measure(spec, alpha=0.9, p=1.0, seed=1)
        report = trace_experiment_l1(nu, SubspaceW.zero(3, 1), alpha=0.9, trials=2, seed=0, depths=range(4, 7))
        assert np.all(report.ratios == 0.0)
        assert report.verdict == "BOUNDED"

    def test_span_w_above_threshold_bounded(self):
        # alpha = 0.9 clears -kappa'(1)/log 3 = 2 log 2/(3 log 3) ~ 0.4206
        spec = FiltrationSpec(3, 9, 1)
        nu = capped_cascade_measure(spec, alpha=0.9, p=1.0, seed=2)
        report = trace_experiment_l1(nu, span_w(), alpha=0.9, trials=12, seed=1, depths=range(4, 10))
        assert report.verdict == "BOUNDED"
        running = np.maximum.accumulate(report.ratios)
        assert running[-1] <= running[2] * (1 + 1e-9)
        assert report.details["interp_bound_holds"]
        if report.details["tree_constants"]:
            assert np.isfinite(max(report.details["tree_constants"]))

    def test_below_threshold_reported_not_asserted(self):
        # exploratory: nothing is guaranteed either way below the threshold
        spec = FiltrationSpec(3, 7, 1)
        nu = capped_cascade_measure(spec, alpha=0.2, p=1.0, seed=3)
        report = trace_experiment_l1(nu, span_w(), alpha=0.2, trials=5, seed=4, depths=range(4, 8))
        assert report.verdict in ("BOUNDED", "GROWING")


class TestNecessityWitness:
    def test_indicator_martingale_attains_frostman_ratio(self):
        # per atom: the uniform-on-omega density martingale drives the ratio
        # above (1 - 1/m) times that atom's Frostman quotient.
        p, alpha = 2.0, 0.5
        spec = FiltrationSpec(3, 4, 1)
        rng = np.random.default_rng(9)
        mass = rng.random(spec.leaves)
        mass /= mass.sum()
        nu = TreeMeasure(spec, mass)
        for level in range(spec.depth + 1):
            level_mass = nu.level_mass(level)
            for idx in range(3**level):
                if level_mass[idx] <= 0:
                    continue
                span = 3 ** (spec.depth - level)
                leaf = np.zeros(spec.leaves)
                leaf[idx * span : (idx + 1) * span] = 1.0 / span
                F = measure_to_martingale(TreeMeasure(spec, leaf))
                img = martingale_level(riesz_potential(F, alpha), spec.depth)
                ratio = lp_nu_norm(img, nu, p) / 1.0  # ||F||_{L_1} = 1
                quotient = level_mass[idx] ** (1 / p) * 3.0 ** ((1 - alpha) * level)
                assert ratio >= (1 - 1 / 3) * quotient * (1 - 1e-9)


class TestSharpnessConstruction:
    def test_gamma_range_guard(self):
        spec = FiltrationSpec(3, 6, 1)
        with pytest.raises(ValueError):
            build_sharpness_trace_measure(delta_w(), gamma=1.5, spec=spec)
        with pytest.raises(ValueError):
            build_sharpness_trace_measure(delta_w(), gamma=0.0, spec=spec)

    def test_nonlinear_kappa_refused(self):
        spec = FiltrationSpec(3, 6, 1)
        with pytest.raises(ValueError, match="linear"):
            build_sharpness_trace_measure(span_w(), gamma=0.2, spec=spec)

    def test_convexity_bound_two_kappa_half(self):
        # 2 kappa(1/2) <= kappa(0), with equality exactly in the linear case.
        for W, linear in ((delta_w(), True), (span_w(), False)):
            k0 = kappa_of(W, 0.0, seed=0).value
            kh = kappa_of(W, 0.5, seed=0).value
            assert 2 * kh <= k0 + 1e-9
            assert (abs(2 * kh - k0) < 1e-9) == linear

    def test_delta_w_construction(self):
        spec = FiltrationSpec(3, 12, 1)
        nu, G, report = build_sharpness_trace_measure(delta_w(), gamma=0.4, spec=spec, depths=range(4, 13))
        assert report.alpha == pytest.approx(0.6, abs=1e-9)
        # the reference measure keeps a depth-stable Frostman constant
        cs = report.frostman_constants
        assert cs.max() / cs.min() <= 2.0
        # partial sums grow linearly at exactly the derived rate 2/3
        assert report.derived_constant == pytest.approx(2 / 3, abs=1e-9)
        assert report.slope == pytest.approx(report.derived_constant, rel=1e-9)
        # the exact L_1(nu) norms of the Riesz image grow as well
        assert report.exact_l1_nu[-1] > report.exact_l1_nu[0] * 1.5
        # nu is a genuine probability-sized positive measure
        assert nu.total() == pytest.approx(1.0, rel=1e-9)
