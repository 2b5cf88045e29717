import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import kdl.constants as kc
from kdl.errors import ConfigurationError


class TestCutoffConstants:
    def test_maxwell_reference_values(self):
        gc = kc.cutoff_constants(1.0, 0.0, 1.0)
        assert gc.c_tau == pytest.approx(2.0 * math.pi ** 1.5, rel=1e-12)
        assert gc.g_bound == pytest.approx(math.pi ** 1.5, rel=1e-12)
        assert gc.b_lambda == pytest.approx(1.0, rel=1e-12)

    def test_rate_scaling(self):
        gc = kc.cutoff_constants(1.0, 0.0, 4.0)
        assert gc.c_tau == pytest.approx(2.0 * math.pi ** 1.5 * 4 ** -1.5,
                                         rel=1e-12)

    def test_g_bound_attained_by_quadrature_at_center(self):
        # midpoint quadrature of exp(-|v|^2) over a wide fine grid
        from kdl.phase_space import velocity_grid
        vg = velocity_grid(6.0, 40)
        val = np.exp(-(vg.nodes ** 2).sum(axis=1)).sum() * vg.node_weight
        gc = kc.cutoff_constants(1.0, 0.0, 1.0)
        assert val == pytest.approx(gc.g_bound, rel=1e-10)

    def test_identity_c_equals_twice_g_times_b0(self):
        for b0, lam, tau in [(0.5, 0.0, 1.0), (2.0, 1.3, 0.7),
                             (1.0, 1.9, 2.5)]:
            gc = kc.cutoff_constants(b0, lam, tau)
            assert gc.c_tau == pytest.approx(2.0 * gc.g_bound * b0, rel=1e-14)

    def test_domain_errors(self):
        with pytest.raises(ConfigurationError):
            kc.cutoff_constants(0.0, 0.0, 1.0)
        with pytest.raises(ConfigurationError):
            kc.cutoff_constants(1.0, 2.0, 1.0)


class TestSplittingDefectConstants:
    def test_k15_formula(self):
        key = kc.splitting_defect_constants(1.0, 1.0, 2.0, 1.0, 1.0, 0.0)
        c_sigma = kc.cutoff_constants(1.0, 0.0, 1.0).c_tau
        assert key.k15 == pytest.approx(2.0 * c_sigma, rel=1e-12)
        assert key.k25 == key.k15

    def test_maxima(self):
        key = kc.splitting_defect_constants(1.3, 0.8, 2.0, 0.9, 1.1, 0.4)
        assert key.k1 == max(key.k12, key.k13, key.k14, key.k15)
        assert key.k2 == max(key.k22, key.k23, key.k24, key.k25)

    def test_small_class_limit(self):
        eps = 1e-8
        key = kc.splitting_defect_constants(eps, eps, 2.0, 1.0, 1.0, 0.0)
        assert key.k1 <= 1e-6
        assert key.k2 <= 1e-6

    def test_sigma_ordering_enforced(self):
        with pytest.raises(ConfigurationError):
            kc.splitting_defect_constants(1.0, 1.0, 1.0, 1.0, 1.0, 0.0)

    def test_collided_class_bounds(self):
        key = kc.splitting_defect_constants(2.0, 3.0, 2.0, 1.0, 1.0, 0.0)
        c_tau = kc.cutoff_constants(1.0, 0.0, 2.0).c_tau
        assert key.r_star == pytest.approx(c_tau * 4.0, rel=1e-12)
        assert key.m_star == pytest.approx(c_tau * 3.0 * 7.0, rel=1e-12)


class TestTimeLipschitz:
    def test_reference_value(self):
        d1, _ = kc.time_lipschitz_constants(1.0, 1.0, 2.0, 1.0, 1.0, 0.0)
        expect = math.sqrt(2.0) * math.exp(-0.5) + 2.0 * math.pi ** 1.5
        assert d1 == pytest.approx(expect, rel=1e-12)
        assert d1 == pytest.approx(11.994, rel=1e-4)

    def test_zero_class_gives_zero(self):
        d1, d2 = kc.time_lipschitz_constants(0.0, 0.0, 2.0, 1.0, 1.0, 0.0)
        assert d1 == 0.0
        assert d2 == 0.0

    @settings(max_examples=25, deadline=None)
    @given(r=st.floats(0.1, 5.0), bump=st.floats(0.01, 3.0))
    def test_monotone_in_class_bound(self, r, bump):
        a = kc.time_lipschitz_constants(r, 1.0, 2.0, 1.0, 1.0, 0.0)
        b = kc.time_lipschitz_constants(r + bump, 1.0, 2.0, 1.0, 1.0, 0.0)
        assert b[0] >= a[0]
        assert b[1] >= a[1]


class TestStabilityThresholds:
    def test_envelope_hand_values(self):
        st_ = kc.StabilityThresholds(
            gronwall_k=1.0, c_prefactor=1.0, c_rate=1.0, r_shift=1.0,
            rho_star=0.1, c_at_window=0.0, x0=0.0, t0=0.0, d0=1.0,
            t_star=0.1, fallback_used=False)
        assert st_.envelope(0.0) == pytest.approx(math.e, rel=1e-12)
        assert st_.envelope(1.0) == pytest.approx(math.e ** 2, rel=1e-12)

    def test_envelope_strictly_increasing(self):
        st_ = kc.stability_thresholds(1.0, 1.0, 1.0, 1.0, 0.5, 1.0, 0.0)
        xs = np.linspace(0.0, 3.0, 50)
        vals = [st_.envelope(x) for x in xs]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_window_maximizer_matches_closed_form(self):
        st_ = kc.stability_thresholds(1.0, 1.0, 1.0, 1.0, 0.5, 1.0, 0.0)
        c_sigma = kc.cutoff_constants(1.0, 0.0, 0.5).c_tau
        assert st_.rho_star == pytest.approx(1.0 / c_sigma, rel=1e-6)

    def test_window_chain_holds_as_printed(self):
        for args in [(1.0, 1.0, 1.0, 1.0, 0.5, 1.0, 0.0),
                     (0.3, 2.0, 4.0, 2.0, 0.7, 1.5, 1.1),
                     (2.0, 5.0, 0.5, 1.2, 0.4, 0.8, 1.9)]:
            st_ = kc.stability_thresholds(*args)
            q = st_.t0 + st_.x0
            assert 0.0 < st_.c_at_window * q <= st_.rho_star
            assert st_.x0 == pytest.approx(st_.t0, rel=1e-15)
            assert 0.0 < st_.x0 < 1.0
            assert st_.t_star <= min(st_.t0, 1.0 / st_.d0, 1.0)


class TestTranslateDecay:
    def test_no_horizon_keeps_rate(self):
        assert kc.translate_decay(0.0, 2.5) == pytest.approx(2.5, rel=1e-14)

    def test_unit_horizon_value(self):
        lam = kc.translate_decay(1.0, 1.0)
        assert lam == pytest.approx((3.0 - math.sqrt(5.0)) / 2.0, rel=1e-12)

    def test_matches_direction_sweep_minimum(self):
        # independent oracle: minimize ((x - T v)^2 + v^2) / (x^2 + v^2)
        T = 1.0
        angles = np.linspace(0.0, math.pi, 20001)
        x, v = np.cos(angles), np.sin(angles)
        ratio = ((x - T * v) ** 2 + v ** 2)  # denominator is 1 on the circle
        assert kc.translate_decay(T, 1.0) == pytest.approx(ratio.min(),
                                                           rel=1e-7)

    @settings(max_examples=50, deadline=None)
    @given(t=st.floats(0.0, 3.0), x=st.floats(-5.0, 5.0),
           v=st.floats(-5.0, 5.0))
    def test_weight_domination(self, t, x, v):
        # exp(-tau1((x - t v)^2 + v^2)) <= exp(-theta (x^2 + v^2)), |t| <= T
        tau1 = 1.3
        theta = kc.translate_decay(3.0, tau1)
        lhs = tau1 * ((x - t * v) ** 2 + v ** 2)
        rhs = theta * (x ** 2 + v ** 2)
        assert lhs >= rhs - 1e-12 * (1.0 + abs(rhs))

    def test_random_sample_certificate(self):
        rng = np.random.default_rng(12)
        T, tau1 = 2.0, 0.9
        theta = kc.translate_decay(T, tau1)
        x = rng.uniform(-4, 4, (10000, 3))
        v = rng.uniform(-4, 4, (10000, 3))
        t = rng.uniform(-T, T, 10000)
        lhs = tau1 * (((x - t[:, None] * v) ** 2).sum(1) + (v ** 2).sum(1))
        rhs = theta * ((x ** 2).sum(1) + (v ** 2).sum(1))
        assert (lhs >= rhs - 1e-10).all()

    def test_negative_horizon_rejected(self):
        with pytest.raises(ConfigurationError):
            kc.translate_decay(-1.0, 1.0)


class TestSpatialLipschitz:
    def test_zero_horizon_returns_m0(self):
        assert kc.spatial_lipschitz_constant(
            1.7, 1.0, 0.0, 2.0, 1.0, 1.0, 0.0) == pytest.approx(1.7,
                                                                rel=1e-14)

    def test_small_class_limit(self):
        val = kc.spatial_lipschitz_constant(1.0, 1e-12, 1.0, 2.0, 1.0, 1.0,
                                            0.0)
        assert val == pytest.approx(1.0, rel=1e-9)

    def test_rate_ordering_enforced(self):
        with pytest.raises(ConfigurationError):
            kc.spatial_lipschitz_constant(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0)


class TestReport:
    @pytest.mark.parametrize("kwargs", [
        dict(R=1.0, M=1.0, T=1.0, tau=1.0, sigma=0.5, b0=1.0, lam=0.0),
        dict(R=0.4, M=7.0, T=2.5, tau=1.7, sigma=0.6, b0=2.3, lam=0.9),
        dict(R=3.0, M=0.2, T=0.3, tau=0.8, sigma=0.1, b0=0.5, lam=1.8,
             tau1=0.2, tau_star=1.1, M0=0.4),
    ])
    def test_crosscheck_below_required_precision(self, kwargs):
        rep = kc.compute_report(**kwargs)
        max_dev, devs = kc.crosscheck_report(rep)
        assert max_dev <= 1e-12, devs

    def test_cli_reference_value(self):
        rep = kc.compute_report(R=1.0, M=1.0, T=1.0, tau=1.0, sigma=0.5,
                                b0=1.0, lam=0.0)
        assert rep.c_sigma == pytest.approx(31.50, rel=1e-3)

    def test_defaults_fill(self):
        rep = kc.compute_report(R=1.0, M=2.0, T=1.0, tau=1.0, sigma=0.5,
                                b0=1.0, lam=0.0)
        assert rep.tau_star == 1.0
        assert rep.tau1 == 0.5
        assert rep.M0 == 2.0

    def test_as_dict_round_trip(self):
        rep = kc.compute_report(R=1.0, M=1.0, T=1.0, tau=1.0, sigma=0.5,
                                b0=1.0, lam=0.0)
        d = rep.as_dict()
        assert d["c_sigma"] == rep.c_sigma
        assert set(d) >= {"k1", "k2", "d1", "d2", "rho_star", "t_star",
                          "theta", "m_propagated"}
