import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kdl.errors import ConfigurationError
from kdl.kernels import (KernelSpec, angular_integral, gauss_pi, kernel_value,
                         sphere_quadrature)


class TestKernelSpec:
    def test_constant_maxwell_value(self):
        spec = KernelSpec("constant_maxwell", 1.0)
        assert kernel_value(spec, 2.0) == pytest.approx(1.0 / (4 * math.pi),
                                                        rel=1e-14)

    def test_power_law_value(self):
        spec = KernelSpec("power_law_soft", 1.0, 1.0)
        assert kernel_value(spec, 2.0) == pytest.approx(1.0 / (8 * math.pi),
                                                        rel=1e-14)

    def test_speed_floor_caps_singularity(self):
        spec = KernelSpec("power_law_soft", 1.0, 1.0, s_floor=1e-6)
        capped = kernel_value(spec, 0.0)
        assert capped == pytest.approx(1e6 / (4 * math.pi), rel=1e-12)
        assert kernel_value(spec, 1e-9) == capped

    @pytest.mark.parametrize("lam", [-0.1, 2.0, 2.5])
    def test_lambda_range_enforced(self, lam):
        with pytest.raises(ConfigurationError):
            KernelSpec("power_law_soft", 1.0, lam)

    def test_constant_maxwell_requires_lambda_zero(self):
        with pytest.raises(ConfigurationError):
            KernelSpec("constant_maxwell", 1.0, 0.5)

    def test_unknown_form(self):
        with pytest.raises(ConfigurationError):
            KernelSpec("hard_sphere", 1.0)

    def test_b0_zero_is_collisionless(self):
        assert KernelSpec("constant_maxwell", 0.0).collisionless


class TestSphereQuadrature:
    @pytest.mark.parametrize("nt,nph", [(2, 4), (3, 4), (4, 8)])
    def test_unit_directions_and_weight_sum(self, nt, nph):
        q = sphere_quadrature(nt, nph)
        norms = np.linalg.norm(q.directions, axis=1)
        assert np.abs(norms - 1.0).max() <= 1e-14
        assert q.weights.sum() == pytest.approx(4 * math.pi, rel=1e-12)

    def test_odd_functions_cancel_with_antipodal_pairing(self):
        q = sphere_quadrature(3, 6)
        assert q.antipodal
        for comp in range(3):
            val = np.dot(q.weights, q.directions[:, comp])
            assert abs(val) <= 1e-14
        # odd cubic too
        val = np.dot(q.weights, q.directions[:, 0] ** 3)
        assert abs(val) <= 1e-14

    def test_odd_phi_count_not_antipodal(self):
        assert not sphere_quadrature(2, 5).antipodal

    def test_second_moments_exact(self):
        q = sphere_quadrature(2, 4)
        for i in range(3):
            for j in range(3):
                val = np.dot(q.weights,
                             q.directions[:, i] * q.directions[:, j])
                want = 4 * math.pi / 3 if i == j else 0.0
                assert val == pytest.approx(want, abs=1e-13)


class TestAngularIntegral:
    def test_constant_maxwell_is_b0(self, quad8):
        spec = KernelSpec("constant_maxwell", 1.0)
        for s in (0.1, 1.0, 7.3):
            assert angular_integral(spec, quad8, s) == pytest.approx(
                1.0, rel=1e-12)

    def test_power_law_example(self, quad8):
        spec = KernelSpec("power_law_soft", 1.0, 1.0)
        assert angular_integral(spec, quad8, 4.0) == pytest.approx(0.25,
                                                                   rel=1e-12)

    @pytest.mark.parametrize("b0,lam", [(0.7, 0.0), (1.3, 0.5), (2.0, 1.9)])
    def test_cutoff_bound_over_speed_sweep(self, quad8, b0, lam):
        spec = KernelSpec("power_law_soft", b0, lam, s_floor=1e-6 * 2.0)
        speeds = np.geomspace(spec.s_floor, 20.0, 100)
        for s in speeds:
            bound = b0 * s ** (-lam)
            assert angular_integral(spec, quad8, s) <= bound * (1 + 1e-10)


class TestGaussPi:
    def test_at_zero_and_one(self):
        assert gauss_pi(0.0) == pytest.approx(1.0, rel=1e-12)
        assert gauss_pi(1.0) == pytest.approx(1.0, rel=1e-12)

    def test_half_integer(self):
        assert gauss_pi(-0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-10)

    def test_against_high_precision(self):
        import mpmath as mp
        for z in (-0.9, -0.3, 0.25, 1.7, 4.2):
            precise = float(mp.gamma(z + 1))
            assert gauss_pi(z) == pytest.approx(precise, rel=1e-10)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            gauss_pi(-1.0)

    @settings(max_examples=40, deadline=None)
    @given(z=st.floats(0.01, 5.0))
    def test_recurrence(self, z):
        assert gauss_pi(z) == pytest.approx(z * gauss_pi(z - 1.0), rel=1e-9)
