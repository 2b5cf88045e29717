import math
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kdl.errors import ConfigurationError
from kdl.phase_space import (DistributionField, GaussianMixture, GaussianTerm,
                             WeightSpec, b_norm, build_partition,
                             gaussian_field, l1_functional, m_norm,
                             moment_vector, read_snapshot,
                             read_snapshot_field, velocity_grid,
                             write_snapshot, zero_field)


class TestPartition:
    def test_delta_x_block_one(self):
        p = build_partition(1.0, 8, 1)
        assert p.delta_x == pytest.approx(0.25 * math.sqrt(3.0), rel=1e-14)

    def test_delta_x_block_two(self):
        p = build_partition(1.0, 8, 2)
        assert p.delta_x == pytest.approx(0.5 * math.sqrt(3.0), rel=1e-14)

    def test_non_divisible_block_rejected(self):
        with pytest.raises(ConfigurationError):
            build_partition(1.0, 8, 3)

    @pytest.mark.parametrize("bad", [(0.0, 8, 1), (1.0, 0, 1), (1.0, 8, 0)])
    def test_nonpositive_sizes_rejected(self, bad):
        with pytest.raises(ConfigurationError):
            build_partition(*bad)

    def test_delta_x_matches_measured_diagonals(self):
        p = build_partition(1.5, 6, 3)
        diams = p.block_diameters()
        assert abs(p.delta_x - diams.max()) <= 1e-14 * p.delta_x
        assert np.allclose(diams, p.delta_x, rtol=1e-14)

    def test_blocks_tile_box(self):
        p = build_partition(2.0, 6, 2)
        assert p.n_blocks * p.block_volume == pytest.approx(
            (2 * p.box_half_width) ** 3, rel=1e-12)
        assert (p.block_volumes() > 0).all()


class TestVelocityGrid:
    def test_weights_sum_to_box_volume(self):
        vg = velocity_grid(4.0, 12)
        assert vg.n_nodes * vg.node_weight == pytest.approx(8.0 ** 3,
                                                            rel=1e-12)

    @pytest.mark.parametrize("n", [3, 4, 7, 8])
    def test_nodes_symmetric_under_reflection(self, n):
        vg = velocity_grid(2.5, n)
        flipped = np.sort(-vg.axis)
        assert np.allclose(np.sort(vg.axis), flipped, atol=1e-15)

    def test_even_field_has_no_momentum(self):
        vg = velocity_grid(2.0, 6)
        p = build_partition(1.0, 2, 1)
        g = gaussian_field(GaussianTerm(1.0, 1.0, 0.7), p, vg)
        m = moment_vector(g)
        assert np.abs(m[1:4]).max() <= 1e-12 * m[0]


class TestWeightSpec:
    def test_valid(self):
        WeightSpec(0.0, 1.0)

    @pytest.mark.parametrize("alpha,tau", [(-1.0, 1.0), (0.0, 0.0),
                                           (0.0, -2.0)])
    def test_invalid(self, alpha, tau):
        with pytest.raises(ConfigurationError):
            WeightSpec(alpha, tau)


class TestDistributionField:
    def test_shape_mismatch_rejected(self, small_partition, tiny_vgrid):
        with pytest.raises(ValueError):
            DistributionField(np.zeros((2, 2, 2, 4, 4, 4)), small_partition,
                              tiny_vgrid)

    def test_non_finite_rejected(self, small_partition, tiny_vgrid):
        vals = np.zeros((4, 4, 4, 4, 4, 4))
        vals[0, 0, 0, 0, 0, 0] = np.nan
        with pytest.raises(ValueError):
            DistributionField(vals, small_partition, tiny_vgrid)

    def test_values_read_only(self, gaussian_bump):
        with pytest.raises(ValueError):
            gaussian_bump.values[0, 0, 0, 0, 0, 0] = 1.0


class TestGaussianField:
    def test_zero_amplitude_gives_zero_field(self, small_partition,
                                             tiny_vgrid):
        g = gaussian_field(GaussianTerm(0.0, 1.0, 1.0), small_partition,
                           tiny_vgrid)
        assert not g.values.any()

    def test_weight_cancels_at_unit_rates(self, small_partition, tiny_vgrid):
        g = gaussian_field(GaussianTerm(1.0, 1.0, 1.0), small_partition,
                           tiny_vgrid)
        assert m_norm(g, 1.0) == pytest.approx(1.0, rel=1e-12)

    def test_l1_close_to_analytic_gaussian_integral(self):
        # wide grids so the truncated tail is negligible
        p = build_partition(5.0, 10, 1)
        vg = velocity_grid(5.0, 10)
        g = gaussian_field(GaussianTerm(1.0, 1.0, 1.0), p, vg)
        assert l1_functional(g) == pytest.approx(math.pi ** 3, rel=1e-3)

    def test_nonpositive_tau_rejected(self):
        with pytest.raises(ConfigurationError):
            GaussianTerm(1.0, 1.0, 0.0)

    def test_m_norm_bound_dominates_grid_sup(self, small_partition,
                                             tiny_vgrid):
        mix = GaussianMixture((
            GaussianTerm(0.8, 3.0, 2.5, (0.2, 0.0, -0.1), (0.3, 0.1, 0.0)),
            GaussianTerm(0.4, 4.0, 3.0, (-0.3, 0.2, 0.0), (0.0, -0.4, 0.2))))
        g = mix.field(small_partition, tiny_vgrid)
        tau = 1.0
        assert m_norm(g, tau) <= mix.m_norm_bound(tau) * (1 + 1e-12)

    def test_lipschitz_bound_requires_margin(self):
        t = GaussianTerm(1.0, 1.0, 2.0)
        with pytest.raises(ValueError):
            t.lipschitz_bound(1.5)

    def test_mixture_scaling(self):
        mix = GaussianMixture((GaussianTerm(0.5, 3.0, 2.0),))
        assert mix.scaled(2.0).m_norm_bound(1.0) == pytest.approx(
            2.0 * mix.m_norm_bound(1.0), rel=1e-14)


@settings(max_examples=25, deadline=None)
@given(scale=st.floats(0.0, 50.0))
def test_l1_functional_scales_linearly(scale):
    p = build_partition(1.0, 2, 1)
    vg = velocity_grid(1.0, 3)
    rng = np.random.default_rng(3)
    base = rng.random((2, 2, 2, 3, 3, 3))
    g = DistributionField(base, p, vg)
    gs = DistributionField(scale * base, p, vg)
    assert l1_functional(gs) == pytest.approx(scale * l1_functional(g),
                                              rel=1e-12, abs=1e-300)


class TestSnapshots:
    def test_round_trip(self, gaussian_bump, small_partition, tiny_vgrid,
                        tmp_path):
        path = tmp_path / "field.kdl"
        write_snapshot(path, gaussian_bump)
        back = read_snapshot_field(path, small_partition, tiny_vgrid)
        assert np.array_equal(back.values, gaussian_bump.values)

    def test_header_layout(self, gaussian_bump, tmp_path):
        path = tmp_path / "field.kdl"
        write_snapshot(path, gaussian_bump)
        raw = path.read_bytes()
        assert raw[:4] == b"KDL1"
        assert raw[4] == 1
        dims = struct.unpack("<6i", raw[5:29])
        assert dims == gaussian_bump.values.shape
        # velocity index fastest: the first two payload floats differ in the
        # last velocity index only
        first = struct.unpack("<d", raw[29:37])[0]
        assert first == gaussian_bump.values[0, 0, 0, 0, 0, 0]

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.kdl"
        path.write_bytes(b"NOPE" + b"\x00" * 40)
        with pytest.raises(ValueError):
            read_snapshot(path)


def test_zero_field_is_zero(small_partition, tiny_vgrid):
    z = zero_field(small_partition, tiny_vgrid)
    assert not z.values.any()
    assert b_norm(z, 1.0) == 0.0


def test_weighted_sup_excludes_zero_samples_under_huge_weights(
        small_partition, tiny_vgrid):
    # zero boundary samples with an overflowing weight must not poison the max
    vals = np.zeros((4, 4, 4, 4, 4, 4))
    vals[1, 1, 1, 1, 1, 1] = 2.0
    g = DistributionField(vals, small_partition, tiny_vgrid)
    with np.errstate(over="ignore"):
        big = m_norm(g, 300.0)
    assert math.isinf(big) or big > 0.0
    assert not math.isnan(big)
