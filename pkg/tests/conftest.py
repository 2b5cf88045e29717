import numpy as np
import pytest

from kdl.kernels import KernelSpec, sphere_quadrature
from kdl.phase_space import (DistributionField, GaussianTerm, build_partition,
                             gaussian_field, velocity_grid)


@pytest.fixture(scope="session")
def tiny_partition():
    return build_partition(1.0, 2, 2)


@pytest.fixture(scope="session")
def small_partition():
    return build_partition(1.0, 4, 2)


@pytest.fixture(scope="session")
def tiny_vgrid():
    return velocity_grid(2.0, 4)


@pytest.fixture(scope="session")
def quad8():
    return sphere_quadrature(2, 4)


@pytest.fixture(scope="session")
def maxwell_kernel():
    return KernelSpec("constant_maxwell", 1.0)


@pytest.fixture()
def random_field(small_partition, tiny_vgrid):
    rng = np.random.default_rng(1)
    n = small_partition.fine_cells_per_axis
    nv = tiny_vgrid.nodes_per_axis
    return DistributionField(rng.random((n, n, n, nv, nv, nv)),
                             small_partition, tiny_vgrid)


@pytest.fixture()
def gaussian_bump(small_partition, tiny_vgrid):
    return gaussian_field(GaussianTerm(0.7, 3.0, 1.5), small_partition,
                          tiny_vgrid)
