"""Collision kernel models under a soft angular cutoff, and sphere quadrature.

Supported kernels are isotropic in the scattering direction: the constant
(Maxwell-molecule) kernel b0/(4 pi) and the soft power law
(b0 / 4 pi) |v - v*|^(-lambda) with 0 <= lambda < 2, so the angular integral
is b0 |v - v*|^(-lambda) exactly.  The power-law singularity is capped below a
configurable speed floor; the cap only strengthens the cutoff bound.

Sphere quadrature is a product rule, Gauss-Legendre in cos(theta) times a
uniform azimuthal grid.  Gauss-Legendre nodes are symmetric about the equator
and an even azimuthal count closes the node set under omega -> -omega, which
makes odd integrands cancel exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as _gamma
from scipy.special import roots_legendre

from .errors import ConfigurationError

KERNEL_FORMS = ("constant_maxwell", "power_law_soft")


@dataclass(frozen=True)
class KernelSpec:
    """Isotropic collision kernel with cutoff amplitude b0 and softness lam.

    b0 = 0 is accepted and means a collisionless model (every collision
    operator vanishes identically); the cutoff constants of the analysis
    modules require b0 > 0.
    """

    form: str
    b0: float
    lam: float = 0.0
    s_floor: float = 1e-6

    def __post_init__(self):
        problems = []
        if self.form not in KERNEL_FORMS:
            problems.append(f"unknown kernel form {self.form!r}; "
                            f"expected one of {KERNEL_FORMS}")
        if self.b0 < 0:
            problems.append(f"kernel.b0 must be >= 0, got {self.b0}")
        if not (0.0 <= self.lam < 2.0):
            problems.append(
                f"kernel.lambda must lie in [0, 2) (soft cutoff), got {self.lam}")
        if self.form == "constant_maxwell" and self.lam != 0.0:
            problems.append("constant_maxwell requires lambda = 0")
        if not self.s_floor > 0:
            problems.append(f"kernel speed floor must be > 0, got {self.s_floor}")
        if problems:
            raise ConfigurationError(problems)

    @property
    def collisionless(self) -> bool:
        return self.b0 == 0.0


def kernel_value(spec: KernelSpec, relative_speed: float,
                 cos_angle: float = 0.0) -> float:
    """Kernel density b at one (relative speed, scattering angle) pair.

    Isotropic forms ignore cos_angle; the angular integral of the returned
    density over the sphere is b0 * max(s, s_floor)^(-lambda).
    """
    if relative_speed < 0:
        raise ValueError(f"relative speed must be >= 0, got {relative_speed}")
    s = max(relative_speed, spec.s_floor)
    if spec.lam == 0.0:
        return spec.b0 / (4.0 * math.pi)
    return spec.b0 / (4.0 * math.pi) * s ** (-spec.lam)


@dataclass(frozen=True, eq=False)
class SphereQuadrature:
    directions: np.ndarray   # (n, 3) unit vectors
    weights: np.ndarray      # (n,) summing to 4 pi
    antipodal: bool

    @property
    def n_nodes(self) -> int:
        return self.directions.shape[0]


def sphere_quadrature(n_theta: int, n_phi: int) -> SphereQuadrature:
    if n_theta < 1 or n_phi < 1:
        raise ConfigurationError(
            f"sphere quadrature needs n_theta, n_phi >= 1, got "
            f"({n_theta}, {n_phi})")
    mu, glw = roots_legendre(n_theta)          # cos(theta) nodes on [-1, 1]
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    sin_theta = np.sqrt(1.0 - mu ** 2)
    dirs = np.empty((n_theta * n_phi, 3))
    w = np.empty(n_theta * n_phi)
    k = 0
    for i in range(n_theta):
        for j in range(n_phi):
            dirs[k, 0] = sin_theta[i] * math.cos(phi[j])
            dirs[k, 1] = sin_theta[i] * math.sin(phi[j])
            dirs[k, 2] = mu[i]
            w[k] = glw[i] * (2.0 * math.pi / n_phi)
            k += 1
    dirs.setflags(write=False)
    w.setflags(write=False)
    return SphereQuadrature(dirs, w, antipodal=(n_phi % 2 == 0))


def angular_integral(spec: KernelSpec, quad: SphereQuadrature,
                     relative_speed: float) -> float:
    """Quadrature estimate of the kernel's integral over the sphere."""
    if not relative_speed > 0:
        raise ValueError(f"relative speed must be > 0, got {relative_speed}")
    u = quad.directions[:, 2]  # cosine against a fixed reference axis
    vals = np.array([kernel_value(spec, relative_speed, c) for c in u])
    return float(np.dot(quad.weights, vals))


def gauss_pi(z: float) -> float:
    """The factorial-extension function, gamma(z + 1), for z > -1."""
    if not z > -1.0:
        raise ValueError(f"gauss_pi requires z > -1, got {z}")
    return float(_gamma(z + 1.0))
