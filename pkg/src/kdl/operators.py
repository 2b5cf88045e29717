"""Executable forms of the transport, averaging and collision maps.

Streaming U^t g = g(x - t v, v) and spatial translation share one remap
engine: per velocity node the displacement is a rigid shift, applied axis by
axis as a two-cell convex blend.  On a uniform grid the piecewise-constant
finite-volume remap and linear semi-Lagrangian interpolation produce the same
coefficients, so both advertised modes run through the same code path; the
blend weights are nonnegative and sum to one, which preserves positivity and
(away from the boundary) the L1 functional of nonnegative fields exactly.
Grid-aligned shifts reduce to pure sample permutations.

The bilinear collision integrals are evaluated by velocity-grid x sphere
quadrature.  Post-collision velocities v' = v - ((v-v*).w) w and
v*' = v* + ((v-v*).w) w fall off the node lattice; those values are read by
trilinear interpolation with zero extension beyond the lattice, so anything
landing outside the velocity box contributes nothing.  The loss side needs no
scattering direction for isotropic kernels and uses the exact angular
integral.  Each output row (one velocity node, all spatial cells) is reduced
in a fixed sequential order, so results are bitwise independent of the worker
count.

Cost is O(n_cells * n_nodes^2 * n_sphere) per bilinear evaluation; the
parallel loop runs over output velocity nodes with cells innermost for
contiguous access.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit, prange

from .errors import ConfigurationError
from .kernels import KernelSpec, SphereQuadrature
from .phase_space import (DistributionField, require_same_grids, zero_field)

STREAMING_MODES = ("conservative_remap", "linear_interpolation")


@dataclass(frozen=True)
class StreamingScheme:
    mode: str = "conservative_remap"
    periodic: bool = False

    def __post_init__(self):
        if self.mode not in STREAMING_MODES:
            raise ConfigurationError(
                f"unknown streaming mode {self.mode!r}; "
                f"expected one of {STREAMING_MODES}")


DEFAULT_STREAMING = StreamingScheme()


# ---------------------------------------------------------------------------
# shift engine
# ---------------------------------------------------------------------------

def _shifted(a: np.ndarray, k: int, axis: int, periodic: bool) -> np.ndarray:
    """out[i] = a[i - k] along axis, zero-filled (or wrapped) outside."""
    if periodic:
        return np.roll(a, k, axis=axis)
    out = np.zeros_like(a)
    n = a.shape[axis]
    if abs(k) >= n:
        return out
    src = [slice(None)] * a.ndim
    dst = [slice(None)] * a.ndim
    if k >= 0:
        dst[axis] = slice(k, None)
        src[axis] = slice(0, n - k)
    else:
        dst[axis] = slice(0, n + k)
        src[axis] = slice(-k, None)
    out[tuple(dst)] = a[tuple(src)]
    return out


def _shift_fractional(a: np.ndarray, displacement: float, h: float,
                      axis: int, periodic: bool) -> np.ndarray:
    """Remap a by a rigid displacement along one axis: out(x) = a(x - d)."""
    u = displacement / h
    steps = math.floor(u)
    frac = u - steps
    if frac == 0.0:
        return _shifted(a, steps, axis, periodic)
    near = _shifted(a, steps, axis, periodic)
    far = _shifted(a, steps + 1, axis, periodic)
    return (1.0 - frac) * near + frac * far


def stream(g: DistributionField, t: float,
           scheme: StreamingScheme = DEFAULT_STREAMING) -> DistributionField:
    """Free streaming: samples of g(x - t v, v)."""
    if t == 0.0:
        return g
    h = g.partition.h_x
    vax = g.vgrid.axis
    work = np.array(g.values)
    for spatial_axis, vel_axis in ((0, 3), (1, 4), (2, 5)):
        sl = [slice(None)] * 6
        for iv in range(g.vgrid.nodes_per_axis):
            sl[vel_axis] = iv
            idx = tuple(sl)
            work[idx] = _shift_fractional(work[idx], t * vax[iv], h,
                                          spatial_axis, scheme.periodic)
    return g.with_values(work)


def translate(g: DistributionField, y,
              scheme: StreamingScheme = DEFAULT_STREAMING) -> DistributionField:
    """Spatial translation: samples of g(x + y, v)."""
    y = np.asarray(y, dtype=float)
    if y.shape != (3,):
        raise ValueError(f"translation vector must have shape (3,), got {y.shape}")
    if not y.any():
        return g
    h = g.partition.h_x
    work = np.array(g.values)
    for axis in range(3):
        if y[axis] != 0.0:
            work = _shift_fractional(work, -y[axis], h, axis, scheme.periodic)
    return g.with_values(work)


# ---------------------------------------------------------------------------
# homogenization
# ---------------------------------------------------------------------------

def block_averages(g: DistributionField) -> np.ndarray:
    """Cell-block means, shape (b, b, b, nvx, nvy, nvz)."""
    p = g.partition
    m = p.block_factor
    b = p.blocks_per_axis
    nv = g.vgrid.nodes_per_axis
    vals = g.values.reshape(b, m, b, m, b, m, nv, nv, nv)
    return vals.mean(axis=(1, 3, 5))


def homogenize(g: DistributionField) -> DistributionField:
    """Replace values by their block average, per velocity node."""
    p = g.partition
    m = p.block_factor
    if m == 1:
        return g
    b = p.blocks_per_axis
    n = p.fine_cells_per_axis
    nv = g.vgrid.nodes_per_axis
    mean = block_averages(g)
    tiled = np.broadcast_to(
        mean[:, None, :, None, :, None], (b, m, b, m, b, m, nv, nv, nv))
    return g.with_values(np.ascontiguousarray(tiled).reshape(
        n, n, n, nv, nv, nv))


# ---------------------------------------------------------------------------
# collision quadrature
# ---------------------------------------------------------------------------

def post_collision_velocities(v, v_star, omega):
    """Elastic pair map: exchanges the omega-component of the relative
    velocity, conserving momentum and kinetic energy exactly."""
    v = np.asarray(v, float)
    v_star = np.asarray(v_star, float)
    omega = np.asarray(omega, float)
    d = np.dot(v - v_star, omega)
    return v - d * omega, v_star + d * omega


@njit(parallel=True, cache=True)
def _bilinear_kernel(gT, hT, ax, node_w, b0, lam, s_floor,
                     om, omw, want_gain, gainT, freqT):  # pragma: no cover
    n = ax.shape[0]
    nv = n * n * n
    nc = gT.shape[1]
    nom = om.shape[0]
    v_lo = ax[0]
    inv_h = 1.0 / (ax[1] - ax[0]) if n > 1 else 0.0
    inv_4pi = 1.0 / (4.0 * math.pi)
    for i in prange(nv):
        ix = i // (n * n)
        iy = (i // n) % n
        iz = i % n
        vix = ax[ix]
        viy = ax[iy]
        viz = ax[iz]
        gain_row = np.zeros(nc)
        freq_row = np.zeros(nc)
        for j in range(nv):
            jx = j // (n * n)
            jy = (j // n) % n
            jz = j % n
            vjx = ax[jx]
            vjy = ax[jy]
            vjz = ax[jz]
            rx = vix - vjx
            ry = viy - vjy
            rz = viz - vjz
            s = math.sqrt(rx * rx + ry * ry + rz * rz)
            if lam == 0.0:
                bang = b0
            else:
                se = s if s > s_floor else s_floor
                bang = b0 * se ** (-lam)
            coeff_loss = node_w * bang
            for c in range(nc):
                freq_row[c] += coeff_loss * hT[j, c]
            if want_gain:
                biso = bang * inv_4pi
                for k in range(nom):
                    ox = om[k, 0]
                    oy = om[k, 1]
                    oz = om[k, 2]
                    d = rx * ox + ry * oy + rz * oz
                    cc = node_w * omw[k] * biso
                    # stencil for v' = v - d w (reads gT)
                    ux = (vix - d * ox - v_lo) * inv_h
                    uy = (viy - d * oy - v_lo) * inv_h
                    uz = (viz - d * oz - v_lo) * inv_h
                    ax0 = int(math.floor(ux))
                    ay0 = int(math.floor(uy))
                    az0 = int(math.floor(uz))
                    fx = ux - ax0
                    fy = uy - ay0
                    fz = uz - az0
                    gx0, gx1 = ax0, ax0 + 1
                    gy0, gy1 = ay0, ay0 + 1
                    gz0, gz1 = az0, az0 + 1
                    wx0 = 1.0 - fx
                    wx1 = fx
                    wy0 = 1.0 - fy
                    wy1 = fy
                    wz0 = 1.0 - fz
                    wz1 = fz
                    if gx0 < 0 or gx0 >= n:
                        wx0 = 0.0
                        gx0 = 0
                    if gx1 < 0 or gx1 >= n:
                        wx1 = 0.0
                        gx1 = 0
                    if gy0 < 0 or gy0 >= n:
                        wy0 = 0.0
                        gy0 = 0
                    if gy1 < 0 or gy1 >= n:
                        wy1 = 0.0
                        gy1 = 0
                    if gz0 < 0 or gz0 >= n:
                        wz0 = 0.0
                        gz0 = 0
                    if gz1 < 0 or gz1 >= n:
                        wz1 = 0.0
                        gz1 = 0
                    g000 = (gx0 * n + gy0) * n + gz0
                    g001 = (gx0 * n + gy0) * n + gz1
                    g010 = (gx0 * n + gy1) * n + gz0
                    g011 = (gx0 * n + gy1) * n + gz1
                    g100 = (gx1 * n + gy0) * n + gz0
                    g101 = (gx1 * n + gy0) * n + gz1
                    g110 = (gx1 * n + gy1) * n + gz0
                    g111 = (gx1 * n + gy1) * n + gz1
                    a000 = wx0 * wy0 * wz0
                    a001 = wx0 * wy0 * wz1
                    a010 = wx0 * wy1 * wz0
                    a011 = wx0 * wy1 * wz1
                    a100 = wx1 * wy0 * wz0
                    a101 = wx1 * wy0 * wz1
                    a110 = wx1 * wy1 * wz0
                    a111 = wx1 * wy1 * wz1
                    # stencil for v*' = v* + d w (reads hT)
                    px = (vjx + d * ox - v_lo) * inv_h
                    py = (vjy + d * oy - v_lo) * inv_h
                    pz = (vjz + d * oz - v_lo) * inv_h
                    bx0i = int(math.floor(px))
                    by0i = int(math.floor(py))
                    bz0i = int(math.floor(pz))
                    qx = px - bx0i
                    qy = py - by0i
                    qz = pz - bz0i
                    hx0, hx1 = bx0i, bx0i + 1
                    hy0, hy1 = by0i, by0i + 1
                    hz0, hz1 = bz0i, bz0i + 1
                    ux0 = 1.0 - qx
                    ux1 = qx
                    uy0 = 1.0 - qy
                    uy1 = qy
                    uz0 = 1.0 - qz
                    uz1 = qz
                    if hx0 < 0 or hx0 >= n:
                        ux0 = 0.0
                        hx0 = 0
                    if hx1 < 0 or hx1 >= n:
                        ux1 = 0.0
                        hx1 = 0
                    if hy0 < 0 or hy0 >= n:
                        uy0 = 0.0
                        hy0 = 0
                    if hy1 < 0 or hy1 >= n:
                        uy1 = 0.0
                        hy1 = 0
                    if hz0 < 0 or hz0 >= n:
                        uz0 = 0.0
                        hz0 = 0
                    if hz1 < 0 or hz1 >= n:
                        uz1 = 0.0
                        hz1 = 0
                    h000 = (hx0 * n + hy0) * n + hz0
                    h001 = (hx0 * n + hy0) * n + hz1
                    h010 = (hx0 * n + hy1) * n + hz0
                    h011 = (hx0 * n + hy1) * n + hz1
                    h100 = (hx1 * n + hy0) * n + hz0
                    h101 = (hx1 * n + hy0) * n + hz1
                    h110 = (hx1 * n + hy1) * n + hz0
                    h111 = (hx1 * n + hy1) * n + hz1
                    b000 = ux0 * uy0 * uz0
                    b001 = ux0 * uy0 * uz1
                    b010 = ux0 * uy1 * uz0
                    b011 = ux0 * uy1 * uz1
                    b100 = ux1 * uy0 * uz0
                    b101 = ux1 * uy0 * uz1
                    b110 = ux1 * uy1 * uz0
                    b111 = ux1 * uy1 * uz1
                    for c in range(nc):
                        gval = (a000 * gT[g000, c] + a001 * gT[g001, c]
                                + a010 * gT[g010, c] + a011 * gT[g011, c]
                                + a100 * gT[g100, c] + a101 * gT[g101, c]
                                + a110 * gT[g110, c] + a111 * gT[g111, c])
                        hval = (b000 * hT[h000, c] + b001 * hT[h001, c]
                                + b010 * hT[h010, c] + b011 * hT[h011, c]
                                + b100 * hT[h100, c] + b101 * hT[h101, c]
                                + b110 * hT[h110, c] + b111 * hT[h111, c])
                        gain_row[c] += cc * gval * hval
        for c in range(nc):
            gainT[i, c] = gain_row[c]
            freqT[i, c] = freq_row[c]


def _collide_pair(g: DistributionField, h: DistributionField,
                  spec: KernelSpec, quad: SphereQuadrature,
                  want_gain: bool = True):
    """Shared quadrature pass: returns (gain, frequency-of-h) fields."""
    require_same_grids(g, h)
    if spec.collisionless:
        z = zero_field(g.partition, g.vgrid)
        return z, z
    gT = np.ascontiguousarray(g.values2d.T)
    hT = np.ascontiguousarray(h.values2d.T)
    gainT = np.zeros_like(gT)
    freqT = np.zeros_like(gT)
    _bilinear_kernel(gT, hT, g.vgrid.axis, g.vgrid.node_weight,
                     spec.b0, spec.lam, spec.s_floor,
                     quad.directions, quad.weights, want_gain, gainT, freqT)
    gain = g.with_values(np.ascontiguousarray(gainT.T))
    freq = g.with_values(np.ascontiguousarray(freqT.T))
    return gain, freq


def loss_term(g: DistributionField, h: DistributionField,
              spec: KernelSpec, quad: SphereQuadrature) -> DistributionField:
    """S(g, h)(x, v) = g(x, v) * integral of kernel * h(x, v*)."""
    _, freq = _collide_pair(g, h, spec, quad, want_gain=False)
    return g.with_values(g.values * freq.values)


def gain_term(g: DistributionField, h: DistributionField,
              spec: KernelSpec, quad: SphereQuadrature) -> DistributionField:
    """P(g, h)(x, v) = integral of kernel * g(x, v') h(x, v*')."""
    gain, _ = _collide_pair(g, h, spec, quad, want_gain=True)
    return gain


def bilinear_collision(g: DistributionField, h: DistributionField,
                       spec: KernelSpec, quad: SphereQuadrature) -> DistributionField:
    """General bilinear form J_B(g, h) = P(g, h) - S(g, h)."""
    gain, freq = _collide_pair(g, h, spec, quad, want_gain=True)
    return g.with_values(gain.values - g.values * freq.values)


def collision(g: DistributionField, spec: KernelSpec,
              quad: SphereQuadrature) -> DistributionField:
    """Full collision term J(g) = P(g, g) - S(g, g)."""
    return bilinear_collision(g, g, spec, quad)


def homogenized_collision(g: DistributionField, spec: KernelSpec,
                          quad: SphereQuadrature) -> DistributionField:
    """Collision with a cell-averaged partner slot: J_B(g, pi g)."""
    pg = homogenize(g)
    gain, freq = _collide_pair(g, pg, spec, quad, want_gain=True)
    return g.with_values(gain.values - g.values * freq.values)


def homogenized_gain_loss(g: DistributionField, spec: KernelSpec,
                          quad: SphereQuadrature):
    """(P(g, pi g), S(g, pi g)) in one quadrature pass."""
    pg = homogenize(g)
    gain, freq = _collide_pair(g, pg, spec, quad, want_gain=True)
    return gain, g.with_values(g.values * freq.values)


def collision_frequency(g: DistributionField, spec: KernelSpec,
                        quad: SphereQuadrature) -> DistributionField:
    """Loss frequency of the cell-averaged density: the multiplier E with
    S(g, pi g) = g * E(g)."""
    if float(g.values.min(initial=0.0)) < 0.0:
        raise ValueError("collision frequency requires a nonnegative field")
    pg = homogenize(g)
    _, freq = _collide_pair(g, pg, spec, quad, want_gain=False)
    return freq


def defect(g: DistributionField, h: DistributionField, t: float, s: float,
           spec: KernelSpec, quad: SphereQuadrature,
           scheme: StreamingScheme = DEFAULT_STREAMING) -> DistributionField:
    """Splitting defect: J_pi(U^t g) - U^s J(h)."""
    require_same_grids(g, h)
    left = homogenized_collision(stream(g, t, scheme), spec, quad)
    right = stream(collision(h, spec, quad), s, scheme)
    return g.with_values(left.values - right.values)


# ---------------------------------------------------------------------------
# conservative moment fix
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _moment_projection_data(vgrid):
    v = vgrid.nodes
    n = vgrid.n_nodes
    phi = np.empty((5, n))
    phi[0] = 1.0
    phi[1:4] = v.T
    phi[4] = (v ** 2).sum(axis=1)
    kappa = 4.5 / vgrid.v_max ** 2
    weight = np.exp(-kappa * phi[4])
    basis = phi * weight                       # corrections live on this span
    gram = (basis * vgrid.node_weight) @ phi.T
    return phi, basis, gram


def project_moments(increment: DistributionField) -> DistributionField:
    """Least-squares correction zeroing the five collision moments per cell.

    Subtracts from each cell's velocity profile a combination of
    (1, v, v^2) times a fixed Maxwellian-like window, chosen so the discrete
    quadrature moments of the corrected increment vanish."""
    vg = increment.vgrid
    phi, basis, gram = _moment_projection_data(vg)
    flat = increment.values2d
    defects = (flat * vg.node_weight) @ phi.T       # (n_cells, 5)
    lam = np.linalg.solve(gram, defects.T)          # (5, n_cells)
    corrected = flat - lam.T @ basis
    return increment.with_values(corrected)
