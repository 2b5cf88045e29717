"""Grids, cell partitions, phase-space fields and quadrature bookkeeping.

Everything downstream works on a truncated phase space: positions in the cube
[-L, L]^3 tiled by uniform cubic fine cells, velocities on a symmetric tensor
grid over [-v_max, v_max]^3.  Fields are midpoint samples at cell centers and
velocity nodes, so the phase-space integral is a plain weighted sum, the
averaging operator over cell blocks is exactly idempotent, and odd velocity
moments of even fields cancel exactly.

Homogenization cells are m^3 blocks of fine cells.  Keeping the block factor
separate from the representation resolution lets the cell diameter be swept
without conflating averaging error with sampling error.

Gaussian bumps are the synthesized test family.  Each term carries closed-form
metadata (weighted sup norms, translation Lipschitz bound, full-space integral)
used as oracles by the verification suite; the bounds are certified upper
bounds, derived per axis from sup_t exp(tau*t^2 - a*(t-t0)^2) = exp(a*tau*
t0^2/(a-tau)) and a one-dimensional stationary-point formula for the gradient
envelope.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

SNAPSHOT_MAGIC = b"KDL1"
SNAPSHOT_VERSION = 1


# ---------------------------------------------------------------------------
# grids and partitions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class VelocityGrid:
    """Symmetric uniform tensor grid on [-v_max, v_max]^3.

    Nodes sit at cell centers, -v_max + (i + 1/2) h with h = 2 v_max / n, so
    the node set is invariant under v -> -v and the per-node quadrature weight
    h^3 sums exactly to the box volume (2 v_max)^3.
    """

    v_max: float
    nodes_per_axis: int
    axis: np.ndarray        # (n,) node coordinates along one axis
    nodes: np.ndarray       # (n^3, 3) all nodes, z index fastest
    node_weight: float      # h^3

    @property
    def h(self) -> float:
        return 2.0 * self.v_max / self.nodes_per_axis

    @property
    def n_nodes(self) -> int:
        return self.nodes_per_axis ** 3

    @property
    def speed_floor(self) -> float:
        """Default cap scale for singular kernels: 1e-6 * v_max."""
        return 1e-6 * self.v_max


def velocity_grid(v_max: float, nodes_per_axis: int) -> VelocityGrid:
    if not v_max > 0:
        raise ConfigurationError(f"v_max must be positive, got {v_max}")
    if nodes_per_axis < 1:
        raise ConfigurationError(
            f"velocity nodes_per_axis must be >= 1, got {nodes_per_axis}")
    n = int(nodes_per_axis)
    h = 2.0 * v_max / n
    axis = -v_max + (np.arange(n) + 0.5) * h
    gx, gy, gz = np.meshgrid(axis, axis, axis, indexing="ij")
    nodes = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)
    axis.setflags(write=False)
    nodes.setflags(write=False)
    return VelocityGrid(float(v_max), n, axis, nodes, h ** 3)


@dataclass(frozen=True, eq=False)
class SpatialPartition:
    """Uniform cubic fine cells on [-L, L]^3 grouped into m^3 blocks.

    The homogenization cells pi_l are the blocks; their common diameter is
    m * h_x * sqrt(3) and the partition diameter delta_x is the sup over
    cells, which here is that same value.
    """

    box_half_width: float
    fine_cells_per_axis: int
    block_factor: int

    @property
    def h_x(self) -> float:
        return 2.0 * self.box_half_width / self.fine_cells_per_axis

    @property
    def cell_volume(self) -> float:
        return self.h_x ** 3

    @property
    def blocks_per_axis(self) -> int:
        return self.fine_cells_per_axis // self.block_factor

    @property
    def n_cells(self) -> int:
        return self.fine_cells_per_axis ** 3

    @property
    def n_blocks(self) -> int:
        return self.blocks_per_axis ** 3

    @property
    def block_volume(self) -> float:
        return (self.block_factor * self.h_x) ** 3

    @property
    def delta_x(self) -> float:
        return self.block_factor * self.h_x * math.sqrt(3.0)

    @property
    def axis(self) -> np.ndarray:
        n = self.fine_cells_per_axis
        return -self.box_half_width + (np.arange(n) + 0.5) * self.h_x

    def block_diameters(self) -> np.ndarray:
        """Corner-to-corner diagonal of every block, measured from bounds."""
        m = self.block_factor
        edges = -self.box_half_width + self.h_x * m * np.arange(
            self.blocks_per_axis + 1)
        lo = edges[:-1]
        hi = edges[1:]
        side = hi - lo
        sx, sy, sz = np.meshgrid(side, side, side, indexing="ij")
        return np.sqrt(sx ** 2 + sy ** 2 + sz ** 2).ravel()

    def block_volumes(self) -> np.ndarray:
        return np.full(self.n_blocks, self.block_volume)


def build_partition(box_half_width: float, fine_cells_per_axis: int,
                    block_factor: int) -> SpatialPartition:
    problems = []
    if not box_half_width > 0:
        problems.append(f"box half width must be positive, got {box_half_width}")
    if fine_cells_per_axis < 1:
        problems.append(
            f"fine_cells_per_axis must be >= 1, got {fine_cells_per_axis}")
    if block_factor < 1:
        problems.append(f"block_factor must be >= 1, got {block_factor}")
    if (fine_cells_per_axis >= 1 and block_factor >= 1
            and fine_cells_per_axis % block_factor != 0):
        problems.append(
            f"block_factor {block_factor} does not divide "
            f"fine_cells_per_axis {fine_cells_per_axis}")
    if problems:
        raise ConfigurationError(problems)
    return SpatialPartition(float(box_half_width), int(fine_cells_per_axis),
                            int(block_factor))


@dataclass(frozen=True)
class WeightSpec:
    """Decay rates of the weight exp(-alpha x^2 - tau v^2)."""

    alpha: float
    tau: float

    def __post_init__(self):
        if self.alpha < 0:
            raise ConfigurationError(f"alpha must be >= 0, got {self.alpha}")
        if not self.tau > 0:
            raise ConfigurationError(f"tau must be > 0, got {self.tau}")


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DistributionField:
    """Sampled phase-space density on (fine cell) x (velocity node).

    values has shape (nx, ny, nz, nvx, nvy, nvz), C order, so the velocity
    index varies fastest in memory; immutable after construction.
    """

    values: np.ndarray
    partition: SpatialPartition
    vgrid: VelocityGrid

    def __post_init__(self):
        n = self.partition.fine_cells_per_axis
        nv = self.vgrid.nodes_per_axis
        expected = (n, n, n, nv, nv, nv)
        if self.values.shape != expected:
            raise ValueError(
                f"field shape {self.values.shape} does not match grids "
                f"{expected}")
        if self.values.dtype != np.float64:
            object.__setattr__(self, "values",
                               np.ascontiguousarray(self.values, np.float64))
        if not np.isfinite(self.values).all():
            raise ValueError("field contains non-finite values")
        self.values.setflags(write=False)

    @property
    def values2d(self) -> np.ndarray:
        """(n_cells, n_nodes) view of the same memory."""
        return self.values.reshape(self.partition.n_cells, self.vgrid.n_nodes)

    @property
    def point_weight(self) -> float:
        return self.partition.cell_volume * self.vgrid.node_weight

    def with_values(self, values: np.ndarray) -> "DistributionField":
        return DistributionField(
            np.ascontiguousarray(values, np.float64).reshape(self.values.shape),
            self.partition, self.vgrid)

    def same_grids(self, other: "DistributionField") -> bool:
        return self.partition is other.partition and self.vgrid is other.vgrid


def require_same_grids(a: DistributionField, b: DistributionField) -> None:
    if a.values.shape != b.values.shape or not (
            math.isclose(a.partition.box_half_width, b.partition.box_half_width)
            and math.isclose(a.vgrid.v_max, b.vgrid.v_max)
            and a.partition.block_factor == b.partition.block_factor):
        raise ValueError("fields live on different grids")


def zero_field(partition: SpatialPartition, vgrid: VelocityGrid) -> DistributionField:
    n = partition.fine_cells_per_axis
    nv = vgrid.nodes_per_axis
    return DistributionField(np.zeros((n, n, n, nv, nv, nv)), partition, vgrid)


# ---------------------------------------------------------------------------
# quadrature functionals (used by every other module)
# ---------------------------------------------------------------------------

def l1_functional(g: DistributionField) -> float:
    """Midpoint x velocity-weight quadrature of |g|."""
    return float(np.abs(g.values).sum()) * g.point_weight


def moment_vector(g: DistributionField) -> np.ndarray:
    """Quadrature of (1, v1, v2, v3, v^2) * g; shape (5,)."""
    flat = g.values2d
    per_node = flat.sum(axis=0)  # (n_nodes,)
    v = g.vgrid.nodes
    w = g.point_weight
    out = np.empty(5)
    out[0] = per_node.sum()
    out[1:4] = per_node @ v
    out[4] = per_node @ (v ** 2).sum(axis=1)
    return out * w


def weighted_sup(g: DistributionField, alpha: float, tau: float) -> float:
    """max over samples of |g| * exp(alpha x^2 + tau v^2).

    This is the grid evaluation of the weighted sup norm with weight
    m_{alpha,tau}^{-1}; alpha = 0 gives the velocity-only weighted norm.
    Zero samples are excluded so huge weights cannot produce 0 * inf.
    """
    ax_x = g.partition.axis
    ax_v = g.vgrid.axis
    wx = np.exp(alpha * ax_x ** 2) if alpha != 0.0 else np.ones_like(ax_x)
    wv = np.exp(tau * ax_v ** 2)
    absg = np.abs(g.values)
    # contract one axis at a time to avoid materializing the 6D weight
    out = absg
    out = out * wx[:, None, None, None, None, None]
    out = out * wx[None, :, None, None, None, None]
    out = out * wx[None, None, :, None, None, None]
    out = out * wv[None, None, None, :, None, None]
    out = out * wv[None, None, None, None, :, None]
    out = out * wv[None, None, None, None, None, :]
    # a zero sample under an overflowed weight is 0 * inf;exclude it
    if not np.isfinite(out).all():
        out[absg == 0.0] = 0.0
    return float(np.max(out)) if out.size else 0.0


def b_norm(g: DistributionField, tau: float) -> float:
    return weighted_sup(g, 0.0, tau)


def m_norm(g: DistributionField, tau: float) -> float:
    return weighted_sup(g, tau, tau)


def truncation_bound(R: float, tau: float, partition: SpatialPartition,
                     vgrid: VelocityGrid) -> float:
    """Reported bound on the mass ignored by the box truncation.

    For fields dominated by R exp(-tau(x^2+v^2)) the discarded tail is at most
    R exp(-tau min(L^2, v_max^2)) times the truncated phase-space volume.
    """
    L = partition.box_half_width
    vm = vgrid.v_max
    volume = (2.0 * L) ** 3 * (2.0 * vm) ** 3
    return R * math.exp(-tau * min(L * L, vm * vm)) * volume


# ---------------------------------------------------------------------------
# Gaussian synthesis family
# ---------------------------------------------------------------------------

def _axis_sup_factor(decay: float, tau: float, center_sq: float) -> float:
    # sup_x exp(tau x^2 - decay (x - x0)^2) over R^3 with |x0|^2 = center_sq
    if decay <= tau:
        raise ValueError(
            f"metadata needs decay {decay} strictly above the test rate {tau}")
    return math.exp(decay * tau * center_sq / (decay - tau))


@dataclass(frozen=True)
class GaussianTerm:
    """One bump a * exp(-alpha (x-x0)^2 - tau (v-v0)^2)."""

    amplitude: float
    alpha: float
    tau: float
    center_x: tuple = (0.0, 0.0, 0.0)
    center_v: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not self.tau > 0:
            raise ConfigurationError(
                f"gaussian velocity decay tau must be > 0, got {self.tau}")
        if self.alpha < 0:
            raise ConfigurationError(
                f"gaussian spatial decay alpha must be >= 0, got {self.alpha}")
        object.__setattr__(self, "center_x", tuple(float(c) for c in self.center_x))
        object.__setattr__(self, "center_v", tuple(float(c) for c in self.center_v))

    def _profile(self, axis: np.ndarray, rate: float, centers) -> list:
        return [np.exp(-rate * (axis - c) ** 2) for c in centers]

    def sample(self, partition: SpatialPartition, vgrid: VelocityGrid) -> np.ndarray:
        px = self._profile(partition.axis, self.alpha, self.center_x)
        pv = self._profile(vgrid.axis, self.tau, self.center_v)
        out = self.amplitude * (
            px[0][:, None, None, None, None, None]
            * px[1][None, :, None, None, None, None]
            * px[2][None, None, :, None, None, None]
            * pv[0][None, None, None, :, None, None]
            * pv[1][None, None, None, None, :, None]
            * pv[2][None, None, None, None, None, :])
        return out

    # -- closed-form metadata ------------------------------------------------

    def m_norm_bound(self, tau_test: float) -> float:
        """Upper bound on sup |g| exp(tau_test (x^2 + v^2))."""
        cx = sum(c * c for c in self.center_x)
        cv = sum(c * c for c in self.center_v)
        return abs(self.amplitude) * _axis_sup_factor(self.alpha, tau_test, cx) \
            * _axis_sup_factor(self.tau, tau_test, cv)

    def b_norm_bound(self, tau_test: float) -> float:
        """Upper bound on sup |g| exp(tau_test v^2)."""
        cv = sum(c * c for c in self.center_v)
        return abs(self.amplitude) * _axis_sup_factor(self.tau, tau_test, cv)

    def lipschitz_bound(self, tau_test: float) -> float:
        """Upper bound M on sup_{|y|<=1} ||T_y g - g||_{M_tau} / |y|.

        Bounds |grad_x g| * exp(tau(x^2+v^2)) over all x within distance 1 of
        the evaluation point: with r = |z - x0| the spatial factor is at most
        2 a r exp(-a r^2 + tau (r + c)^2), c = |x0| + 1, whose stationary
        point has the closed form below (needs a > tau).
        """
        a = self.alpha
        t = tau_test
        if a <= t:
            raise ValueError(
                f"lipschitz metadata needs alpha {a} > test rate {t}")
        c = math.sqrt(sum(cc * cc for cc in self.center_x)) + 1.0
        r = (t * c + math.sqrt(t * t * c * c + 2.0 * (a - t))) / (2.0 * (a - t))
        spatial = 2.0 * a * r * math.exp(-a * r * r + t * (r + c) ** 2)
        cv = sum(cc * cc for cc in self.center_v)
        return abs(self.amplitude) * spatial * _axis_sup_factor(self.tau, t, cv)

    def l1_exact(self, box_half_width: float | None = None) -> float:
        """Full-space integral; alpha = 0 needs the box for the x factor."""
        vel = (math.pi / self.tau) ** 1.5
        if self.alpha > 0:
            return abs(self.amplitude) * (math.pi / self.alpha) ** 1.5 * vel
        if box_half_width is None:
            raise ValueError("uniform-in-x term needs box_half_width for L1")
        return abs(self.amplitude) * (2.0 * box_half_width) ** 3 * vel


@dataclass(frozen=True)
class GaussianMixture:
    """Sum of Gaussian terms with summed metadata bounds."""

    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ConfigurationError("mixture needs at least one term")

    def sample(self, partition, vgrid) -> np.ndarray:
        out = self.terms[0].sample(partition, vgrid)
        for t in self.terms[1:]:
            out += t.sample(partition, vgrid)
        return out

    def field(self, partition, vgrid) -> DistributionField:
        return DistributionField(self.sample(partition, vgrid), partition, vgrid)

    def m_norm_bound(self, tau_test):
        return sum(t.m_norm_bound(tau_test) for t in self.terms)

    def b_norm_bound(self, tau_test):
        return sum(t.b_norm_bound(tau_test) for t in self.terms)

    def lipschitz_bound(self, tau_test):
        return sum(t.lipschitz_bound(tau_test) for t in self.terms)

    def l1_exact(self, box_half_width=None):
        return sum(t.l1_exact(box_half_width) for t in self.terms)

    def scaled(self, factor: float) -> "GaussianMixture":
        return GaussianMixture(tuple(
            GaussianTerm(t.amplitude * factor, t.alpha, t.tau,
                         t.center_x, t.center_v) for t in self.terms))


def gaussian_field(spec, partition: SpatialPartition,
                   vgrid: VelocityGrid) -> DistributionField:
    """Sample a Gaussian bump (or mixture) on the grids."""
    if isinstance(spec, GaussianTerm):
        spec = GaussianMixture((spec,))
    return spec.field(partition, vgrid)


# ---------------------------------------------------------------------------
# binary snapshots
# ---------------------------------------------------------------------------

def write_snapshot(path, g: DistributionField) -> None:
    """Magic "KDL1", version byte, six little-endian int32 dims (3 spatial,
    3 velocity), then row-major little-endian float64 samples with the
    velocity index varying fastest."""
    dims = g.values.shape
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<B", SNAPSHOT_VERSION))
        fh.write(struct.pack("<6i", *dims))
        fh.write(np.ascontiguousarray(g.values, dtype="<f8").tobytes())


def read_snapshot(path):
    """Returns (dims tuple, values array). Geometry is not stored; rebuild the
    field with read_snapshot_field when the grids are known."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != SNAPSHOT_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        (version,) = struct.unpack("<B", fh.read(1))
        if version != SNAPSHOT_VERSION:
            raise ValueError(f"{path}: unsupported snapshot version {version}")
        dims = struct.unpack("<6i", fh.read(24))
        count = int(np.prod(dims))
        data = np.frombuffer(fh.read(count * 8), dtype="<f8", count=count)
    return dims, data.reshape(dims).astype(np.float64)


def read_snapshot_field(path, partition: SpatialPartition,
                        vgrid: VelocityGrid) -> DistributionField:
    _, values = read_snapshot(path)
    return DistributionField(values, partition, vgrid)
