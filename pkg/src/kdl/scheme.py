"""The explicit one-step recurrence and its step-function trajectory.

One step maps f to U^dt f + dt * J_pi(U^dt f): free streaming over the step,
then the homogenized collision increment evaluated on the streamed state.
The trajectory object stores the iterates together with per-step diagnostics
(moments, norms, minimum value, streaming mass leak, and the raw quadrature
moment defect of the collision increment).

The piecewise-constant-in-time assembly starts at iterate one: the value on
[(j-1) dt, j dt) is the j-th iterate, so time zero maps to iterate one and
times at or beyond n_steps * dt are outside the covered window.  This mirrors
the step-function convention of the underlying recurrence rather than
patching in the initial datum.

positivity_timestep returns the guard 1 / D0 with D0 = c_sigma (R + rho) / 2:
an explicit step at or below it cannot produce negative values from
nonnegative data whose weighted sup norm honors the declared bound, because
the loss multiplier stays at most one and every other contribution is a
nonnegative combination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import cutoff_constants
from .errors import ConfigurationError
from .kernels import KernelSpec, SphereQuadrature
from .operators import (DEFAULT_STREAMING, StreamingScheme,
                        homogenized_gain_loss, project_moments, stream)
from .phase_space import (DistributionField, b_norm, l1_functional, m_norm,
                          moment_vector)

_INDEX_EPS = 1e-9  # guards floor(t / dt) against representation noise

DIAGNOSTIC_COLUMNS = ("t", "mass", "px", "py", "pz", "energy",
                      "l1", "bnorm", "mnorm", "minval")


@dataclass(frozen=True)
class SchemeParams:
    dt: float
    t_final: float
    kernel: KernelSpec
    quad: SphereQuadrature
    streaming: StreamingScheme = DEFAULT_STREAMING
    moment_fix: bool = False
    diag_tau: float = 1.0
    declared_r_plus_rho: float | None = None
    declared_sigma: float | None = None
    snapshot_times: tuple = ()
    snapshot_cap: int | None = None

    def __post_init__(self):
        if not (0.0 < self.dt < self.t_final):
            raise ConfigurationError(
                f"need 0 < dt < t_final, got dt={self.dt}, "
                f"t_final={self.t_final}")
        if not self.diag_tau > 0:
            raise ConfigurationError(
                f"diagnostic tau must be > 0, got {self.diag_tau}")
        object.__setattr__(self, "snapshot_times",
                           tuple(float(t) for t in self.snapshot_times))

    @property
    def n_steps(self) -> int:
        return int(math.floor(self.t_final / self.dt + _INDEX_EPS))


@dataclass
class Trajectory:
    snapshots: dict          # step index -> DistributionField (subject to cap)
    dt: float
    n_steps: int
    params: SchemeParams
    diagnostics: dict        # column name -> array of length n_steps + 1
    moment_defects: np.ndarray   # (n_steps, 5) raw collision-increment moments
    stream_leaks: np.ndarray     # (n_steps,) mass lost through the box walls
    guard_report: dict = field(default_factory=dict)

    @property
    def initial(self) -> DistributionField:
        return self.snapshots[0]

    @property
    def final(self) -> DistributionField:
        return self.snapshots[self.n_steps]

    def times(self) -> np.ndarray:
        return self.diagnostics["t"]


def _step_detail(f_prev: DistributionField, params: SchemeParams):
    streamed = stream(f_prev, params.dt, params.streaming)
    leak = l1_functional(f_prev) - l1_functional(streamed)
    gain, loss = homogenized_gain_loss(streamed, params.kernel, params.quad)
    incr = streamed.with_values(gain.values - loss.values)
    defect = moment_vector(incr)
    if params.moment_fix:
        incr = project_moments(incr)
    f_next = streamed.with_values(streamed.values + params.dt * incr.values)
    return f_next, leak, defect


def step(f_prev: DistributionField, params: SchemeParams) -> DistributionField:
    """One update: stream over dt, then add dt times the homogenized
    collision increment (optionally moment-projected)."""
    f_next, _, _ = _step_detail(f_prev, params)
    return f_next


def _diag_row(g: DistributionField, tau_d: float):
    m = moment_vector(g)
    return (m[0], m[1], m[2], m[3], m[4], l1_functional(g),
            b_norm(g, tau_d), m_norm(g, tau_d), float(g.values.min()))


def positivity_timestep(r_plus_rho: float, sigma: float,
                        spec: KernelSpec) -> float:
    """Largest guaranteed-nonnegative step: 1 / D0, D0 = c_sigma (R+rho) / 2."""
    if not (r_plus_rho > 0 and sigma > 0):
        raise ConfigurationError(
            f"guard inputs must be positive, got R+rho={r_plus_rho}, "
            f"sigma={sigma}")
    if not spec.b0 > 0:
        raise ConfigurationError("positivity guard needs a kernel with b0 > 0")
    c_sigma = cutoff_constants(spec.b0, spec.lam, sigma).c_tau
    return 1.0 / (0.5 * c_sigma * r_plus_rho)


def _requested_indices(params: SchemeParams, n_steps: int) -> set:
    kept = {0, n_steps}
    for t in params.snapshot_times:
        j = int(math.floor(t / params.dt + _INDEX_EPS)) + 1
        if 1 <= j <= n_steps:
            kept.add(j)
    return kept


def run(f0: DistributionField, params: SchemeParams) -> Trajectory:
    """Iterate the recurrence n_steps = [[t_final / dt]] times."""
    n_steps = params.n_steps
    guard: dict = {}
    if params.kernel.collisionless:
        guard["collisionless"] = True
    elif params.declared_r_plus_rho is not None and params.declared_sigma is not None:
        guard_dt = positivity_timestep(params.declared_r_plus_rho,
                                       params.declared_sigma, params.kernel)
        measured = b_norm(f0, params.declared_sigma)
        guard.update({
            "guard_dt": guard_dt,
            "requested_dt": params.dt,
            "dt_ok": params.dt <= guard_dt,
            "declared_r_plus_rho": params.declared_r_plus_rho,
            "declared_sigma": params.declared_sigma,
            "measured_initial_b_sigma": measured,
            "declared_mismatch": measured > params.declared_r_plus_rho,
        })

    keep_all = params.snapshot_cap is None or n_steps + 1 <= params.snapshot_cap
    requested = _requested_indices(params, n_steps)

    cols = {name: np.empty(n_steps + 1) for name in DIAGNOSTIC_COLUMNS}
    defects = np.empty((n_steps, 5))
    leaks = np.empty(n_steps)
    snapshots = {0: f0}
    row = _diag_row(f0, params.diag_tau)
    cols["t"][0] = 0.0
    for name, val in zip(DIAGNOSTIC_COLUMNS[1:], row):
        cols[name][0] = val

    f = f0
    for j in range(1, n_steps + 1):
        try:
            f, leak, defect = _step_detail(f, params)
        except ValueError as exc:
            raise RuntimeError(
                f"non-finite values produced at step {j}: {exc}") from exc
        leaks[j - 1] = leak
        defects[j - 1] = defect
        if keep_all or j in requested:
            snapshots[j] = f
        cols["t"][j] = j * params.dt
        row = _diag_row(f, params.diag_tau)
        for name, val in zip(DIAGNOSTIC_COLUMNS[1:], row):
            cols[name][j] = val

    return Trajectory(snapshots, params.dt, n_steps, params, cols,
                      defects, leaks, guard)


def trajectory_at(traj: Trajectory, t: float) -> DistributionField:
    """Value of the step-function assembly at time t.

    The assembly takes the j-th iterate on [(j-1) dt, j dt) for j >= 1, so it
    covers [0, n_steps * dt); t outside that window is a domain error."""
    if t < 0.0:
        raise ValueError(f"time {t} is negative")
    j = int(math.floor(t / traj.dt + _INDEX_EPS)) + 1
    if j > traj.n_steps:
        raise ValueError(
            f"time {t} is outside the covered window "
            f"[0, {traj.n_steps * traj.dt}) of the step trajectory")
    if j not in traj.snapshots:
        raise KeyError(
            f"snapshot {j} was not retained (cap {traj.params.snapshot_cap}); "
            f"request its time via snapshot_times")
    return traj.snapshots[j]
