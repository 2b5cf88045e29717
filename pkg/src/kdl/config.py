"""Key-value run configuration: parsing, defaults, fail-fast validation.

The config format is plain text, one dotted.key = value per line, # comments.
Values are scalars, space-separated lists, or 3-vectors depending on the key.
Initial conditions and comparison fields are Gaussian mixtures spelled as
indexed groups (ic.0.amplitude, ic.0.alpha, ...).

Validation is strict: unknown keys are rejected unless explicitly allowed,
every module precondition that can be checked from the file is checked here,
and all violations are reported together.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigurationError
from .phase_space import (GaussianMixture, GaussianTerm, build_partition,
                          velocity_grid)

SCHEMA_VERSION = 1

# key -> (type tag, default); None default means optional/absent
_SCHEMA = {
    "schema_version": ("int", SCHEMA_VERSION),
    "seed": ("int", 1234),
    "output.dir": ("str", "out"),

    "domain.box_half_width": ("float", 1.0),
    "domain.fine_cells_per_axis": ("int", 8),
    "domain.block_factor": ("int", 2),
    "domain.v_max": ("float", 3.5),
    "domain.velocity_nodes_per_axis": ("int", 8),

    "kernel.form": ("str", "constant_maxwell"),
    "kernel.b0": ("float", 1.0),
    "kernel.lambda": ("float", 0.0),
    "kernel.n_theta": ("int", 2),
    "kernel.n_phi": ("int", 4),
    "kernel.s_floor_scale": ("float", 1e-6),

    "scheme.dt": ("float", 0.01),
    "scheme.t_final": ("float", 0.1),
    "scheme.streaming": ("str", "conservative_remap"),
    "scheme.periodic": ("bool", False),
    "scheme.moment_fix": ("bool", False),
    "scheme.snapshot_times": ("floats", ()),
    "scheme.snapshot_cap": ("int?", None),
    "scheme.declared_r_plus_rho": ("float?", None),
    "scheme.declared_sigma": ("float?", None),

    "analysis.tau_list": ("floats", (1.0,)),
    "analysis.diag_tau": ("float", 1.0),
    "analysis.envelope_r": ("float?", None),
    "analysis.envelope_tau0": ("float?", None),

    "constants.R": ("float", 1.0),
    "constants.M": ("float", 8.0),
    "constants.T": ("float", 1.0),
    "constants.tau": ("float", 1.0),
    "constants.sigma": ("float", 0.5),
    "constants.tau1": ("float?", None),
    "constants.tau_star": ("float?", None),
    "constants.M0": ("float?", None),

    "verify.trials": ("int", 100),
    "verify.collision_box": ("float", 0.25),
    "verify.collision_cells": ("int", 4),
    "verify.velocity_nodes": ("int", 6),
    "verify.v_max": ("float", 2.2),
    "verify.n_theta": ("int", 2),
    "verify.n_phi": ("int", 4),
    "verify.transport_box": ("float", 2.0),
    "verify.transport_cells": ("int", 8),
    "verify.t_max": ("float", 0.15),
    "verify.include": ("strs", ()),

    "converge.steps": ("ints", (3, 6, 12)),
    "converge.block_factors": ("ints", (4, 2, 1)),
    "converge.reference_refine": ("int", 2),
    "converge.t_final": ("float", 0.3),

    "discrepancy.method": ("str", "auto"),
}

_MIXTURE_FIELDS = ("amplitude", "alpha", "tau", "center_x", "center_v")
_MIXTURE_RE = re.compile(
    r"^(ic|discrepancy\.other)\.(\d+)\.(amplitude|alpha|tau|center_x|center_v)$")

_DEFAULT_IC = {"0.amplitude": "0.02", "0.alpha": "2.0", "0.tau": "1.0"}


def _parse_value(tag: str, raw: str, key: str, problems: list):
    raw = raw.strip()
    try:
        if tag == "int" or tag == "int?":
            return int(raw)
        if tag == "float" or tag == "float?":
            return float(raw)
        if tag == "bool":
            low = raw.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(raw)
        if tag == "str":
            return raw
        if tag == "floats":
            return tuple(float(tok) for tok in raw.split())
        if tag == "ints":
            return tuple(int(tok) for tok in raw.split())
        if tag == "strs":
            return tuple(raw.split())
        if tag == "vec3":
            vals = tuple(float(tok) for tok in raw.split())
            if len(vals) != 3:
                raise ValueError("need 3 components")
            return vals
    except ValueError as exc:
        problems.append(f"{key}: cannot parse {raw!r} as {tag} ({exc})")
        return None
    raise AssertionError(f"unhandled tag {tag}")


def _read_pairs(text: str, problems: list) -> dict:
    pairs = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            problems.append(f"line {lineno}: expected key = value, got {line!r}")
            continue
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key in pairs:
            problems.append(f"line {lineno}: duplicate key {key}")
            continue
        pairs[key] = raw.strip()
    return pairs


def _collect_mixture(prefix: str, pairs: dict, problems: list, taken: set):
    groups: dict[int, dict] = {}
    for key, raw in pairs.items():
        m = _MIXTURE_RE.match(key)
        if not m or m.group(1) != prefix:
            continue
        taken.add(key)
        idx = int(m.group(2))
        fieldname = m.group(3)
        tag = "vec3" if fieldname.startswith("center") else "float"
        val = _parse_value(tag, raw, key, problems)
        groups.setdefault(idx, {})[fieldname] = val
    if not groups:
        return None
    terms = []
    for idx in sorted(groups):
        g = groups[idx]
        missing = [f for f in ("amplitude", "alpha", "tau") if f not in g]
        if missing:
            problems.append(f"{prefix}.{idx}: missing fields {missing}")
            continue
        try:
            terms.append(GaussianTerm(
                amplitude=g["amplitude"], alpha=g["alpha"], tau=g["tau"],
                center_x=g.get("center_x", (0.0, 0.0, 0.0)),
                center_v=g.get("center_v", (0.0, 0.0, 0.0))))
        except (ConfigurationError, TypeError) as exc:
            problems.append(f"{prefix}.{idx}: {exc}")
    if not terms:
        problems.append(f"{prefix}: no valid terms")
        return None
    return GaussianMixture(tuple(terms))


@dataclass(frozen=True)
class RunConfig:
    values: dict
    ic: GaussianMixture
    other: GaussianMixture | None = None
    source: str = "<memory>"

    def __getitem__(self, key):
        return self.values[key]

    # -- constructors for the model objects ---------------------------------

    def partition(self):
        return build_partition(self["domain.box_half_width"],
                               self["domain.fine_cells_per_axis"],
                               self["domain.block_factor"])

    def vgrid(self):
        return velocity_grid(self["domain.v_max"],
                             self["domain.velocity_nodes_per_axis"])

    def kernel(self):
        from .kernels import KernelSpec
        return KernelSpec(self["kernel.form"], self["kernel.b0"],
                          self["kernel.lambda"],
                          s_floor=self["kernel.s_floor_scale"]
                          * self["domain.v_max"])

    def quad(self):
        from .kernels import sphere_quadrature
        return sphere_quadrature(self["kernel.n_theta"], self["kernel.n_phi"])

    def streaming(self):
        from .operators import StreamingScheme
        return StreamingScheme(self["scheme.streaming"],
                               self["scheme.periodic"])

    def scheme_params(self):
        from .scheme import SchemeParams
        return SchemeParams(
            dt=self["scheme.dt"], t_final=self["scheme.t_final"],
            kernel=self.kernel(), quad=self.quad(),
            streaming=self.streaming(),
            moment_fix=self["scheme.moment_fix"],
            diag_tau=self["analysis.diag_tau"],
            declared_r_plus_rho=self["scheme.declared_r_plus_rho"],
            declared_sigma=self["scheme.declared_sigma"],
            snapshot_times=self["scheme.snapshot_times"],
            snapshot_cap=self["scheme.snapshot_cap"])

    def constants_inputs(self):
        return dict(R=self["constants.R"], M=self["constants.M"],
                    T=self["constants.T"], tau=self["constants.tau"],
                    sigma=self["constants.sigma"],
                    b0=self["kernel.b0"], lam=self["kernel.lambda"],
                    tau1=self["constants.tau1"],
                    tau_star=self["constants.tau_star"],
                    M0=self["constants.M0"])

    def family(self):
        from .analysis import GaussianFamily
        return GaussianFamily(tau=self["constants.tau"],
                              sigma=self["constants.sigma"],
                              r_cap=self["constants.R"],
                              m_cap=self["constants.M"])

    def campaign_grids(self):
        from .analysis import CampaignGrids
        return CampaignGrids(
            collision_box=self["verify.collision_box"],
            collision_cells=self["verify.collision_cells"],
            velocity_nodes=self["verify.velocity_nodes"],
            v_max=self["verify.v_max"],
            n_theta=self["verify.n_theta"], n_phi=self["verify.n_phi"],
            transport_box=self["verify.transport_box"],
            transport_cells=self["verify.transport_cells"],
            t_max=self["verify.t_max"])

    def echo(self) -> dict:
        """Flat, JSON-ready view of every resolved setting."""
        out = dict(sorted(self.values.items()))
        for label, mix in (("ic", self.ic), ("discrepancy.other", self.other)):
            if mix is None:
                continue
            for i, t in enumerate(mix.terms):
                out[f"{label}.{i}.amplitude"] = t.amplitude
                out[f"{label}.{i}.alpha"] = t.alpha
                out[f"{label}.{i}.tau"] = t.tau
                out[f"{label}.{i}.center_x"] = list(t.center_x)
                out[f"{label}.{i}.center_v"] = list(t.center_v)
        return out


def _cross_validate(cfg: RunConfig, problems: list) -> None:
    checks = (
        ("partition", cfg.partition),
        ("velocity grid", cfg.vgrid),
        ("kernel", cfg.kernel),
        ("sphere quadrature", cfg.quad),
        ("streaming", cfg.streaming),
        ("scheme", cfg.scheme_params),
    )
    for label, ctor in checks:
        try:
            ctor()
        except ConfigurationError as exc:
            problems.extend(f"{label}: {v}" for v in exc.violations)
    v = cfg.values
    if not (0 < v["scheme.dt"] < v["scheme.t_final"]):
        problems.append(
            f"scheme: need 0 < dt < t_final, got dt={v['scheme.dt']}, "
            f"t_final={v['scheme.t_final']}")
    if not (0 < v["constants.sigma"] < v["constants.tau"]):
        problems.append(
            f"constants: need 0 < sigma < tau, got "
            f"({v['constants.sigma']}, {v['constants.tau']})")
    if v["verify.trials"] < 1:
        problems.append("verify.trials must be >= 1")
    for key in ("verify.collision_cells", "verify.velocity_nodes",
                "verify.transport_cells"):
        if v[key] % 2 or v[key] < 2:
            problems.append(f"{key} must be even and >= 2")
    steps = v["converge.steps"]
    blocks = v["converge.block_factors"]
    if len(steps) != len(blocks):
        problems.append("converge.steps and converge.block_factors must have "
                        "equal length")
    if list(steps) != sorted(steps):
        problems.append("converge.steps must be ordered coarse to fine")
    for a, b in zip(steps, steps[1:]):
        if a < 1 or b % a:
            problems.append(
                f"converge.steps must nest (each divides the next), got {steps}")
            break
    n_fine = v["domain.fine_cells_per_axis"]
    for m in blocks:
        if m < 1 or n_fine % m:
            problems.append(
                f"converge.block_factors: {m} does not divide "
                f"domain.fine_cells_per_axis {n_fine}")
    if v["discrepancy.method"] not in ("auto", "full6d", "marginal"):
        problems.append(
            f"discrepancy.method must be auto|full6d|marginal, got "
            f"{v['discrepancy.method']!r}")
    if v["schema_version"] != SCHEMA_VERSION:
        problems.append(
            f"schema_version {v['schema_version']} unsupported; this build "
            f"reads version {SCHEMA_VERSION}")


def parse_config_text(text: str, source: str = "<memory>",
                      allow_unknown: bool = False) -> RunConfig:
    problems: list[str] = []
    pairs = _read_pairs(text, problems)
    taken: set[str] = set()

    ic = _collect_mixture("ic", pairs, problems, taken)
    if ic is None and not any(k.startswith("ic.") for k in pairs):
        fallback = {f"ic.{k}": raw for k, raw in _DEFAULT_IC.items()}
        ic = _collect_mixture("ic", fallback, problems, set())
    other = _collect_mixture("discrepancy.other", pairs, problems, taken)

    values = {}
    for key, (tag, default) in _SCHEMA.items():
        if key in pairs:
            taken.add(key)
            val = _parse_value(tag, pairs[key], key, problems)
            values[key] = default if val is None else val
        else:
            values[key] = default

    unknown = sorted(set(pairs) - taken)
    if unknown and not allow_unknown:
        problems.append(
            f"unknown keys: {', '.join(unknown)} "
            f"(pass --allow-unknown-keys to ignore)")
    if ic is None:
        problems.append("ic: initial condition mixture is invalid")
        raise ConfigurationError(problems)

    cfg = RunConfig(values=values, ic=ic, other=other, source=source)
    _cross_validate(cfg, problems)
    if problems:
        raise ConfigurationError(list(dict.fromkeys(problems)))
    return cfg


def parse_config(path, allow_unknown: bool = False) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"config file not found: {p}")
    return parse_config_text(p.read_text(), source=str(p),
                             allow_unknown=allow_unknown)
