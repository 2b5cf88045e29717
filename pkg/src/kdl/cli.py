"""Command line orchestration: run, converge, verify, constants, discrepancy.

Every invocation writes a manifest (config echo, library version, seed,
worker count, truncation-error bound, positivity-guard verdict, wall clock)
plus the subcommand's artifacts.  Reductions are fixed-order everywhere, so
reruns with the same config and seed give bitwise-identical CSV, snapshot
and verdict outputs for any worker count.

Worker control must happen before the compiled kernels are first imported;
parse order in main() is deliberate.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .errors import ConfigurationError

SUBCOMMANDS = ("run", "converge", "verify", "constants", "discrepancy")
EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_VERIFY_FAILED = 3


def _configure_workers(workers):
    """Set the compiled-kernel thread count; honors counts above the core
    count when called before the first numba import."""
    if workers is None:
        return None
    w = max(1, int(workers))
    if "numba" not in sys.modules:
        os.environ["NUMBA_NUM_THREADS"] = str(w)
    import numba
    numba.set_num_threads(min(w, numba.config.NUMBA_NUM_THREADS))
    return w


def _fmt(x) -> str:
    return repr(float(x))


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _diagnostics_csv(traj) -> str:
    from .scheme import DIAGNOSTIC_COLUMNS
    lines = [",".join(DIAGNOSTIC_COLUMNS)]
    n = traj.n_steps + 1
    for i in range(n):
        lines.append(",".join(
            _fmt(traj.diagnostics[c][i]) for c in DIAGNOSTIC_COLUMNS))
    return "\n".join(lines) + "\n"


def _convergence_csv(table) -> str:
    lines = ["dt,block_factor,delta_x,budget,sup_error"]
    for r in table.rows:
        lines.append(",".join([_fmt(r.dt), str(r.block_factor),
                               _fmt(r.delta_x), _fmt(r.budget),
                               _fmt(r.sup_error)]))
    return "\n".join(lines) + "\n"


def _exec_run(cfg, out: Path, manifest: dict) -> int:
    from . import report as fig
    from .phase_space import gaussian_field, write_snapshot
    from .scheme import run

    part, vgrid = cfg.partition(), cfg.vgrid()
    f0 = gaussian_field(cfg.ic, part, vgrid)
    params = cfg.scheme_params()
    traj = run(f0, params)

    (out / "diagnostics.csv").write_text(_diagnostics_csv(traj))
    outputs = ["diagnostics.csv"]
    for j in sorted(traj.snapshots):
        if j == 0 or j == traj.n_steps or j in {
                int(t / params.dt + 1e-9) + 1 for t in params.snapshot_times}:
            name = f"snapshot_{j:06d}.kdl"
            write_snapshot(out / name, traj.snapshots[j])
            outputs.append(name)
    fig.render_run_figure(traj, out / "run_diagnostics.png")
    outputs.append("run_diagnostics.png")

    manifest["guard"] = traj.guard_report
    max_leak = float(abs(traj.stream_leaks).max()) if traj.n_steps else 0.0
    manifest["max_stream_leak"] = max_leak
    manifest["max_moment_defect"] = [float(abs(traj.moment_defects[:, i]).max())
                                     for i in range(5)] if traj.n_steps else []
    manifest["outputs"] = outputs
    mass0 = traj.diagnostics["mass"][0]
    if not params.streaming.periodic and mass0 > 0 \
            and max_leak > 1e-12 * mass0:
        manifest["warnings"].append(
            "truncation violation: streaming support reached the box "
            f"boundary (max per-step mass leak {max_leak:.3e})")
    if traj.guard_report and not traj.guard_report.get("dt_ok", True):
        manifest["warnings"].append(
            "requested dt exceeds the positivity guard")
    return EXIT_OK


def _exec_converge(cfg, out: Path, manifest: dict) -> int:
    from . import report as fig
    from .analysis import convergence_study

    levels = list(zip(cfg["converge.steps"], cfg["converge.block_factors"]))
    table = convergence_study(
        cfg.ic, cfg["domain.box_half_width"],
        cfg["domain.fine_cells_per_axis"], cfg.vgrid(), cfg.kernel(),
        cfg.quad(), cfg["converge.t_final"], levels,
        cfg["converge.reference_refine"], cfg.streaming(),
        cfg["scheme.moment_fix"])
    (out / "convergence.csv").write_text(_convergence_csv(table))
    _write_json(out / "convergence.json", table.as_dict())
    fig.render_convergence_figure(table, out / "convergence.png")
    manifest["outputs"] = ["convergence.csv", "convergence.json",
                           "convergence.png"]
    manifest["fitted_order"] = table.fitted_order
    manifest["errors_strictly_decreasing"] = table.errors_strictly_decreasing
    return EXIT_OK


def _exec_verify(cfg, out: Path, manifest: dict) -> int:
    from . import report as fig
    from .analysis import verify_inequalities
    from .constants import compute_report

    rep = compute_report(**cfg.constants_inputs())
    verdicts = verify_inequalities(
        cfg.family(), rep, cfg["verify.trials"], cfg.kernel(),
        cfg.campaign_grids(), seed=cfg["seed"],
        include=cfg["verify.include"] or None)
    _write_json(out / "verify.json", [v.as_dict() for v in verdicts])
    fig.render_verify_figure(verdicts, out / "verify_margins.png")
    manifest["outputs"] = ["verify.json", "verify_margins.png"]
    failed = [v.inequality for v in verdicts if not v.passed]
    manifest["failed"] = failed
    return EXIT_VERIFY_FAILED if failed else EXIT_OK


def _exec_constants(cfg, out: Path, manifest: dict) -> int:
    from .constants import compute_report, crosscheck_report

    rep = compute_report(**cfg.constants_inputs())
    max_dev, _ = crosscheck_report(rep)
    payload = rep.as_dict()
    payload["crosscheck_max_rel_dev"] = max_dev
    _write_json(out / "constants.json", payload)
    manifest["outputs"] = ["constants.json"]
    manifest["crosscheck_max_rel_dev"] = max_dev
    return EXIT_OK


def _exec_discrepancy(cfg, out: Path, manifest: dict) -> int:
    from .analysis import discrepancy_report
    from .phase_space import gaussian_field

    if cfg.other is None:
        raise ConfigurationError(
            "discrepancy needs a comparison mixture "
            "(discrepancy.other.0.amplitude = ...)")
    part, vgrid = cfg.partition(), cfg.vgrid()
    g = gaussian_field(cfg.ic, part, vgrid)
    h = gaussian_field(cfg.other, part, vgrid)
    result = discrepancy_report(g, h, cfg["discrepancy.method"])
    _write_json(out / "discrepancy.json", result)
    manifest["outputs"] = ["discrepancy.json"]
    manifest.update(result)
    return EXIT_OK


_EXECUTORS = {"run": _exec_run, "converge": _exec_converge,
              "verify": _exec_verify, "constants": _exec_constants,
              "discrepancy": _exec_discrepancy}


def execute(cfg, subcommand: str, out_dir=None, workers=None) -> int:
    """Run one experiment; writes the manifest and artifacts, returns the
    exit status."""
    if subcommand not in SUBCOMMANDS:
        raise ConfigurationError(f"unknown subcommand {subcommand!r}")
    from .phase_space import gaussian_field, truncation_bound

    out = Path(out_dir if out_dir is not None else cfg["output.dir"])
    out.mkdir(parents=True, exist_ok=True)

    part, vgrid = cfg.partition(), cfg.vgrid()
    f0 = gaussian_field(cfg.ic, part, vgrid)
    quad = cfg.quad()
    manifest = {
        "version": __version__,
        "schema_version": cfg["schema_version"],
        "subcommand": subcommand,
        "config_source": cfg.source,
        "config": cfg.echo(),
        "seed": cfg["seed"],
        "workers": workers,
        "truncation_bound": truncation_bound(
            float(f0.values.max()), cfg["analysis.diag_tau"], part, vgrid),
        # bilinear collision quadrature work per evaluation:
        # n_cells * n_velocity_nodes^2 * n_sphere_nodes
        "collision_cost_per_eval": part.n_cells * vgrid.n_nodes ** 2
        * quad.n_nodes,
        "warnings": [],
    }
    t0 = time.time()
    status = _EXECUTORS[subcommand](cfg, out, manifest)
    manifest["wallclock_s"] = time.time() - t0
    _write_json(out / "manifest.json", manifest)
    return status


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="kdl",
        description="deterministic kinetic model simulator and verifier")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", required=True, help="key-value config file")
    parser.add_argument("--workers", type=int, default=None,
                        help="thread cap (fallback: KDL_WORKERS)")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--allow-unknown-keys", action="store_true")
    args = parser.parse_args(argv)

    workers = args.workers
    if workers is None and os.environ.get("KDL_WORKERS"):
        try:
            workers = int(os.environ["KDL_WORKERS"])
        except ValueError:
            print(json.dumps({"error": "configuration",
                              "message": "KDL_WORKERS must be an integer"}),
                  file=sys.stderr)
            return EXIT_CONFIG
    workers = _configure_workers(workers)

    from .config import parse_config
    try:
        cfg = parse_config(args.config, allow_unknown=args.allow_unknown_keys)
        return execute(cfg, args.subcommand, out_dir=args.out, workers=workers)
    except ConfigurationError as exc:
        print(json.dumps({"error": "configuration",
                          "violations": exc.violations}), file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(json.dumps({"error": "io", "message": str(exc)}),
              file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - structured error reporting
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
