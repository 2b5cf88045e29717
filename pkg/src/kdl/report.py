"""Figure rendering for run reports.

Every subcommand that writes delimited output also drops a PNG next to it:
diagnostics time series for runs, the log-log error ladder for convergence
studies, and the violation/tolerance margins for verification campaigns.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def render_run_figure(traj, path) -> None:
    d = traj.diagnostics
    t = d["t"]
    fig, axes = plt.subplots(3, 1, figsize=(7, 8), sharex=True)

    ax = axes[0]
    for name, label in (("mass", "mass"), ("energy", "energy")):
        ref = d[name][0]
        scale = abs(ref) if ref else 1.0
        ax.plot(t, (d[name] - ref) / scale, label=f"{label} drift")
    mom = np.sqrt(d["px"] ** 2 + d["py"] ** 2 + d["pz"] ** 2)
    ax.plot(t, mom - mom[0], label="|momentum| drift")
    ax.set_ylabel("relative drift")
    ax.legend(fontsize=8)

    ax = axes[1]
    ax.plot(t, d["l1"], label="L1")
    ax.plot(t, d["bnorm"], label="weighted sup (v)")
    ax.plot(t, d["mnorm"], label="weighted sup (x,v)")
    ax.set_yscale("log")
    ax.set_ylabel("norms")
    ax.legend(fontsize=8)

    ax = axes[2]
    ax.plot(t, d["minval"])
    ax.axhline(0.0, color="k", lw=0.5)
    ax.set_ylabel("min value")
    ax.set_xlabel("t")

    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_convergence_figure(table, path) -> None:
    budgets = [r.budget for r in table.rows]
    errs = [r.sup_error for r in table.rows]
    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    ax.loglog(budgets, errs, "o-", label="measured")
    b = np.array(sorted(budgets))
    fit = np.exp(table.fit_log_amplitude) * b ** table.fitted_order
    ax.loglog(b, fit, "--",
              label=f"fit, order {table.fitted_order:.2f}")
    ax.set_xlabel("dt + cell diameter")
    ax.set_ylabel("sup-in-time L1 error vs reference")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_verify_figure(verdicts, path) -> None:
    names = [v.inequality for v in verdicts]
    tol = np.array([max(v.tolerance, 1e-300) for v in verdicts])
    vio = np.array([v.max_violation for v in verdicts])
    x = np.arange(len(names))
    fig, ax = plt.subplots(figsize=(max(6.0, 0.42 * len(names)), 4.2))
    ax.bar(x - 0.2, tol, width=0.4, label="tolerance")
    ax.bar(x + 0.2, np.maximum(vio, 1e-300), width=0.4, label="violation")
    ax.set_yscale("log")
    ax.set_xticks(x)
    ax.set_xticklabels(names, rotation=75, fontsize=7)
    ax.set_ylabel("magnitude")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
