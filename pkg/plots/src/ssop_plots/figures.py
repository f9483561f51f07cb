"""The eight figure families and their renderers.

Every error axis is log scaled. Mean curves carry one-standard-deviation
bands where per-trajectory series exist. Output files are deterministic:
identical inputs give byte-identical images (timestamps and random ids are
disabled).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "ssop-plots"

import matplotlib.pyplot as plt
import numpy as np

from ssop_plots.schema import SchemaMismatch, column, group_by, read_csv

METHOD_STYLE = {
    "ssop": {"color": "tab:green", "ls": "-", "label": "space-time ROM"},
    "ssop_transfer": {"color": "tab:green", "ls": "-", "label": "space-time ROM (transfer)"},
    "podg": {"color": "tab:brown", "ls": "-", "label": "POD-Galerkin"},
    "spod_proj": {"color": "tab:green", "ls": "--", "label": "spectral projection"},
    "pod_proj": {"color": "tab:brown", "ls": "--", "label": "POD projection"},
}


@dataclass
class FigureSpec:
    figure_id: str
    inputs: list
    out_path: str
    log_y: bool = True
    fmt: str | None = None  # inferred from out_path when None

    def __post_init__(self):
        if self.figure_id not in FIGURE_FAMILIES:
            raise SchemaMismatch(
                f"unknown figure family {self.figure_id!r}; "
                f"known: {sorted(FIGURE_FAMILIES)}"
            )
        self.inputs = [Path(p) for p in self.inputs]


def _style(method):
    return METHOD_STYLE.get(method, {"color": "tab:gray", "ls": "-", "label": method})


def _save(fig, spec: FigureSpec):
    out = Path(spec.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fmt = spec.fmt or out.suffix.lstrip(".") or "png"
    metadata = None
    if fmt == "pdf":
        metadata = {"CreationDate": None, "Producer": None, "Creator": None}
    elif fmt == "png":
        metadata = {"Software": None}
    elif fmt == "svg":
        metadata = {"Date": None}
    fig.savefig(out, format=fmt, metadata=metadata, dpi=150)
    plt.close(fig)
    return out


def _mean_std_series(rows):
    """Per-method mean and std of e_j over trajectories."""
    out = {}
    for method, mrows in group_by(rows, "method").items():
        by_traj = group_by(mrows, "trajectory_index")
        series = []
        for rows_t in by_traj.values():
            rows_t = sorted(rows_t, key=lambda r: int(r["time_index"]))
            series.append([float(r["e_j"]) for r in rows_t])
        arr = np.asarray(series)
        out[method] = (arr.mean(axis=0), arr.std(axis=0))
    return out


def render_err_vs_time(spec: FigureSpec):
    rows = read_csv(spec.inputs[0], ["method", "trajectory_index", "time_index", "e_j"])
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for method, (mean, std) in sorted(_mean_std_series(rows).items()):
        style = _style(method)
        j = np.arange(mean.size)
        ax.plot(j, mean, style["ls"], color=style["color"], label=style["label"])
        if np.any(std > 0):
            ax.fill_between(j, np.maximum(mean - std, 1e-300), mean + std,
                            color=style["color"], alpha=0.2, linewidth=0)
    ax.set_xlabel("time step")
    ax.set_ylabel("relative error")
    if spec.log_y:
        ax.set_yscale("log")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, spec)


def _err_vs_r(spec: FigureSpec, methods):
    rows = read_csv(spec.inputs[0], ["r", "method", "e_timeavg"])
    fig, ax = plt.subplots(figsize=(5.6, 4.0))
    for method, mrows in sorted(group_by(rows, "method").items()):
        if methods is not None and method not in methods:
            continue
        mrows = sorted(mrows, key=lambda r: int(r["r"]))
        style = _style(method)
        ax.plot(column(mrows, "r", int), column(mrows, "e_timeavg"),
                style["ls"], marker="o", ms=3, color=style["color"], label=style["label"])
    ax.set_xlabel("modes per frequency r")
    ax.set_ylabel("time-averaged relative error")
    if spec.log_y:
        ax.set_yscale("log")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, spec)


def render_rep_err(spec: FigureSpec):
    """Representation (projection) errors only."""
    return _err_vs_r(spec, methods={"spod_proj", "pod_proj"})


def render_err_vs_r(spec: FigureSpec):
    return _err_vs_r(spec, methods=None)


def render_excluded_energy(spec: FigureSpec):
    frac_rows = read_csv(spec.inputs[0], ["r", "excluded_fraction"])
    fig, axes = plt.subplots(1, 2, figsize=(9.2, 3.8))
    axes[0].plot(column(frac_rows, "r", int), column(frac_rows, "excluded_fraction"),
                 "-o", ms=3, color="tab:blue")
    axes[0].set_xlabel("modes per frequency r")
    axes[0].set_ylabel("excluded energy fraction")
    axes[0].set_yscale("log")
    if len(spec.inputs) > 1:
        spec_rows = read_csv(spec.inputs[1],
                             ["omega", "mode_index", "energy", "retained", "threshold"])
        by_mode = group_by(spec_rows, "mode_index")
        for mode, mrows in sorted(by_mode.items(), key=lambda kv: int(kv[0])):
            mrows = sorted(mrows, key=lambda r: float(r["omega"]))
            omegas = column(mrows, "omega")
            energies = np.array(column(mrows, "energy"))
            kept = np.array(column(mrows, "retained", int), dtype=bool)
            axes[1].plot(np.where(kept, omegas, np.nan), np.where(kept, energies, np.nan),
                         color="tab:red", lw=0.8)
            axes[1].plot(np.where(~kept, omegas, np.nan), np.where(~kept, energies, np.nan),
                         color="tab:blue", lw=0.8)
        axes[1].axhline(float(spec_rows[0]["threshold"]), color="tab:orange", lw=1.0)
        axes[1].set_xlabel("frequency")
        axes[1].set_ylabel("mode energy")
        axes[1].set_yscale("log")
    fig.tight_layout()
    return _save(fig, spec)


def render_cpu_vs_r(spec: FigureSpec):
    rows = read_csv(spec.inputs[0], ["r", "ssop_seconds", "podg_seconds"])
    rows = sorted(rows, key=lambda r: int(r["r"]))
    fig, ax = plt.subplots(figsize=(5.6, 4.0))
    ax.plot(column(rows, "r", int), column(rows, "ssop_seconds"), "-o", ms=3,
            color="tab:green", label="space-time ROM")
    ax.plot(column(rows, "r", int), column(rows, "podg_seconds"), "-s", ms=3,
            color="tab:brown", label="POD-Galerkin")
    ax.set_xlabel("modes per frequency r")
    ax.set_ylabel("online CPU time [s]")
    if spec.log_y:
        ax.set_yscale("log")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, spec)


def render_forcing_suite(spec: FigureSpec):
    n = len(spec.inputs)
    fig, axes = plt.subplots(1, n, figsize=(3.6 * n, 3.4), squeeze=False)
    for ax, path in zip(axes[0], spec.inputs):
        rows = read_csv(path, ["method", "trajectory_index", "time_index", "e_j"])
        for method, (mean, std) in sorted(_mean_std_series(rows).items()):
            style = _style(method)
            ax.plot(np.arange(mean.size), mean, style["ls"], color=style["color"],
                    label=style["label"])
        title = Path(path).stem.replace("forcing_", "").replace("_error_vs_time", "")
        ax.set_title(title, fontsize=9)
        ax.set_xlabel("time step")
        ax.set_yscale("log")
    axes[0][0].set_ylabel("relative error")
    axes[0][0].legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, spec)


def render_mu_sweep(spec: FigureSpec):
    per_mu = read_csv(spec.inputs[0], ["method", "mu0", "e_timeavg"])
    transfer = read_csv(spec.inputs[1], ["method", "mu0", "e_timeavg"]) if len(spec.inputs) > 1 else []
    fig, axes = plt.subplots(1, 2 if transfer else 1, figsize=(9.2, 3.8), squeeze=False)

    def plot_set(ax, rows):
        for method, mrows in sorted(group_by(rows, "method").items()):
            agg = {}
            for row in mrows:
                agg.setdefault(float(row["mu0"]), []).append(float(row["e_timeavg"]))
            mus = sorted(agg)
            means = [np.mean(agg[mu]) for mu in mus]
            style = _style(method)
            ax.plot(mus, means, style["ls"], marker="o", ms=3, color=style["color"],
                    label=style["label"])
        ax.set_xlabel("bifurcation parameter")
        ax.set_yscale("log")
        ax.legend(fontsize=7)

    plot_set(axes[0][0], per_mu)
    axes[0][0].set_ylabel("time-averaged relative error")
    axes[0][0].set_title("retrained per parameter", fontsize=9)
    if transfer:
        plot_set(axes[0][1], transfer + [r for r in per_mu if r["method"] == "pod_proj"])
        axes[0][1].set_title("transferred from the reference parameter", fontsize=9)
    fig.tight_layout()
    return _save(fig, spec)


def render_interaction_map(spec: FigureSpec):
    rows = read_csv(spec.inputs[0], ["k", "l", "impact", "candidates", "retained"])
    n = max(int(r["k"]) for r in rows) + 1
    impact = np.full((n, n), np.nan)
    retained = np.zeros((n, n))
    for row in rows:
        impact[int(row["k"]), int(row["l"])] = float(row["impact"])
        retained[int(row["k"]), int(row["l"])] = int(row["retained"])
    fig, axes = plt.subplots(1, 2, figsize=(9.6, 4.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        log_impact = np.log10(np.where(impact > 0, impact, np.nan))
    im0 = axes[0].imshow(log_impact, origin="lower", aspect="auto", cmap="magma")
    axes[0].set_title("log10 interaction impact", fontsize=9)
    fig.colorbar(im0, ax=axes[0], shrink=0.85)
    im1 = axes[1].imshow(retained, origin="lower", aspect="auto", cmap="viridis")
    axes[1].set_title("retained interactions", fontsize=9)
    fig.colorbar(im1, ax=axes[1], shrink=0.85)
    for ax in axes:
        ax.set_xlabel("source frequency index l")
        ax.set_ylabel("target frequency index k")
    fig.tight_layout()
    return _save(fig, spec)


def render_eps_tradeoff(spec: FigureSpec):
    rows = read_csv(spec.inputs[0],
                    ["epsilon", "retained", "retained_fraction", "e_timeavg", "online_seconds"])
    rows = sorted(rows, key=lambda r: float(r["retained_fraction"]))
    frac = 100 * np.array(column(rows, "retained_fraction"))
    fig, axes = plt.subplots(1, 2, figsize=(9.2, 3.8))
    axes[0].plot(frac, column(rows, "e_timeavg"), "-o", ms=3, color="tab:green")
    axes[0].set_ylabel("time-averaged relative error")
    axes[0].set_yscale("log")
    axes[1].plot(frac, column(rows, "online_seconds"), "-o", ms=3, color="tab:green")
    axes[1].set_ylabel("online CPU time [s]")
    for ax in axes:
        ax.set_xlabel("retained interactions [%]")
    fig.tight_layout()
    return _save(fig, spec)


FIGURE_FAMILIES = {
    "rep_err": render_rep_err,
    "excluded_energy": render_excluded_energy,
    "err_vs_time": render_err_vs_time,
    "err_vs_r": render_err_vs_r,
    "cpu_vs_r": render_cpu_vs_r,
    "forcing_suite": render_forcing_suite,
    "mu_sweep": render_mu_sweep,
    "interaction_map": render_interaction_map,
    "eps_tradeoff": render_eps_tradeoff,
}


def render(spec: FigureSpec):
    """Render one figure family to its output file; read-only over inputs."""
    return FIGURE_FAMILIES[spec.figure_id](spec)
