"""Figures written to files next to the tabular reports (Agg backend, no display)."""

import math
from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

STYLE = {"figsize": (6.0, 4.0), "dpi": 120}


def _new(title, xlabel, ylabel):
    fig = Figure(figsize=STYLE["figsize"], dpi=STYLE["dpi"])
    FigureCanvasAgg(fig)
    ax = fig.add_subplot(1, 1, 1)
    ax.set_title(title, fontsize=11)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3, linewidth=0.6)
    return fig, ax


def _save(fig, path):
    fig.tight_layout()
    # drop timestamps and version stamps so reruns give identical files
    fmt = Path(path).suffix.lower().lstrip(".") or "png"
    meta = {"png": {"Software": None}, "pdf": {"Creator": None, "Producer": None, "CreationDate": None}, "svg": {"Creator": None, "Date": None}}
    fig.savefig(path, metadata=meta.get(fmt, {}))
    return str(path)


def density_figure(grid, path, title="recovered density", reference=None):
    """Piecewise-constant density; ``reference`` is an optional callable t -> rho(t)."""
    fig, ax = _new(title, "t", "density")
    ax.step(grid.t, grid.values, where="mid", lw=1.0, label="recovered")
    if reference is not None:
        ax.plot(grid.t, reference(grid.t), "--", lw=1.0, label="closed form")
        ax.legend(frameon=False)
    ax.set_ylim(bottom=0)
    return _save(fig, path)


def monotonicity_figure(report, path):
    fig = Figure(figsize=(STYLE["figsize"][0], 1.5 * STYLE["figsize"][1]), dpi=STYLE["dpi"])
    FigureCanvasAgg(fig)
    ax1, ax2 = fig.subplots(2, 1, sharex=True)
    ns = [r.n for r in report.rows]
    chi = [r.chi if math.isfinite(r.chi) else np.nan for r in report.rows]
    phi = [np.nan if r.phi_divergent else r.phi for r in report.rows]
    ax1.errorbar(ns, chi, yerr=[r.chi_tol for r in report.rows], marker="o", lw=1.0, capsize=3)
    ax1.set_ylabel("chi_n")
    ax1.set_title(f"free CLT along n for {report.measure}", fontsize=11)
    ax2.errorbar(ns, phi, yerr=[0 if r.phi_divergent else r.phi_tol for r in report.rows], marker="s", lw=1.0, capsize=3)
    for r in report.rows:
        if r.phi_divergent:
            ax2.annotate("inf", (r.n, np.nanmax(phi) if np.any(np.isfinite(phi)) else 1.0), ha="center")
    ax2.set_ylabel("Phi_n")
    ax2.set_xlabel("n")
    for ax in (ax1, ax2):
        ax.grid(True, alpha=0.3, linewidth=0.6)
    return _save(fig, path)


def correlation_figure(sweep, theoretical, path, title="maximal correlation"):
    """rho_max against polynomial degree with the sqrt(m/n) line."""
    fig, ax = _new(title, "degree D", "rho_max")
    ds = [d for d, _ in sweep]
    ax.plot(ds, [r for _, r in sweep], "o-", lw=1.0, label="computed")
    ax.axhline(theoretical, ls="--", lw=1.0, color="k", label="sqrt(m/n)")
    ax.set_xticks(ds)
    ax.legend(frameon=False)
    return _save(fig, path)


def fisher_figure(history, path, title="Fisher information by degree"):
    fig, ax = _new(title, "degree D", "Phi_D")
    ax.plot([d for d, _ in history], [float(p) for _, p in history], "o-", lw=1.0)
    return _save(fig, path)


def rmt_figure(checks, path):
    """Ensemble mean minus engine value, with 3 standard-error bars."""
    fig, ax = _new("ensemble vs combinatorial moments", "word index", "deviation")
    idx = np.arange(len(checks))
    ax.errorbar(idx, [c.mean - c.engine_value for c in checks], yerr=[3 * c.stderr for c in checks], fmt="o", ms=3, capsize=2)
    ax.axhline(0.0, color="k", lw=0.8)
    return _save(fig, path)
