"""Figure rendering from parsed run outputs.

Four plot kinds: a nodal field contour, the blending-coefficient
contour on a fixed [0, 1] scale, the alpha time series (max on a linear
axis, volume-weighted mean on a log axis), and a field/alpha
side-by-side panel. Rendering is deterministic for fixed inputs.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .io import list_snapshots, read_diag, read_snapshot

__all__ = ["PlotJob", "plot"]

EPS_MACHINE = 2.220446049250313e-16

KINDS = ("field_contour", "alpha_contour", "alpha_timeseries", "side_by_side")


@dataclass
class PlotJob:
    rundir: str
    kind: str = "field_contour"
    var: str = "rho"
    out: str = "plot.png"
    snap: int = -1                 # snapshot index, default last
    vmin: float | None = None
    vmax: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown plot kind {self.kind!r} "
                             f"(choose from {KINDS})")


def _panel(ax, snap, var, vmin=None, vmax=None):
    x, y = snap.grid()
    f = snap.field2d(var)
    lo = f.min() if vmin is None else vmin
    hi = f.max() if vmax is None else vmax
    if hi <= lo:                    # constant field: show its value
        pad = max(abs(lo), 1.0) * 1e-3
        lo, hi = lo - pad, hi + pad
    m = ax.pcolormesh(x, y, f, shading="gouraud", vmin=lo, vmax=hi,
                      cmap="viridis", rasterized=True)
    ax.set_aspect("equal")
    ax.set_title(f"{var}  [{f.min():.6g}, {f.max():.6g}]")
    return m


def _render_field(job, fig):
    snaps = list_snapshots(job.rundir)
    snap = read_snapshot(snaps[job.snap])
    ax = fig.add_subplot(111)
    var = "alpha" if job.kind == "alpha_contour" else job.var
    vmin, vmax = job.vmin, job.vmax
    if job.kind == "alpha_contour" and vmin is None and vmax is None:
        vmin, vmax = 0.0, 1.0
    m = _panel(ax, snap, var, vmin, vmax)
    fig.colorbar(m, ax=ax, shrink=0.85)


def _render_timeseries(job, fig):
    diag = read_diag(os.path.join(job.rundir, "diag.csv"))
    ax = fig.add_subplot(111)
    ax.plot(diag["t"], diag["max_alpha"], color="tab:blue",
            label="max(alpha)")
    ax.set_xlabel("t")
    ax.set_ylabel("max(alpha)", color="tab:blue")
    ax.set_ylim(-0.02, 1.02)
    ax2 = ax.twinx()
    mean = np.maximum(diag["mean_alpha"], EPS_MACHINE)
    ax2.semilogy(diag["t"], mean, color="tab:red", label="mean(alpha)")
    ax2.set_ylabel("mean(alpha), volume weighted", color="tab:red")
    ax2.axhline(EPS_MACHINE, color="gray", lw=0.6, ls="--")
    lines = ax.get_lines() + ax2.get_lines()[:1]
    ax.legend(lines, [ln.get_label() for ln in lines], loc="upper left")


def _render_side_by_side(job, fig):
    snaps = list_snapshots(job.rundir)
    snap = read_snapshot(snaps[job.snap])
    ax1 = fig.add_subplot(121)
    m1 = _panel(ax1, snap, job.var, job.vmin, job.vmax)
    fig.colorbar(m1, ax=ax1, shrink=0.7)
    ax2 = fig.add_subplot(122)
    m2 = _panel(ax2, snap, "alpha", 0.0, 1.0)
    fig.colorbar(m2, ax=ax2, shrink=0.7)


def plot(job: PlotJob) -> str:
    """Render one job to ``job.out``; returns the output path."""
    width = 11.0 if job.kind == "side_by_side" else 6.4
    fig = plt.figure(figsize=(width, 5.2), dpi=110)
    try:
        if job.kind in ("field_contour", "alpha_contour"):
            _render_field(job, fig)
        elif job.kind == "alpha_timeseries":
            _render_timeseries(job, fig)
        else:
            _render_side_by_side(job, fig)
        fig.tight_layout()
        fig.savefig(job.out)
    finally:
        plt.close(fig)
    return job.out
