"""Scalar run diagnostics: blending statistics, entropy, conservation.

max_alpha(t) is the max of the nodal coefficient over all RK stages in
the trailing window; mean_alpha(t) averages the volume-weighted nodal
mean over the same stages. The run-level averages accumulate over every
stage of the whole run.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

__all__ = ["AlphaTracker", "DiagnosticsRecord", "record_step", "DiagWriter",
           "conserved_totals", "total_entropy"]


def conserved_totals(u, volw):
    return np.einsum("kij,kijv->v", volw, u)


def total_entropy(u, eq, volw):
    return float(np.sum(volw * eq.entropy_np(u)))


class AlphaTracker:
    """Per-stage blending statistics with a trailing time window."""

    def __init__(self, volw, window=0.1):
        self.volw = volw
        self.volume = float(volw.sum())
        self.window = window
        self._recent = deque()
        self.run_stages = 0
        self.run_mean_sum = 0.0
        self.run_max = 0.0

    def add_stage(self, t, alpha_nodes):
        if alpha_nodes is None:
            amax, amean = 0.0, 0.0
        else:
            amax = float(alpha_nodes.max())
            amean = float(np.sum(self.volw * alpha_nodes) / self.volume)
        self._recent.append((t, amax, amean))
        self.run_stages += 1
        self.run_mean_sum += amean
        self.run_max = max(self.run_max, amax)

    def window_stats(self, t):
        while self._recent and self._recent[0][0] < t - self.window:
            self._recent.popleft()
        if not self._recent:
            return 0.0, 0.0
        amax = max(r[1] for r in self._recent)
        amean = sum(r[2] for r in self._recent) / len(self._recent)
        return amax, amean

    @property
    def run_mean(self):
        return self.run_mean_sum / max(self.run_stages, 1)


@dataclass
class DiagnosticsRecord:
    t: float
    dt: float
    max_alpha: float
    mean_alpha: float
    entropy: float
    min_rho: float
    min_p: float
    drift: np.ndarray


def record_step(t, dt, tracker: AlphaTracker, u, eq, volw, totals0,
                totals_scale) -> DiagnosticsRecord:
    amax, amean = tracker.window_stats(t)
    totals = conserved_totals(u, volw)
    drift = np.abs(totals - totals0) / totals_scale
    if eq.kind == "scalar":
        min_rho = float(u[..., 0].min())
        min_p = 0.0
    else:
        min_rho = float(u[..., 0].min())
        min_p = float(eq.pressure(u).min())
    return DiagnosticsRecord(t=t, dt=dt, max_alpha=amax, mean_alpha=amean,
                             entropy=total_entropy(u, eq, volw),
                             min_rho=min_rho, min_p=min_p, drift=drift)


class DiagWriter:
    """Columnar text time series, one row per step."""

    def __init__(self, path, var_names):
        self.path = path
        cols = ["t", "dt", "max_alpha", "mean_alpha", "entropy",
                "min_rho", "min_p"] + [f"drift_{v}" for v in var_names]
        self._fh = open(path, "w")
        self._fh.write(",".join(cols) + "\n")

    def write(self, rec: DiagnosticsRecord):
        row = [rec.t, rec.dt, rec.max_alpha, rec.mean_alpha, rec.entropy,
               rec.min_rho, rec.min_p, *rec.drift]
        self._fh.write(",".join(f"{v:.17g}" for v in row) + "\n")

    def close(self):
        self._fh.close()
