"""Convex combinations of the DG and FV operators.

Element-wise blending mixes the two right-hand sides with one
coefficient per element; subcell-wise blending mixes the two telescoping
flux buffers interface by interface. A shared face carries a single
coefficient (the max of the two sides), which keeps the blended scheme
conservative for any coefficient field.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["BlendingField", "blend_elementwise", "blend_subcellwise",
           "alpha_diagnostics"]


def _check_range(alpha):
    if alpha.size and (alpha.min() < 0.0 or alpha.max() > 1.0):
        raise ValueError(
            f"blending coefficients outside [0,1]: range "
            f"[{alpha.min()}, {alpha.max()}]")


@dataclass
class BlendingField:
    """Interface blending coefficients, plus the element/node views.

    ``a1[e, s, j]`` and ``a2[e, i, s]`` follow the flux-buffer layout;
    face slots hold the coefficient shared with the neighbor.
    """

    mode: str
    a1: np.ndarray
    a2: np.ndarray
    alpha_e: np.ndarray | None = None

    @classmethod
    def from_element(cls, alpha_e, mesh):
        alpha_e = np.asarray(alpha_e, dtype=float)
        _check_range(alpha_e)
        k = mesh.n_elements
        npts = mesh.ops.n_nodes
        a1 = np.broadcast_to(alpha_e[:, None, None], (k, npts + 1, npts)).copy()
        a2 = np.broadcast_to(alpha_e[:, None, None], (k, npts, npts + 1)).copy()
        _share_faces(a1, a2, mesh)
        return cls("element", a1, a2, alpha_e=alpha_e)

    @classmethod
    def from_nodes(cls, alpha_nodes, mesh):
        """Interface coefficient = max of the two nodes it connects."""
        at = np.asarray(alpha_nodes, dtype=float)
        _check_range(at)
        k = mesh.n_elements
        npts = mesh.ops.n_nodes
        a1 = np.empty((k, npts + 1, npts))
        a2 = np.empty((k, npts, npts + 1))
        a1[:, 1:npts] = np.maximum(at[:, :-1], at[:, 1:])
        a2[:, :, 1:npts] = np.maximum(at[:, :, :-1], at[:, :, 1:])
        a1[:, 0] = at[:, 0]
        a1[:, npts] = at[:, -1]
        a2[:, :, 0] = at[:, :, 0]
        a2[:, :, npts] = at[:, :, -1]
        _share_faces(a1, a2, mesh)
        return cls("subcell", a1, a2)

    def nodal(self):
        """Node coefficient = max over the incident interfaces."""
        npts = self.a1.shape[2]
        return np.maximum(
            np.maximum(self.a1[:, :npts], self.a1[:, 1:]),
            np.maximum(self.a2[:, :, :npts], self.a2[:, :, 1:]))


def _share_faces(a1, a2, mesh):
    npts = a1.shape[2]
    f0, f1 = mesh.faces0, mesh.faces1
    if len(f0):
        shared = np.maximum(a1[f0[:, 0], npts], a1[f0[:, 1], 0])
        a1[f0[:, 0], npts] = shared
        a1[f0[:, 1], 0] = shared
    if len(f1):
        shared = np.maximum(a2[f1[:, 0], :, npts], a2[f1[:, 1], :, 0])
        a2[f1[:, 0], :, npts] = shared
        a2[f1[:, 1], :, 0] = shared


def blend_elementwise(du_dg, du_fv, alpha_e):
    """(1 - a) du_DG + a du_FV with one coefficient per element."""
    alpha_e = np.asarray(alpha_e, dtype=float)
    _check_range(alpha_e)
    a = alpha_e[:, None, None, None]
    return (1.0 - a) * du_dg + a * du_fv


def blend_subcellwise(dg_buffers, fv_buffers, field: BlendingField):
    """Convex combination of the flux buffers per subcell interface."""
    f1d, f2d = dg_buffers
    f1f, f2f = fv_buffers
    if f1d.shape != f1f.shape or f2d.shape != f2f.shape:
        raise ValueError("DG and FV flux buffer layouts do not match")
    a1 = field.a1[..., None]
    a2 = field.a2[..., None]
    return (1.0 - a1) * f1d + a1 * f1f, (1.0 - a2) * f2d + a2 * f2f


def alpha_diagnostics(history, window):
    """Windowed max and stage-averaged mean of the blending coefficient.

    ``history`` holds one (t, stage_max, stage_mean) triple per RK stage;
    the returned series evaluates, at each stage time, the max and the
    stage average over the trailing interval of length ``window``.
    """
    if not history:
        raise ValueError("empty alpha history")
    times = np.array([h[0] for h in history])
    smax = np.array([h[1] for h in history])
    smean = np.array([h[2] for h in history])
    out_max = np.empty_like(times)
    out_mean = np.empty_like(times)
    start = 0
    for i, t in enumerate(times):
        while times[start] < t - window:
            start += 1
        out_max[i] = smax[start:i + 1].max()
        out_mean[i] = smean[start:i + 1].mean()
    return times, out_max, out_mean
