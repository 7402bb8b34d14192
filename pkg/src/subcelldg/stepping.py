"""Explicit SSP-RK3 time integration with CFL-based step control.

The three-stage third-order scheme of Shu-Osher advances each stage as a
forward Euler substep followed by convex recombination, so any bound a
limited stage guarantees survives the full step. The time step follows

    dt = CFL * min_ij J_ij / (lam1 |Ja1| / w_i + lam2 |Ja2| / w_j)

with per-direction one-state wavespeed bounds; for GLM-MHD the cleaning
speed is raised once per step to the largest value that adds no further
restriction over the fluid waves.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["TimeControl", "compute_dt", "ssp_rk3_step", "update_ch"]


@dataclass
class TimeControl:
    cfl: float = 0.5
    t_final: float = 1.0
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError(f"CFL must be in (0,1], got {self.cfl}")
        if self.t_final <= 0.0:
            raise ValueError(f"t_final must be positive, got {self.t_final}")


def _unit(vecs):
    return vecs / np.linalg.norm(vecs, axis=-1, keepdims=True)


def compute_dt(u, mesh, eq, cfl):
    w = mesh.ops.weights
    m1 = np.linalg.norm(mesh.ja1, axis=-1)
    m2 = np.linalg.norm(mesh.ja2, axis=-1)
    lam1 = eq.cfl_speeds_np(u, mesh.ja1 / m1[..., None])
    lam2 = eq.cfl_speeds_np(u, mesh.ja2 / m2[..., None])
    denom = lam1 * m1 / w[None, :, None] + lam2 * m2 / w[None, None, :]
    dt = cfl * float(np.min(mesh.jac / denom))
    if not dt > 0.0 or not np.isfinite(dt):
        raise FloatingPointError(f"nonpositive or invalid time step {dt}")
    return dt


def ssp_rk3_step(u, t, dt, stage_operator):
    """One SSP-RK3 step; the operator performs a limited Euler substep.

    ``stage_operator(u, t, dt) -> (u_fe, alpha_nodes)`` where alpha_nodes
    may be None for unlimited operators. Returns the new state and the
    three per-stage alpha snapshots.
    """
    u1, a1 = stage_operator(u, t, dt)
    u2_fe, a2 = stage_operator(u1, t + dt, dt)
    u2 = 0.75 * u + 0.25 * u2_fe
    u3_fe, a3 = stage_operator(u2, t + 0.5 * dt, dt)
    u_new = (u + 2.0 * u3_fe) / 3.0
    return u_new, (a1, a2, a3)


def update_ch(u, mesh, eq):
    """Largest cleaning speed that keeps the GLM waves no more restrictive
    than the fluid waves: the global max of |v.n| + c_f over nodes and
    directions."""
    m1 = np.linalg.norm(mesh.ja1, axis=-1)
    m2 = np.linalg.norm(mesh.ja2, axis=-1)
    s1 = eq.fluid_speeds_np(u, mesh.ja1 / m1[..., None])
    s2 = eq.fluid_speeds_np(u, mesh.ja2 / m2[..., None])
    return float(max(s1.max(), s2.max()))
