"""Scalar 2D conservation law with the non-convex flux (sin u, cos u).

The entropy pair is the square entropy U = u^2 / 2 with potential flux
psi = (-cos u, sin u); the unique entropy-conservative two-point flux is
the difference quotient of psi, which reduces by trig identities to
sinc(d) f(m) with m the arithmetic mean and d half the jump. That form
is exact at coincident states and free of cancellation.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .. import kernels

EC_SWITCH = 1e-8


@njit(cache=True)
def prep_node(u, params, w):
    w[0] = u[0]


@njit(cache=True)
def flux_dot_n(u, nx, ny, params, out):
    out[0] = np.sin(u[0]) * nx + np.cos(u[0]) * ny


@njit(cache=True)
def max_speed(u_l, u_r, nx, ny, params):
    # |f'(u) . n| = |cos(u) nx - sin(u) ny| <= 1 for unit n
    return 1.0


@njit(cache=True)
def vol_ec(wa, wb, axa, aya, axb, ayb, params, out):
    ax = 0.5 * (axa + axb)
    ay = 0.5 * (aya + ayb)
    m = 0.5 * (wa[0] + wb[0])
    d = 0.5 * (wb[0] - wa[0])
    if abs(wb[0] - wa[0]) > EC_SWITCH:
        sig = np.sin(d) / d
    else:
        sig = 1.0
    out[0] = sig * (np.sin(m) * ax + np.cos(m) * ay)


@njit(cache=True)
def vol_central(wa, wb, axa, aya, axb, ayb, params, out):
    # average of contravariant fluxes; recovers the standard DGSEM kernel
    out[0] = 0.5 * (np.sin(wa[0]) * axa + np.cos(wa[0]) * aya
                    + np.sin(wb[0]) * axb + np.cos(wb[0]) * ayb)


@njit(cache=True, inline="always")
def flux_w(w, nx, ny, params, out):
    out[0] = np.sin(w[0]) * nx + np.cos(w[0]) * ny


@njit(cache=True, inline="always")
def max_speed_w(wa, wb, nx, ny, params):
    return 1.0


@njit(cache=True)
def positive(u, params):
    return True


@njit(cache=True)
def prim_node(u, params, w):
    w[0] = u[0]


@njit(cache=True)
def cons_node(w, params, u):
    u[0] = w[0]


class KppSystem:
    """KPP scalar system: fluxes, wavespeed bound, square entropy."""

    name = "kpp"
    kind = "scalar"
    n_vars = 1
    nw = 1
    var_names = ("u",)

    def __init__(self):
        self.params = np.zeros(0)
        self.prep_node = prep_node
        self.flux_dot_n = flux_dot_n
        self.flux_w = flux_w
        self.max_speed = max_speed
        self.max_speed_w = max_speed_w
        self.positive = positive
        self.prim_node = prim_node
        self.cons_node = cons_node
        self.volume_fluxes = {"ec": vol_ec, "central": vol_central}
        self.surface_fluxes = {
            "llf": kernels.make_llf(flux_dot_n, max_speed),
            "ec": kernels.make_ec_surface(vol_ec, prep_node, self.nw),
        }
        # bounded quantities usable by the limiters
        self.quantities = {"u": ("linear", 0)}

    # numpy helpers ----------------------------------------------------

    def flux_dot_n_np(self, u, n):
        return np.sin(u) * n[..., 0:1] + np.cos(u) * n[..., 1:2]

    def cfl_speeds_np(self, u, n_unit):
        return np.ones(u.shape[:-1])

    def max_speed_np(self, ua, ub, n_unit):
        return np.ones(ua.shape[:-1])

    def primitives(self, u):
        return u.copy()

    def conserved(self, w):
        return w.copy()

    def entropy_np(self, u):
        return 0.5 * u[..., 0] ** 2

    def entropy_variables_np(self, u):
        return u.copy()

    def quantity_np(self, name, u):
        if name == "u":
            return u[..., 0]
        raise KeyError(name)

    def admissible_np(self, u):
        return np.isfinite(u[..., 0])

    def describe_state(self, u):
        return f"u={u[0]:.6g}"


def kpp_flux(u):
    """Physical flux of the scalar law at value ``u``: (sin u, cos u)."""
    return np.array([np.sin(u), np.cos(u)])


def kpp_ec_flux(u_l, u_r):
    """Entropy-conservative two-point flux, both components."""
    out = np.empty(1)
    wa = np.array([float(u_l)])
    wb = np.array([float(u_r)])
    p = np.zeros(0)
    vol_ec(wa, wb, 1.0, 0.0, 1.0, 0.0, p, out)
    fx = out[0]
    vol_ec(wa, wb, 0.0, 1.0, 0.0, 1.0, p, out)
    return np.array([fx, out[0]])
