"""Compressible Euler equations (2D) for a calorically perfect gas.

Conserved state [rho, rho v1, rho v2, rho E] with p = (gamma - 1) rho e
and e = E - |v|^2 / 2. Provides the physical flux, the entropy-conserving
and kinetic-energy-preserving two-point flux of Chandrashekar, LLF and
HLLE surface solvers, a guaranteed pairwise wavespeed bound, and the
concave functionals (pressure, modified specific entropy phi = e rho^(1-gamma))
used by the convex limiters.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .. import kernels
from ..kernels import ipow, logmean


@njit(cache=True)
def prep_node(u, params, w):
    """Workspace: rho, v1, v2, p, beta, ln rho, ln beta, c, p^(-z)."""
    g = params[0]
    rho = u[0]
    v1 = u[1] / rho
    v2 = u[2] / rho
    p = (g - 1.0) * (u[3] - 0.5 * rho * (v1 * v1 + v2 * v2))
    beta = 0.5 * rho / p
    w[0] = rho
    w[1] = v1
    w[2] = v2
    w[3] = p
    w[4] = beta
    w[5] = np.log(rho)
    w[6] = np.log(beta)
    w[7] = np.sqrt(g * p / rho)
    w[8] = p ** (-0.5 * (g - 1.0) / g)


@njit(cache=True, inline="always")
def flux_w(w, nx, ny, params, out):
    g = params[0]
    rho, v1, v2, p = w[0], w[1], w[2], w[3]
    vn = v1 * nx + v2 * ny
    re = p / (g - 1.0) + 0.5 * rho * (v1 * v1 + v2 * v2)
    out[0] = rho * vn
    out[1] = rho * v1 * vn + p * nx
    out[2] = rho * v2 * vn + p * ny
    out[3] = (re + p) * vn


@njit(cache=True, inline="always")
def max_speed_w(wa, wb, nx, ny, params):
    """Workspace variant of the two-rarefaction wavespeed bound."""
    g = params[0]
    vnl = wa[1] * nx + wa[2] * ny
    vnr = wb[1] * nx + wb[2] * ny
    cl = wa[7]
    cr = wb[7]
    num = cl + cr - 0.5 * (g - 1.0) * (vnr - vnl)
    lam = max(abs(vnl) + cl, abs(vnr) + cr)
    if num <= 0.0:
        return lam
    z = 0.5 * (g - 1.0) / g
    pstar = ipow(num / (cl * wa[8] + cr * wb[8]), 1.0 / z)
    fac = 0.5 * (g + 1.0) / g
    if pstar > wa[3]:
        cand = abs(vnl) + cl * np.sqrt(1.0 + fac * (pstar / wa[3] - 1.0))
        if cand > lam:
            lam = cand
    if pstar > wb[3]:
        cand = abs(vnr) + cr * np.sqrt(1.0 + fac * (pstar / wb[3] - 1.0))
        if cand > lam:
            lam = cand
    return lam


@njit(cache=True)
def flux_dot_n(u, nx, ny, params, out):
    g = params[0]
    rho = u[0]
    v1 = u[1] / rho
    v2 = u[2] / rho
    p = (g - 1.0) * (u[3] - 0.5 * rho * (v1 * v1 + v2 * v2))
    vn = v1 * nx + v2 * ny
    out[0] = rho * vn
    out[1] = u[1] * vn + p * nx
    out[2] = u[2] * vn + p * ny
    out[3] = (u[3] + p) * vn


@njit(cache=True)
def max_speed(u_l, u_r, nx, ny, params):
    """Upper bound on the 1D Riemann signal speeds along unit n.

    Uses the two-rarefaction pressure estimate with shock-corrected
    signal speeds, which bounds the exact maximal wavespeed from above
    for gamma <= 5/3.
    """
    g = params[0]
    rl = u_l[0]
    v1l = u_l[1] / rl
    v2l = u_l[2] / rl
    pl = (g - 1.0) * (u_l[3] - 0.5 * rl * (v1l * v1l + v2l * v2l))
    rr = u_r[0]
    v1r = u_r[1] / rr
    v2r = u_r[2] / rr
    pr = (g - 1.0) * (u_r[3] - 0.5 * rr * (v1r * v1r + v2r * v2r))
    vnl = v1l * nx + v2l * ny
    vnr = v1r * nx + v2r * ny
    cl = np.sqrt(g * pl / rl)
    cr = np.sqrt(g * pr / rr)
    z = 0.5 * (g - 1.0) / g
    num = cl + cr - 0.5 * (g - 1.0) * (vnr - vnl)
    if num <= 0.0:
        pstar = 0.0
    else:
        pstar = ipow(num / (cl * pl ** (-z) + cr * pr ** (-z)), 1.0 / z)
    fac = 0.5 * (g + 1.0) / g
    ql = np.sqrt(1.0 + fac * max(0.0, pstar / pl - 1.0))
    qr = np.sqrt(1.0 + fac * max(0.0, pstar / pr - 1.0))
    return max(abs(vnl) + cl * ql, abs(vnr) + cr * qr)


@njit(cache=True)
def vol_chandrashekar(wa, wb, axa, aya, axb, ayb, params, out):
    g = params[0]
    ax = 0.5 * (axa + axb)
    ay = 0.5 * (aya + ayb)
    rho_ln = logmean(wa[0], wb[0], wa[5], wb[5])
    beta_ln = logmean(wa[4], wb[4], wa[6], wb[6])
    v1 = 0.5 * (wa[1] + wb[1])
    v2 = 0.5 * (wa[2] + wb[2])
    pbar = (wa[0] + wb[0]) / (2.0 * (wa[4] + wb[4]))
    vv = 0.5 * (wa[1] * wa[1] + wa[2] * wa[2] + wb[1] * wb[1] + wb[2] * wb[2])
    vn = v1 * ax + v2 * ay
    f0 = rho_ln * vn
    f1 = f0 * v1 + pbar * ax
    f2 = f0 * v2 + pbar * ay
    out[0] = f0
    out[1] = f1
    out[2] = f2
    out[3] = f0 * (0.5 / ((g - 1.0) * beta_ln) - 0.5 * vv) + v1 * f1 + v2 * f2


@njit(cache=True)
def vol_central(wa, wb, axa, aya, axb, ayb, params, out):
    # average of the two contravariant point fluxes
    g = params[0]
    for k in range(2):
        if k == 0:
            rho, v1, v2, p = wa[0], wa[1], wa[2], wa[3]
            ax, ay = axa, aya
        else:
            rho, v1, v2, p = wb[0], wb[1], wb[2], wb[3]
            ax, ay = axb, ayb
        re = p / (g - 1.0) + 0.5 * rho * (v1 * v1 + v2 * v2)
        vn = v1 * ax + v2 * ay
        h0 = rho * vn
        h1 = rho * v1 * vn + p * ax
        h2 = rho * v2 * vn + p * ay
        h3 = (re + p) * vn
        if k == 0:
            out[0] = 0.5 * h0
            out[1] = 0.5 * h1
            out[2] = 0.5 * h2
            out[3] = 0.5 * h3
        else:
            out[0] += 0.5 * h0
            out[1] += 0.5 * h1
            out[2] += 0.5 * h2
            out[3] += 0.5 * h3


@njit(cache=True)
def hlle(u_l, u_r, nx, ny, params, out, tmp):
    """HLLE solver with Einfeldt signal speed estimates."""
    g = params[0]
    rl = u_l[0]
    v1l = u_l[1] / rl
    v2l = u_l[2] / rl
    pl = (g - 1.0) * (u_l[3] - 0.5 * rl * (v1l * v1l + v2l * v2l))
    rr = u_r[0]
    v1r = u_r[1] / rr
    v2r = u_r[2] / rr
    pr = (g - 1.0) * (u_r[3] - 0.5 * rr * (v1r * v1r + v2r * v2r))
    vnl = v1l * nx + v2l * ny
    vnr = v1r * nx + v2r * ny
    cl = np.sqrt(g * pl / rl)
    cr = np.sqrt(g * pr / rr)
    sql = np.sqrt(rl)
    sqr = np.sqrt(rr)
    isq = 1.0 / (sql + sqr)
    vn_roe = (sql * vnl + sqr * vnr) * isq
    d2 = (sql * cl * cl + sqr * cr * cr) * isq \
        + 0.5 * sql * sqr * isq * isq * (vnr - vnl) * (vnr - vnl)
    d = np.sqrt(d2)
    s_l = min(vnl - cl, vn_roe - d)
    s_r = max(vnr + cr, vn_roe + d)
    if s_l >= 0.0:
        flux_dot_n(u_l, nx, ny, params, out)
    elif s_r <= 0.0:
        flux_dot_n(u_r, nx, ny, params, out)
    else:
        flux_dot_n(u_l, nx, ny, params, out)
        flux_dot_n(u_r, nx, ny, params, tmp)
        inv = 1.0 / (s_r - s_l)
        for v in range(4):
            out[v] = (s_r * out[v] - s_l * tmp[v]
                      + s_l * s_r * (u_r[v] - u_l[v])) * inv


@njit(cache=True)
def p_value(u, params):
    g = params[0]
    return (g - 1.0) * (u[3] - 0.5 * (u[1] * u[1] + u[2] * u[2]) / u[0])


@njit(cache=True)
def p_grad(u, params, out):
    g = params[0]
    v1 = u[1] / u[0]
    v2 = u[2] / u[0]
    out[0] = 0.5 * (g - 1.0) * (v1 * v1 + v2 * v2)
    out[1] = -(g - 1.0) * v1
    out[2] = -(g - 1.0) * v2
    out[3] = g - 1.0


@njit(cache=True, inline="always")
def _rho_pow_neg_gamma(rho, g):
    # monatomic gamma = 5/3 is a frequent hot case: rho^(-5/3) via cbrt
    if g == 5.0 / 3.0:
        c = np.cbrt(rho)
        return 1.0 / (rho * c * c)
    return rho ** (-g)


@njit(cache=True)
def phi_value(u, params):
    g = params[0]
    rho = u[0]
    return (u[3] - 0.5 * (u[1] * u[1] + u[2] * u[2]) / rho) \
        * _rho_pow_neg_gamma(rho, g)


@njit(cache=True)
def phi_grad(u, params, out):
    g = params[0]
    rho = u[0]
    rg = _rho_pow_neg_gamma(rho, g)
    v1 = u[1] / rho
    v2 = u[2] / rho
    out[0] = rg * (-g * u[3] / rho + 0.5 * (g + 1.0) * (v1 * v1 + v2 * v2))
    out[1] = -v1 * rg
    out[2] = -v2 * rg
    out[3] = rg


@njit(cache=True)
def positive(u, params):
    if u[0] <= 0.0:
        return False
    return p_value(u, params) > 0.0


@njit(cache=True)
def prim_node(u, params, w):
    g = params[0]
    rho = u[0]
    w[0] = rho
    w[1] = u[1] / rho
    w[2] = u[2] / rho
    w[3] = (g - 1.0) * (u[3] - 0.5 * rho * (w[1] * w[1] + w[2] * w[2]))


@njit(cache=True)
def cons_node(w, params, u):
    g = params[0]
    u[0] = w[0]
    u[1] = w[0] * w[1]
    u[2] = w[0] * w[2]
    u[3] = w[3] / (g - 1.0) + 0.5 * w[0] * (w[1] * w[1] + w[2] * w[2])


class EulerSystem:
    """Compressible Euler system with heat capacity ratio ``gamma``."""

    name = "euler"
    kind = "euler"
    n_vars = 4
    nw = 9
    var_names = ("rho", "mom1", "mom2", "rhoE")

    def __init__(self, gamma: float = 1.4):
        if gamma <= 1.0:
            raise ValueError(f"gamma must exceed 1, got {gamma}")
        self.gamma = float(gamma)
        self.params = np.array([self.gamma])
        self.prep_node = prep_node
        self.flux_dot_n = flux_dot_n
        self.flux_w = flux_w
        self.max_speed = max_speed
        self.max_speed_w = max_speed_w
        self.positive = positive
        self.prim_node = prim_node
        self.cons_node = cons_node
        self.volume_fluxes = {"chandrashekar": vol_chandrashekar,
                              "central": vol_central}
        self.surface_fluxes = {
            "llf": kernels.make_llf(flux_dot_n, max_speed),
            "hlle": hlle,
            "ec": kernels.make_ec_surface(vol_chandrashekar, prep_node, self.nw),
        }
        self.quantities = {
            "rho": ("linear", 0),
            "p": ("concave", p_value, p_grad),
            "phi": ("concave", phi_value, phi_grad),
        }

    # numpy helpers ----------------------------------------------------

    def primitives(self, u):
        rho = u[..., 0]
        v1 = u[..., 1] / rho
        v2 = u[..., 2] / rho
        p = (self.gamma - 1.0) * (u[..., 3] - 0.5 * rho * (v1 ** 2 + v2 ** 2))
        return np.stack((rho, v1, v2, p), axis=-1)

    def conserved(self, w):
        rho, v1, v2, p = (w[..., k] for k in range(4))
        re = p / (self.gamma - 1.0) + 0.5 * rho * (v1 ** 2 + v2 ** 2)
        return np.stack((rho, rho * v1, rho * v2, re), axis=-1)

    def pressure(self, u):
        rho = u[..., 0]
        return (self.gamma - 1.0) * (
            u[..., 3] - 0.5 * (u[..., 1] ** 2 + u[..., 2] ** 2) / rho)

    def sound_speed(self, u):
        return np.sqrt(self.gamma * self.pressure(u) / u[..., 0])

    def flux_dot_n_np(self, u, n):
        rho = u[..., 0]
        v1 = u[..., 1] / rho
        v2 = u[..., 2] / rho
        p = self.pressure(u)
        vn = v1 * n[..., 0] + v2 * n[..., 1]
        return np.stack((rho * vn,
                         u[..., 1] * vn + p * n[..., 0],
                         u[..., 2] * vn + p * n[..., 1],
                         (u[..., 3] + p) * vn), axis=-1)

    def cfl_speeds_np(self, u, n_unit):
        v1 = u[..., 1] / u[..., 0]
        v2 = u[..., 2] / u[..., 0]
        vn = v1 * n_unit[..., 0] + v2 * n_unit[..., 1]
        return np.abs(vn) + self.sound_speed(u)

    def max_speed_np(self, ua, ub, n_unit):
        g = self.gamma
        pa, pb = self.pressure(ua), self.pressure(ub)
        ca = np.sqrt(g * pa / ua[..., 0])
        cb = np.sqrt(g * pb / ub[..., 0])
        vna = (ua[..., 1] * n_unit[..., 0] + ua[..., 2] * n_unit[..., 1]) / ua[..., 0]
        vnb = (ub[..., 1] * n_unit[..., 0] + ub[..., 2] * n_unit[..., 1]) / ub[..., 0]
        z = 0.5 * (g - 1.0) / g
        num = ca + cb - 0.5 * (g - 1.0) * (vnb - vna)
        with np.errstate(invalid="ignore"):
            pstar = np.where(
                num > 0.0,
                (np.maximum(num, 1e-300) / (ca * pa ** (-z) + cb * pb ** (-z))) ** (1.0 / z),
                0.0)
        fac = 0.5 * (g + 1.0) / g
        qa = np.sqrt(1.0 + fac * np.maximum(0.0, pstar / pa - 1.0))
        qb = np.sqrt(1.0 + fac * np.maximum(0.0, pstar / pb - 1.0))
        return np.maximum(np.abs(vna) + ca * qa, np.abs(vnb) + cb * qb)

    def entropy_np(self, u):
        rho = u[..., 0]
        p = self.pressure(u)
        s = np.log(p) - self.gamma * np.log(rho)
        return -rho * s / (self.gamma - 1.0)

    def entropy_variables_np(self, u):
        g = self.gamma
        rho = u[..., 0]
        v1 = u[..., 1] / rho
        v2 = u[..., 2] / rho
        p = self.pressure(u)
        s = np.log(p) - g * np.log(rho)
        beta = 0.5 * rho / p
        w0 = (g - s) / (g - 1.0) - beta * (v1 ** 2 + v2 ** 2)
        return np.stack((w0, 2 * beta * v1, 2 * beta * v2, -2 * beta), axis=-1)

    def modified_specific_entropy_np(self, u):
        rho = u[..., 0]
        e = (u[..., 3] - 0.5 * (u[..., 1] ** 2 + u[..., 2] ** 2) / rho) / rho
        if abs(self.gamma - 5.0 / 3.0) < 1e-12:
            r3 = np.cbrt(rho)
            return e / (r3 * r3)
        return e * rho ** (1.0 - self.gamma)

    def quantity_np(self, name, u):
        if name == "rho":
            return u[..., 0]
        if name == "p":
            return self.pressure(u)
        if name == "phi":
            return self.modified_specific_entropy_np(u)
        raise KeyError(name)

    def admissible_np(self, u):
        return (u[..., 0] > 0.0) & (self.pressure(u) > 0.0)

    def describe_state(self, u):
        w = self.primitives(u)
        return (f"rho={w[0]:.6g} v=({w[1]:.6g},{w[2]:.6g}) p={w[3]:.6g}")
