"""Conservative GLM-MHD equations (2D domain, 3-component v and B).

State [rho, rho v1, rho v2, rho v3, rho E, B1, B2, B3, psi] with

    p = (gamma - 1)(rho E - rho|v|^2/2 - |B|^2/(2 mu0) - psi^2/(2 mu0)).

The divergence-correcting field psi rides on the GLM subsystem with the
time-dependent cleaning speed c_h, stored in params[2] and updated once
per time step. Only the conservative form is implemented; the two-point
volume flux is consistent and symmetric and reduces to the Euler
Chandrashekar flux for vanishing B and psi, but carries no semi-discrete
entropy guarantee in this form.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .. import kernels
from ..kernels import logmean


@njit(cache=True)
def _prims(u, params):
    g = params[0]
    mu0 = params[1]
    rho = u[0]
    v1 = u[1] / rho
    v2 = u[2] / rho
    v3 = u[3] / rho
    bsq = u[5] * u[5] + u[6] * u[6] + u[7] * u[7]
    p = (g - 1.0) * (u[4] - 0.5 * rho * (v1 * v1 + v2 * v2 + v3 * v3)
                     - 0.5 * bsq / mu0 - 0.5 * u[8] * u[8] / mu0)
    return rho, v1, v2, v3, p, bsq


@njit(cache=True)
def prep_node(u, params, w):
    """Workspace: prims, logs, B^2, v.B, plus cached wavespeed pieces
    csq, csq + casq, and 1/(mu0 rho)."""
    mu0 = params[1]
    rho, v1, v2, v3, p, bsq = _prims(u, params)
    beta = 0.5 * rho / p
    w[0] = rho
    w[1] = v1
    w[2] = v2
    w[3] = v3
    w[4] = p
    w[5] = beta
    w[6] = u[5]
    w[7] = u[6]
    w[8] = u[7]
    w[9] = u[8]
    w[10] = np.log(rho)
    w[11] = np.log(beta)
    w[12] = bsq
    w[13] = v1 * u[5] + v2 * u[6] + v3 * u[7]
    w[14] = params[0] * p / rho
    w[15] = w[14] + bsq / (mu0 * rho)
    w[16] = 1.0 / (mu0 * rho)


@njit(cache=True, inline="always")
def flux_w(w, nx, ny, params, out):
    g = params[0]
    mu0 = params[1]
    ch = params[2]
    rho, v1, v2, v3, p = w[0], w[1], w[2], w[3], w[4]
    b1, b2, b3, psi = w[6], w[7], w[8], w[9]
    bsq = w[12]
    vn = v1 * nx + v2 * ny
    bn = b1 * nx + b2 * ny
    ptot = p + 0.5 * bsq / mu0
    out[0] = rho * vn
    out[1] = rho * v1 * vn + ptot * nx - b1 * bn / mu0
    out[2] = rho * v2 * vn + ptot * ny - b2 * bn / mu0
    out[3] = rho * v3 * vn - b3 * bn / mu0
    out[4] = vn * (0.5 * rho * (v1 * v1 + v2 * v2 + v3 * v3)
                   + g * p / (g - 1.0)) \
        + (vn * bsq - bn * w[13]) / mu0 + ch * psi * bn / mu0
    out[5] = vn * b1 - bn * v1 + ch * psi * nx
    out[6] = vn * b2 - bn * v2 + ch * psi * ny
    out[7] = vn * b3 - bn * v3
    out[8] = ch * bn


@njit(cache=True, inline="always")
def max_speed_w(wa, wb, nx, ny, params):
    ch = params[2]
    bna = wa[6] * nx + wa[7] * ny
    cansq = bna * bna * wa[16]
    disc = wa[15] * wa[15] - 4.0 * wa[14] * cansq
    if disc < 0.0:
        disc = 0.0
    cfa = np.sqrt(0.5 * (wa[15] + np.sqrt(disc)))
    bnb = wb[6] * nx + wb[7] * ny
    cansq = bnb * bnb * wb[16]
    disc = wb[15] * wb[15] - 4.0 * wb[14] * cansq
    if disc < 0.0:
        disc = 0.0
    cfb = np.sqrt(0.5 * (wb[15] + np.sqrt(disc)))
    vna = wa[1] * nx + wa[2] * ny
    vnb = wb[1] * nx + wb[2] * ny
    return max(abs(vna) + cfa, abs(vnb) + cfb) + ch


@njit(cache=True)
def flux_dot_n(u, nx, ny, params, out):
    g = params[0]
    mu0 = params[1]
    ch = params[2]
    rho, v1, v2, v3, p, bsq = _prims(u, params)
    vn = v1 * nx + v2 * ny
    bn = u[5] * nx + u[6] * ny
    vdb = v1 * u[5] + v2 * u[6] + v3 * u[7]
    ptot = p + 0.5 * bsq / mu0
    out[0] = rho * vn
    out[1] = u[1] * vn + ptot * nx - u[5] * bn / mu0
    out[2] = u[2] * vn + ptot * ny - u[6] * bn / mu0
    out[3] = u[3] * vn - u[7] * bn / mu0
    out[4] = vn * (0.5 * rho * (v1 * v1 + v2 * v2 + v3 * v3) + g * p / (g - 1.0)) \
        + (vn * bsq - bn * vdb) / mu0 + ch * u[8] * bn / mu0
    out[5] = vn * u[5] - bn * v1 + ch * u[8] * nx
    out[6] = vn * u[6] - bn * v2 + ch * u[8] * ny
    out[7] = vn * u[7] - bn * v3
    out[8] = ch * bn


@njit(cache=True)
def _fast_speed(rho, p, b1, b2, b3, nx, ny, g, mu0):
    csq = g * p / rho
    casq = (b1 * b1 + b2 * b2 + b3 * b3) / (mu0 * rho)
    cansq = (b1 * nx + b2 * ny) ** 2 / (mu0 * rho)
    tot = csq + casq
    disc = tot * tot - 4.0 * csq * cansq
    if disc < 0.0:
        disc = 0.0
    return np.sqrt(0.5 * (tot + np.sqrt(disc)))


@njit(cache=True)
def max_speed(u_l, u_r, nx, ny, params):
    """Pairwise bound: fast magnetosonic speed plus the cleaning speed."""
    g = params[0]
    mu0 = params[1]
    ch = params[2]
    rl, v1l, v2l, v3l, pl, _ = _prims(u_l, params)
    rr, v1r, v2r, v3r, pr, _ = _prims(u_r, params)
    cfl = _fast_speed(rl, pl, u_l[5], u_l[6], u_l[7], nx, ny, g, mu0)
    cfr = _fast_speed(rr, pr, u_r[5], u_r[6], u_r[7], nx, ny, g, mu0)
    vnl = v1l * nx + v2l * ny
    vnr = v1r * nx + v2r * ny
    return max(abs(vnl) + cfl, abs(vnr) + cfr) + ch


@njit(cache=True)
def vol_chandrashekar_mhd(wa, wb, axa, aya, axb, ayb, params, out):
    g = params[0]
    mu0 = params[1]
    ch = params[2]
    ax = 0.5 * (axa + axb)
    ay = 0.5 * (aya + ayb)
    rho_ln = logmean(wa[0], wb[0], wa[10], wb[10])
    beta_ln = logmean(wa[5], wb[5], wa[11], wb[11])
    v1 = 0.5 * (wa[1] + wb[1])
    v2 = 0.5 * (wa[2] + wb[2])
    v3 = 0.5 * (wa[3] + wb[3])
    pbar = (wa[0] + wb[0]) / (2.0 * (wa[5] + wb[5]))
    vv = 0.5 * (wa[1] * wa[1] + wa[2] * wa[2] + wa[3] * wa[3]
                + wb[1] * wb[1] + wb[2] * wb[2] + wb[3] * wb[3])
    b1 = 0.5 * (wa[6] + wb[6])
    b2 = 0.5 * (wa[7] + wb[7])
    b3 = 0.5 * (wa[8] + wb[8])
    psi = 0.5 * (wa[9] + wb[9])
    bbsq = 0.5 * (wa[12] + wb[12])
    vdb = 0.5 * (wa[13] + wb[13])
    vn = v1 * ax + v2 * ay
    bn = b1 * ax + b2 * ay
    f0 = rho_ln * vn
    # gas-only momentum fluxes feed the Chandrashekar energy identity
    fm1 = f0 * v1 + pbar * ax
    fm2 = f0 * v2 + pbar * ay
    fm3 = f0 * v3
    out[0] = f0
    out[1] = fm1 + 0.5 * bbsq / mu0 * ax - b1 * bn / mu0
    out[2] = fm2 + 0.5 * bbsq / mu0 * ay - b2 * bn / mu0
    out[3] = fm3 - b3 * bn / mu0
    out[4] = f0 * (0.5 / ((g - 1.0) * beta_ln) - 0.5 * vv) \
        + v1 * fm1 + v2 * fm2 + v3 * fm3 \
        + (vn * bbsq - bn * vdb) / mu0 + ch * psi * bn / mu0
    out[5] = vn * b1 - bn * v1 + ch * psi * ax
    out[6] = vn * b2 - bn * v2 + ch * psi * ay
    out[7] = vn * b3 - bn * v3
    out[8] = ch * bn


@njit(cache=True)
def vol_central(wa, wb, axa, aya, axb, ayb, params, out):
    g = params[0]
    mu0 = params[1]
    ch = params[2]
    for v in range(9):
        out[v] = 0.0
    for k in range(2):
        if k == 0:
            w = wa
            ax, ay = axa, aya
        else:
            w = wb
            ax, ay = axb, ayb
        rho, v1, v2, v3, p = w[0], w[1], w[2], w[3], w[4]
        b1, b2, b3, psi = w[6], w[7], w[8], w[9]
        bsq = w[12]
        vn = v1 * ax + v2 * ay
        bn = b1 * ax + b2 * ay
        vdb = w[13]
        ptot = p + 0.5 * bsq / mu0
        out[0] += 0.5 * rho * vn
        out[1] += 0.5 * (rho * v1 * vn + ptot * ax - b1 * bn / mu0)
        out[2] += 0.5 * (rho * v2 * vn + ptot * ay - b2 * bn / mu0)
        out[3] += 0.5 * (rho * v3 * vn - b3 * bn / mu0)
        out[4] += 0.5 * (vn * (0.5 * rho * (v1 * v1 + v2 * v2 + v3 * v3)
                               + g * p / (g - 1.0))
                         + (vn * bsq - bn * vdb) / mu0 + ch * psi * bn / mu0)
        out[5] += 0.5 * (vn * b1 - bn * v1 + ch * psi * ax)
        out[6] += 0.5 * (vn * b2 - bn * v2 + ch * psi * ay)
        out[7] += 0.5 * (vn * b3 - bn * v3)
        out[8] += 0.5 * ch * bn


@njit(cache=True)
def p_value(u, params):
    _, _, _, _, p, _ = _prims(u, params)
    return p


@njit(cache=True)
def p_grad(u, params, out):
    g = params[0]
    mu0 = params[1]
    rho = u[0]
    v1 = u[1] / rho
    v2 = u[2] / rho
    v3 = u[3] / rho
    out[0] = 0.5 * (g - 1.0) * (v1 * v1 + v2 * v2 + v3 * v3)
    out[1] = -(g - 1.0) * v1
    out[2] = -(g - 1.0) * v2
    out[3] = -(g - 1.0) * v3
    out[4] = g - 1.0
    out[5] = -(g - 1.0) * u[5] / mu0
    out[6] = -(g - 1.0) * u[6] / mu0
    out[7] = -(g - 1.0) * u[7] / mu0
    out[8] = -(g - 1.0) * u[8] / mu0


@njit(cache=True)
def positive(u, params):
    if u[0] <= 0.0:
        return False
    return p_value(u, params) > 0.0


@njit(cache=True)
def prim_node(u, params, w):
    rho, v1, v2, v3, p, _ = _prims(u, params)
    w[0] = rho
    w[1] = v1
    w[2] = v2
    w[3] = v3
    w[4] = p
    w[5] = u[5]
    w[6] = u[6]
    w[7] = u[7]
    w[8] = u[8]


@njit(cache=True)
def cons_node(w, params, u):
    g = params[0]
    mu0 = params[1]
    rho = w[0]
    u[0] = rho
    u[1] = rho * w[1]
    u[2] = rho * w[2]
    u[3] = rho * w[3]
    bsq = w[5] * w[5] + w[6] * w[6] + w[7] * w[7]
    u[4] = w[4] / (g - 1.0) + 0.5 * rho * (w[1] * w[1] + w[2] * w[2] + w[3] * w[3]) \
        + 0.5 * bsq / mu0 + 0.5 * w[8] * w[8] / mu0
    u[5] = w[5]
    u[6] = w[6]
    u[7] = w[7]
    u[8] = w[8]


class GlmMhdSystem:
    """Ideal GLM-MHD in conservative form with cleaning speed c_h."""

    name = "glm_mhd"
    kind = "mhd"
    n_vars = 9
    nw = 17
    var_names = ("rho", "mom1", "mom2", "mom3", "rhoE", "B1", "B2", "B3", "psi")

    def __init__(self, gamma: float = 5.0 / 3.0, mu0: float = 1.0):
        if gamma <= 1.0:
            raise ValueError(f"gamma must exceed 1, got {gamma}")
        if mu0 <= 0.0:
            raise ValueError(f"mu0 must be positive, got {mu0}")
        self.gamma = float(gamma)
        self.mu0 = float(mu0)
        self.params = np.array([self.gamma, self.mu0, 0.0])
        self.prep_node = prep_node
        self.flux_dot_n = flux_dot_n
        self.flux_w = flux_w
        self.max_speed = max_speed
        self.max_speed_w = max_speed_w
        self.positive = positive
        self.prim_node = prim_node
        self.cons_node = cons_node
        self.volume_fluxes = {"chandrashekar": vol_chandrashekar_mhd,
                              "central": vol_central}
        self.surface_fluxes = {
            "llf": kernels.make_llf(flux_dot_n, max_speed),
            "ec": kernels.make_ec_surface(vol_chandrashekar_mhd, prep_node, self.nw),
        }
        self.quantities = {
            "rho": ("linear", 0),
            "p": ("concave", p_value, p_grad),
        }

    @property
    def ch(self) -> float:
        return float(self.params[2])

    def set_ch(self, value: float):
        if value < 0.0:
            raise ValueError(f"cleaning speed must be nonnegative, got {value}")
        self.params[2] = value

    # numpy helpers ----------------------------------------------------

    def primitives(self, u):
        rho = u[..., 0]
        v = u[..., 1:4] / rho[..., None]
        p = self.pressure(u)
        return np.concatenate((rho[..., None], v, p[..., None], u[..., 5:9]), axis=-1)

    def conserved(self, w):
        rho = w[..., 0]
        v = w[..., 1:4]
        p = w[..., 4]
        b = w[..., 5:8]
        psi = w[..., 8]
        re = p / (self.gamma - 1.0) + 0.5 * rho * np.sum(v ** 2, axis=-1) \
            + 0.5 * np.sum(b ** 2, axis=-1) / self.mu0 + 0.5 * psi ** 2 / self.mu0
        return np.concatenate((rho[..., None], rho[..., None] * v,
                               re[..., None], b, psi[..., None]), axis=-1)

    def pressure(self, u):
        rho = u[..., 0]
        msq = np.sum(u[..., 1:4] ** 2, axis=-1)
        bsq = np.sum(u[..., 5:8] ** 2, axis=-1)
        return (self.gamma - 1.0) * (u[..., 4] - 0.5 * msq / rho
                                     - 0.5 * bsq / self.mu0
                                     - 0.5 * u[..., 8] ** 2 / self.mu0)

    def fast_speed_np(self, u, n_unit):
        rho = u[..., 0]
        p = self.pressure(u)
        csq = self.gamma * p / rho
        casq = np.sum(u[..., 5:8] ** 2, axis=-1) / (self.mu0 * rho)
        bn = u[..., 5] * n_unit[..., 0] + u[..., 6] * n_unit[..., 1]
        cansq = bn ** 2 / (self.mu0 * rho)
        tot = csq + casq
        disc = np.maximum(tot ** 2 - 4.0 * csq * cansq, 0.0)
        return np.sqrt(0.5 * (tot + np.sqrt(disc)))

    def fluid_speeds_np(self, u, n_unit):
        """|v . n| + c_f, without the GLM contribution (for the c_h update)."""
        vn = (u[..., 1] * n_unit[..., 0] + u[..., 2] * n_unit[..., 1]) / u[..., 0]
        return np.abs(vn) + self.fast_speed_np(u, n_unit)

    def cfl_speeds_np(self, u, n_unit):
        return np.maximum(self.fluid_speeds_np(u, n_unit), self.ch)

    def max_speed_np(self, ua, ub, n_unit):
        return np.maximum(self.fluid_speeds_np(ua, n_unit),
                          self.fluid_speeds_np(ub, n_unit)) + self.ch

    def flux_dot_n_np(self, u, n):
        rho = u[..., 0]
        v = u[..., 1:4] / rho[..., None]
        p = self.pressure(u)
        b = u[..., 5:8]
        psi = u[..., 8]
        bsq = np.sum(b ** 2, axis=-1)
        vn = v[..., 0] * n[..., 0] + v[..., 1] * n[..., 1]
        bn = b[..., 0] * n[..., 0] + b[..., 1] * n[..., 1]
        vdb = np.sum(v * b, axis=-1)
        ptot = p + 0.5 * bsq / self.mu0
        ch = self.ch
        out = np.empty(u.shape)
        out[..., 0] = rho * vn
        out[..., 1] = u[..., 1] * vn + ptot * n[..., 0] - b[..., 0] * bn / self.mu0
        out[..., 2] = u[..., 2] * vn + ptot * n[..., 1] - b[..., 1] * bn / self.mu0
        out[..., 3] = u[..., 3] * vn - b[..., 2] * bn / self.mu0
        out[..., 4] = vn * (0.5 * rho * np.sum(v ** 2, axis=-1)
                            + self.gamma * p / (self.gamma - 1.0)) \
            + (vn * bsq - bn * vdb) / self.mu0 + ch * psi * bn / self.mu0
        out[..., 5] = vn * b[..., 0] - bn * v[..., 0] + ch * psi * n[..., 0]
        out[..., 6] = vn * b[..., 1] - bn * v[..., 1] + ch * psi * n[..., 1]
        out[..., 7] = vn * b[..., 2] - bn * v[..., 2]
        out[..., 8] = ch * bn
        return out

    def entropy_np(self, u):
        rho = u[..., 0]
        p = self.pressure(u)
        s = np.log(p) - self.gamma * np.log(rho)
        return -rho * s / (self.gamma - 1.0)

    def entropy_variables_np(self, u):
        g = self.gamma
        rho = u[..., 0]
        v = u[..., 1:4] / rho[..., None]
        p = self.pressure(u)
        s = np.log(p) - g * np.log(rho)
        beta = 0.5 * rho / p
        w0 = (g - s) / (g - 1.0) - beta * np.sum(v ** 2, axis=-1)
        return np.concatenate(
            (w0[..., None], 2 * beta[..., None] * v, -2 * beta[..., None],
             2 * beta[..., None] * u[..., 5:8], 2 * beta[..., None] * u[..., 8:9]),
            axis=-1)

    def quantity_np(self, name, u):
        if name == "rho":
            return u[..., 0]
        if name == "p":
            return self.pressure(u)
        raise KeyError(name)

    def admissible_np(self, u):
        return (u[..., 0] > 0.0) & (self.pressure(u) > 0.0)

    def describe_state(self, u):
        w = self.primitives(u)
        return (f"rho={w[0]:.6g} v=({w[1]:.6g},{w[2]:.6g},{w[3]:.6g}) "
                f"p={w[4]:.6g} B=({w[5]:.6g},{w[6]:.6g},{w[7]:.6g}) psi={w[8]:.6g}")
