"""Equation systems and small functional wrappers around their kernels.

The system classes carry the numba node kernels used by the solver; the
module-level functions here are convenience entry points for single
states or state pairs (tests, verification, scripting).
"""
from __future__ import annotations

import numpy as np

from ..kernels import logmean_plain
from .euler import EulerSystem
from .glm_mhd import GlmMhdSystem
from .kpp import KppSystem, kpp_ec_flux, kpp_flux

__all__ = [
    "EulerSystem",
    "GlmMhdSystem",
    "KppSystem",
    "get_system",
    "kpp_flux",
    "kpp_ec_flux",
    "euler_flux",
    "euler_chandrashekar_flux",
    "glm_mhd_flux",
    "glm_mhd_volume_flux",
    "llf_surface_flux",
    "hlle_surface_flux",
    "max_wavespeed",
    "modified_specific_entropy",
    "log_mean",
]


def get_system(name: str, **kwargs):
    if name == "kpp":
        return KppSystem()
    if name == "euler":
        return EulerSystem(**kwargs)
    if name == "glm_mhd":
        return GlmMhdSystem(**kwargs)
    raise KeyError(f"unknown equation system {name!r}")


def log_mean(a: float, b: float) -> float:
    return float(logmean_plain(float(a), float(b)))


def _check_state(eq, u):
    u = np.asarray(u, dtype=float)
    if u.shape != (eq.n_vars,):
        raise ValueError(f"expected a state of length {eq.n_vars}, got {u.shape}")
    if not bool(eq.admissible_np(u[None, :])[0]):
        raise ValueError(f"inadmissible state: {eq.describe_state(u)}")
    return u


def euler_flux(u, gamma: float = 1.4):
    """Physical Euler flux, shape (2, 4): rows are x and y components."""
    eq = EulerSystem(gamma)
    u = np.asarray(u, dtype=float)
    if u[0] <= 0.0:
        raise ValueError(f"nonpositive density {u[0]} in euler_flux")
    fx = eq.flux_dot_n_np(u[None, :], np.array([[1.0, 0.0]]))[0]
    fy = eq.flux_dot_n_np(u[None, :], np.array([[0.0, 1.0]]))[0]
    return np.stack((fx, fy))


def euler_chandrashekar_flux(u_a, u_b, gamma: float = 1.4):
    """Two-point EC/KEP flux, shape (2, 4)."""
    eq = EulerSystem(gamma)
    u_a = _check_state(eq, u_a)
    u_b = _check_state(eq, u_b)
    wa = np.empty(eq.nw)
    wb = np.empty(eq.nw)
    eq.prep_node(u_a, eq.params, wa)
    eq.prep_node(u_b, eq.params, wb)
    out = np.empty(4)
    res = []
    for nx, ny in ((1.0, 0.0), (0.0, 1.0)):
        eq.volume_fluxes["chandrashekar"](wa, wb, nx, ny, nx, ny, eq.params, out)
        res.append(out.copy())
    return np.stack(res)


def glm_mhd_flux(u, gamma: float = 5.0 / 3.0, mu0: float = 1.0, ch: float = 0.0):
    """Physical GLM-MHD flux, shape (2, 9)."""
    eq = GlmMhdSystem(gamma, mu0)
    eq.set_ch(ch)
    u = _check_state(eq, u)
    fx = eq.flux_dot_n_np(u[None, :], np.array([[1.0, 0.0]]))[0]
    fy = eq.flux_dot_n_np(u[None, :], np.array([[0.0, 1.0]]))[0]
    return np.stack((fx, fy))


def glm_mhd_volume_flux(u_a, u_b, gamma: float = 5.0 / 3.0, mu0: float = 1.0,
                        ch: float = 0.0):
    """Two-point GLM-MHD volume flux, shape (2, 9)."""
    eq = GlmMhdSystem(gamma, mu0)
    eq.set_ch(ch)
    u_a = _check_state(eq, u_a)
    u_b = _check_state(eq, u_b)
    wa = np.empty(eq.nw)
    wb = np.empty(eq.nw)
    eq.prep_node(u_a, eq.params, wa)
    eq.prep_node(u_b, eq.params, wb)
    out = np.empty(9)
    res = []
    for nx, ny in ((1.0, 0.0), (0.0, 1.0)):
        eq.volume_fluxes["chandrashekar"](wa, wb, nx, ny, nx, ny, eq.params, out)
        res.append(out.copy())
    return np.stack(res)


def llf_surface_flux(u_a, u_b, n, eq):
    """LLF flux along unit normal ``n`` for any registered system."""
    u_a = _check_state(eq, u_a)
    u_b = _check_state(eq, u_b)
    n = np.asarray(n, dtype=float)
    out = np.empty(eq.n_vars)
    tmp = np.empty(eq.n_vars)
    eq.surface_fluxes["llf"](u_a, u_b, n[0], n[1], eq.params, out, tmp)
    return out


def hlle_surface_flux(u_a, u_b, n, eq):
    if "hlle" not in eq.surface_fluxes:
        raise KeyError(f"system {eq.name!r} has no HLLE solver")
    u_a = _check_state(eq, u_a)
    u_b = _check_state(eq, u_b)
    n = np.asarray(n, dtype=float)
    out = np.empty(eq.n_vars)
    tmp = np.empty(eq.n_vars)
    eq.surface_fluxes["hlle"](u_a, u_b, n[0], n[1], eq.params, out, tmp)
    return out


def max_wavespeed(u_a, u_b, n, eq) -> float:
    u_a = _check_state(eq, u_a)
    u_b = _check_state(eq, u_b)
    n = np.asarray(n, dtype=float)
    return float(eq.max_speed(u_a, u_b, n[0], n[1], eq.params))


def modified_specific_entropy(u, gamma: float = 1.4) -> float:
    """phi = e rho^(1 - gamma) for an Euler state."""
    u = np.asarray(u, dtype=float)
    if u[0] <= 0.0:
        raise ValueError(f"nonpositive density {u[0]}")
    eq = EulerSystem(gamma)
    return float(eq.modified_specific_entropy_np(u[None, :])[0])
