"""A posteriori convex limiting (FCT/IDP machinery).

A limited forward-Euler stage runs the low-order FV update first, then
adds back as much of the anti-diffusive flux (DG minus FV, mass
weighted) as the configured bounds allow. Linear bounds use a
Zalesak-type coefficient; concave bounds (pressure, modified specific
entropy) solve one safeguarded Newton problem per incident interface
with the relaxation constant Gamma = 2d. Bounds may come from stencil
extrema of the previous state or the FV stage, from bar states, or as a
fraction beta of the FV solution.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .blending import BlendingField

__all__ = ["Constraint", "LimiterConfig", "StageStats", "parse_constraints",
           "compute_bar_states", "compute_bounds", "zalesak_limit",
           "newton_interface_limit", "elementwise_alpha_from_nodes",
           "limiting_stage"]

_SOURCES = ("bar", "stencil_prev", "stencil_low", "fvrel")


@dataclass(frozen=True)
class Constraint:
    quantity: str            # rho | p | phi | u
    kind: str                # min | max | minmax
    source: str              # bar | stencil_prev | stencil_low | fvrel
    beta: float = 1.0

    def __post_init__(self):
        if self.kind not in ("min", "max", "minmax"):
            raise ValueError(f"bad constraint kind {self.kind!r}")
        if self.source not in _SOURCES:
            raise ValueError(f"bad bound source {self.source!r}")
        if self.source == "fvrel":
            if not 0.0 < self.beta <= 1.0:
                raise ValueError(f"beta must be in (0,1], got {self.beta}")
            if self.kind != "min":
                raise ValueError("fvrel bounds support only 'min'")


def parse_constraints(text: str) -> list[Constraint]:
    """Parse 'quantity:kind:source[:beta]' items separated by commas."""
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        if len(parts) == 3:
            q, kind, source = parts
            out.append(Constraint(q, kind, source))
        elif len(parts) == 4:
            q, kind, source, beta = parts
            out.append(Constraint(q, kind, source, float(beta)))
        else:
            raise ValueError(f"cannot parse constraint {item!r}")
    return out


@dataclass
class LimiterConfig:
    mode: str = "off"              # off | apriori | fct
    blend: str = "subcell"         # element | subcell
    constraints: list = field(default_factory=list)
    gamma_relax: float = 4.0       # 2d with d = 2
    audit: bool = True


@dataclass
class StageStats:
    zalesak_violations: int = 0
    newton_violations: int = 0
    audit_residual: float = 0.0
    fv_fallbacks: int = 0

    def merge(self, other: "StageStats"):
        self.zalesak_violations += other.zalesak_violations
        self.newton_violations += other.newton_violations
        self.audit_residual = max(self.audit_residual, other.audit_residual)
        self.fv_fallbacks += other.fv_fallbacks


def compute_bar_states(u, semi, uext=None):
    """Bar states on all subcell interfaces, plus the wavespeeds used."""
    return semi.bar_states(u, uext)


def _stencil_minmax(vals, ext_w, ext_e, ext_s, ext_n):
    d1 = np.concatenate((ext_w[:, None, :], vals, ext_e[:, None, :]), axis=1)
    d2 = np.concatenate((ext_s[:, :, None], vals, ext_n[:, :, None]), axis=2)
    lo = np.minimum(np.minimum(d1[:, :-2], d1[:, 2:]), vals)
    lo = np.minimum(lo, np.minimum(d2[:, :, :-2], d2[:, :, 2:]))
    hi = np.maximum(np.maximum(d1[:, :-2], d1[:, 2:]), vals)
    hi = np.maximum(hi, np.maximum(d2[:, :, :-2], d2[:, :, 2:]))
    return lo, hi


class BoundsContext:
    """Lazy providers for the bound sources of one limited stage."""

    def __init__(self, semi, u, uext, ufv):
        self.semi = semi
        self.u = u
        self.uext = uext
        self.ufv = ufv
        self._bars = None
        self._uext_fv = None

    @property
    def bars(self):
        if self._bars is None:
            self._bars = self.semi.bar_states(self.u, self.uext)
        return self._bars

    @property
    def uext_fv(self):
        if self._uext_fv is None:
            self._uext_fv = self.semi.exterior_states(self.ufv)
        return self._uext_fv

    def quantity(self, name, state):
        return self.semi.eq.quantity_np(name, state)


def compute_bounds(constraint: Constraint, ctx: BoundsContext):
    """Per-node (lo, hi) arrays for one constraint; None where unused."""
    q = constraint.quantity
    want_lo = constraint.kind in ("min", "minmax")
    want_hi = constraint.kind in ("max", "minmax")
    if constraint.source == "fvrel":
        lo = constraint.beta * ctx.quantity(q, ctx.ufv)
        return lo, None
    if constraint.source == "bar":
        bar1, _, bar2, _ = ctx.bars
        qs = ctx.quantity(q, ctx.u)
        qb1 = ctx.quantity(q, bar1)
        qb2 = ctx.quantity(q, bar2)
        cands = (qs, qb1[:, :-1], qb1[:, 1:], qb2[:, :, :-1], qb2[:, :, 1:])
        lo = cands[0]
        hi = cands[0]
        for c in cands[1:]:
            lo = np.minimum(lo, c)
            hi = np.maximum(hi, c)
        return (lo if want_lo else None), (hi if want_hi else None)
    if constraint.source == "stencil_prev":
        state, ext = ctx.u, ctx.uext
    else:
        state, ext = ctx.ufv, ctx.uext_fv
    vals = ctx.quantity(q, state)
    qe = ctx.quantity(q, ext)
    lo, hi = _stencil_minmax(vals, qe[:, 0], qe[:, 1], qe[:, 2], qe[:, 3])
    return (lo if want_lo else None), (hi if want_hi else None)


def zalesak_limit(alpha_tilde, semi, dt, ufv, dh1, dh2, comp, lo, hi,
                  stats: StageStats):
    """Fold the Zalesak coefficients for one linear bound into alpha_tilde."""
    mesh = semi.mesh
    dummy = np.zeros(mesh.jac.shape)
    nviol = kernels.zalesak_alpha(dh1, dh2, comp, mesh.jac, semi.ops.weights,
                                  dt, ufv,
                                  lo if lo is not None else dummy,
                                  hi if hi is not None else dummy,
                                  lo is not None, hi is not None,
                                  alpha_tilde)
    stats.zalesak_violations += int(nviol)
    return alpha_tilde


def _newton_kernel(eq, name):
    cache = getattr(eq, "_newton_kernels", None)
    if cache is None:
        cache = {}
        eq._newton_kernels = cache
    if name not in cache:
        _, gval, ggrad = eq.quantities[name]
        cache[name] = kernels.make_newton_limiter(gval, ggrad)
    return cache[name]


def newton_interface_limit(alpha_tilde, semi, dt, ufv, dh1, dh2, quantity,
                           gmin, gamma_relax, stats: StageStats):
    """Fold the per-interface Newton coefficients for one concave bound."""
    kern = _newton_kernel(semi.eq, quantity)
    nviol = kern(ufv, dh1, dh2, semi.mesh.jac, semi.ops.weights, dt, gmin,
                 gamma_relax, semi.eq.params, alpha_tilde)
    stats.newton_violations += int(nviol)
    return alpha_tilde


def elementwise_alpha_from_nodes(alpha_tilde):
    """Every element takes the max of its nodes' provisional coefficients."""
    return alpha_tilde.max(axis=(1, 2))


def limiting_stage(u, dt, semi, cfg: LimiterConfig, *, uext=None,
                   dg_buffers=None, fv_buffers=None):
    """One bounds-enforcing forward-Euler stage.

    Returns (stage solution, nodal alpha field, StageStats). With empty
    constraints the result is the pure DG stage (alpha = 0); forcing all
    coefficients to one reproduces the FV stage exactly.
    """
    eq = semi.eq
    mesh = semi.mesh
    stats = StageStats()
    if uext is None:
        uext = semi.exterior_states(u)
    computed_dg = dg_buffers is None
    if dg_buffers is None:
        dg_buffers = semi.dg_flux_buffers(u, uext)
    bars = None
    # the in-stage split DG pass already filled the node workspace for u
    prepped = computed_dg and semi.volume_mode == "split"
    if fv_buffers is None:
        needs_bars = any(c.source == "bar" for c in cfg.constraints)
        if needs_bars and semi.fv_order == 1:
            fv_buffers, bars = semi.fv_buffers_with_bars(
                u, uext, match_faces=(cfg.blend == "element"),
                dg_buffers=dg_buffers, prepped=prepped)
        else:
            before = semi.fv_fallback_count
            fv_buffers = semi.fv_flux_buffers(
                u, uext, match_faces=(cfg.blend == "element"),
                dg_buffers=dg_buffers)
            stats.fv_fallbacks = semi.fv_fallback_count - before
    ufv = u + dt * semi.rhs_from_buffers(*fv_buffers)
    dh1 = dg_buffers[0] - fv_buffers[0]
    dh2 = dg_buffers[1] - fv_buffers[1]

    alpha_tilde = np.zeros(mesh.jac.shape)
    ctx = BoundsContext(semi, u, uext, ufv)
    if bars is not None:
        ctx._bars = bars
    bounds = []
    # linear bounds first, then the concave Newton problems, each taking
    # the running max of the provisional coefficients
    for con in cfg.constraints:
        kind, *info = eq.quantities[con.quantity]
        lo, hi = compute_bounds(con, ctx)
        bounds.append((con, lo, hi))
        if kind == "linear":
            zalesak_limit(alpha_tilde, semi, dt, ufv, dh1, dh2, info[0],
                          lo, hi, stats)
    for (con, lo, hi) in bounds:
        kind, *_ = eq.quantities[con.quantity]
        if kind == "concave":
            if hi is not None:
                raise ValueError(
                    f"upper bounds on concave quantity {con.quantity!r} are "
                    "not supported")
            newton_interface_limit(alpha_tilde, semi, dt, ufv, dh1, dh2,
                                   con.quantity, lo, cfg.gamma_relax, stats)

    if cfg.blend == "element":
        alpha_e = elementwise_alpha_from_nodes(alpha_tilde)
        fld = BlendingField.from_element(alpha_e, mesh)
        alpha_nodes = np.broadcast_to(
            alpha_e[:, None, None], mesh.jac.shape).copy()
    else:
        fld = BlendingField.from_nodes(alpha_tilde, mesh)
        alpha_nodes = fld.nodal()

    u_new = np.empty_like(u)
    kernels.fct_apply(ufv, dh1, dh2, fld.a1, fld.a2, mesh.jac,
                      semi.ops.weights, dt, u_new)

    if cfg.audit:
        res = 0.0
        for (con, lo, hi) in bounds:
            qn = eq.quantity_np(con.quantity, u_new)
            if lo is not None:
                res = max(res, float(np.max((lo - qn) / np.maximum(1.0, np.abs(lo)))))
            if hi is not None:
                res = max(res, float(np.max((qn - hi) / np.maximum(1.0, np.abs(hi)))))
        stats.audit_residual = max(res, 0.0)
    return u_new, alpha_nodes, stats
