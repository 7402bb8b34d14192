"""The packaged experiments: KPP, Kelvin-Helmholtz, bow shock, jet, Orszag-Tang.

Each case bundles an equation system, a mesh recipe, a pointwise initial
condition, far-field data for its boundaries, and the default numerics.
Presets: "desk" runs in minutes at reduced resolution, "paper" matches
the published resolutions.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .config import ConfigError, RunConfig
from .equations import get_system
from .fct import parse_constraints
from .indicator import IndicatorConfig
from .mesh import build_bow_shock_mesh, build_cartesian

__all__ = ["CaseSpec", "RunSetup", "CASES", "get_case", "build_setup",
           "case_kpp", "case_khi", "case_bow_shock", "case_astro_jet",
           "case_orszag_tang"]


@dataclass
class CaseSpec:
    case_id: str
    description: str
    equation: str
    eq_params: dict
    make_mesh: callable          # (nx, ny, ops) -> CurvedMesh
    initial: callable            # (eq, x, y) -> conserved states
    far_field: callable | None   # (eq) -> callable(x, y) -> conserved
    defaults: dict
    presets: dict

    def preset(self, name):
        if name not in self.presets:
            raise ConfigError(
                f"case {self.case_id!r} has no preset {name!r} "
                f"(available: {sorted(self.presets)})")
        return self.presets[name]


@dataclass
class RunSetup:
    """Everything the driver needs, resolved from config + case defaults."""
    case: CaseSpec
    config: RunConfig
    eq: object
    mesh: object
    u0: np.ndarray
    limiter: object
    indicator: IndicatorConfig
    far_field: callable | None


# ---------------------------------------------------------------------------
# case definitions

def _kpp_initial(eq, x, y):
    inside = x * x + y * y <= 1.0
    return np.where(inside, 3.5 * np.pi, 0.25 * np.pi)[..., None]


def case_kpp() -> CaseSpec:
    return CaseSpec(
        case_id="kpp",
        description="scalar law with non-convex flux; rotating composite wave",
        equation="kpp",
        eq_params={},
        make_mesh=lambda nx, ny, ops: build_cartesian(
            nx, ny, (-2.0, 2.0, -2.0, 2.0), ops, periodic=(True, True)),
        initial=_kpp_initial,
        far_field=None,
        defaults=dict(volume_mode="split", volume_flux="ec",
                      surface_flux="llf", blend="element",
                      limiter_mode="apriori", fv_order=1, fv_flux="llf",
                      alpha_max=0.5, t_final=1.0),
        presets=dict(desk=dict(nx=64, ny=64, degree=3, t_final=1.0),
                     paper=dict(nx=256, ny=256, degree=3, t_final=1.0)),
    )


def _khi_initial(eq, x, y):
    b = np.tanh(15.0 * y + 7.5) - np.tanh(15.0 * y - 7.5)
    rho = 0.5 + 0.75 * b
    v1 = 0.5 * (b - 1.0)
    v2 = 0.1 * np.sin(2.0 * np.pi * x)
    p = np.ones_like(x)
    return eq.conserved(np.stack((rho, v1, v2, p), axis=-1))


def case_khi() -> CaseSpec:
    return CaseSpec(
        case_id="khi",
        description="Kelvin-Helmholtz instability, FV-relative positivity bounds",
        equation="euler",
        eq_params=dict(gamma=1.4),
        make_mesh=lambda nx, ny, ops: build_cartesian(
            nx, ny, (-1.0, 1.0, -1.0, 1.0), ops, periodic=(True, True)),
        initial=_khi_initial,
        far_field=None,
        defaults=dict(volume_mode="split", volume_flux="chandrashekar",
                      surface_flux="llf", blend="subcell",
                      limiter_mode="fct",
                      constraints="rho:min:fvrel:0.1,p:min:fvrel:0.1",
                      fv_order=1, fv_flux="llf", t_final=10.0),
        presets=dict(desk=dict(nx=16, ny=16, degree=7, t_final=3.7),
                     paper=dict(nx=64, ny=64, degree=7, t_final=10.0)),
    )


_BOW_STATE = (1.4, 4.0, 0.0, 1.0)    # rho, v1, v2, p


def _bow_initial(eq, x, y):
    rho, v1, v2, p = _BOW_STATE
    w = np.stack((np.full_like(x, rho), np.full_like(x, v1),
                  np.full_like(x, v2), np.full_like(x, p)), axis=-1)
    return eq.conserved(w)


def case_bow_shock() -> CaseSpec:
    return CaseSpec(
        case_id="bow_shock",
        description="Mach 4 bow shock on a curvilinear blunt-body mesh, IDP bounds",
        equation="euler",
        eq_params=dict(gamma=1.4),
        make_mesh=lambda nx, ny, ops: build_bow_shock_mesh(nx, ny, ops),
        initial=_bow_initial,
        far_field=lambda eq: (lambda x, y: _bow_initial(eq, x, y)),
        defaults=dict(volume_mode="split", volume_flux="chandrashekar",
                      surface_flux="llf", blend="subcell",
                      limiter_mode="fct",
                      constraints="rho:minmax:bar,phi:min:bar",
                      fv_order=1, fv_flux="llf", t_final=10.0),
        presets=dict(desk=dict(nx=8, ny=24, degree=5, t_final=3.0),
                     paper=dict(nx=12, ny=72, degree=5, t_final=10.0),
                     paper_fine=dict(nx=16, ny=96, degree=5, t_final=10.0)),
    )


_JET_AMBIENT = (0.5, 0.0, 0.0, 0.4127)
_JET_INFLOW = (5.0, 800.0, 0.0, 0.4127)


def _jet_initial(eq, x, y):
    rho, v1, v2, p = _JET_AMBIENT
    w = np.stack((np.full_like(x, rho), np.full_like(x, v1),
                  np.full_like(x, v2), np.full_like(x, p)), axis=-1)
    return eq.conserved(w)


def _jet_far(eq):
    def far(x, y):
        jet = (x < 0.0) & (np.abs(y) <= 0.05)
        w = np.stack([np.where(jet, j, a) for j, a in
                      zip(_JET_INFLOW, _JET_AMBIENT)], axis=-1)
        return eq.conserved(w)
    return far


def case_astro_jet() -> CaseSpec:
    return CaseSpec(
        case_id="jet",
        description="Mach ~2000 astrophysical jet, monatomic gas",
        equation="euler",
        eq_params=dict(gamma=5.0 / 3.0),
        make_mesh=lambda nx, ny, ops: build_cartesian(
            nx, ny, (-0.5, 0.5, -0.5, 0.5), ops, periodic=(False, True),
            tags={"west": "characteristic_io", "east": "characteristic_io"}),
        initial=_jet_initial,
        far_field=_jet_far,
        defaults=dict(volume_mode="split", volume_flux="chandrashekar",
                      surface_flux="llf", blend="subcell",
                      limiter_mode="fct",
                      constraints="rho:minmax:bar,phi:min:bar",
                      fv_order=1, fv_flux="llf", t_final=1e-3),
        presets=dict(desk=dict(nx=64, ny=64, degree=3, t_final=1e-3),
                     paper=dict(nx=256, ny=256, degree=3, t_final=1e-3)),
    )


def _ot_initial(eq, x, y):
    rho = np.full_like(x, 25.0 / (36.0 * np.pi))
    p = np.full_like(x, 5.0 / (12.0 * np.pi))
    v1 = -np.sin(2.0 * np.pi * y)
    v2 = np.sin(2.0 * np.pi * x)
    v3 = np.zeros_like(x)
    b0 = 1.0 / np.sqrt(4.0 * np.pi)
    b1 = -b0 * np.sin(2.0 * np.pi * y)
    b2 = -b0 * np.sin(4.0 * np.pi * x)
    b3 = np.zeros_like(x)
    psi = np.zeros_like(x)
    return eq.conserved(np.stack((rho, v1, v2, v3, p, b1, b2, b3, psi), axis=-1))


def case_orszag_tang() -> CaseSpec:
    return CaseSpec(
        case_id="orszag_tang",
        description="Orszag-Tang vortex, GLM-MHD with TVD-like density bounds",
        equation="glm_mhd",
        eq_params=dict(gamma=5.0 / 3.0, mu0=1.0),
        make_mesh=lambda nx, ny, ops: build_cartesian(
            nx, ny, (0.0, 1.0, 0.0, 1.0), ops, periodic=(True, True)),
        initial=_ot_initial,
        far_field=None,
        defaults=dict(volume_mode="split", volume_flux="chandrashekar",
                      surface_flux="llf", blend="subcell",
                      limiter_mode="fct",
                      constraints="rho:minmax:stencil_low",
                      fv_order=1, fv_flux="llf", t_final=1.0),
        presets=dict(desk=dict(nx=64, ny=64, degree=3, t_final=0.2),
                     paper=dict(nx=256, ny=256, degree=3, t_final=1.0,
                                cadence=0.5)),
    )


CASES = {c.case_id: c for c in (case_kpp(), case_khi(), case_bow_shock(),
                                case_astro_jet(), case_orszag_tang())}


def get_case(case_id: str) -> CaseSpec:
    if case_id not in CASES:
        raise ConfigError(f"unknown case {case_id!r} "
                          f"(available: {sorted(CASES)})")
    return CASES[case_id]


def build_setup(config: RunConfig) -> RunSetup:
    """Resolve config against the case defaults and build mesh/state."""
    from .fct import Constraint, LimiterConfig
    from .sbp import build_operators

    case = get_case(config.case)
    preset = dict(case.preset(config.preset))
    merged = dict(case.defaults)
    merged.update(preset)

    cfg = replace(config)
    for name in ("nx", "ny", "degree", "t_final", "volume_mode", "volume_flux",
                 "surface_flux", "blend", "fv_order", "fv_flux",
                 "limiter_mode", "constraints", "alpha_max", "cadence"):
        if getattr(cfg, name) is None and name in merged:
            setattr(cfg, name, merged[name])
    if cfg.alpha_max is None:
        cfg.alpha_max = 0.5
    if cfg.alpha_floor is None:
        cfg.alpha_floor = 0.001
    if cfg.indicator_quantity is None:
        cfg.indicator_quantity = "auto"

    dofs = cfg.nx * cfg.ny * (cfg.degree + 1) ** 2
    if dofs > cfg.dof_cap:
        raise ConfigError(f"{dofs} DOFs exceed the configured cap {cfg.dof_cap}")

    eq = get_system(case.equation, **case.eq_params)
    ops = build_operators(cfg.degree)
    mesh = case.make_mesh(cfg.nx, cfg.ny, ops)
    u0 = case.initial(eq, mesh.x[..., 0], mesh.x[..., 1])
    if not bool(np.all(eq.admissible_np(u0))):
        raise ConfigError(f"initial condition of case {case.case_id!r} is "
                          "inadmissible at some node")

    constraints = parse_constraints(cfg.constraints or "")
    if cfg.bounds_source is not None:
        constraints = [Constraint(c.quantity, c.kind, cfg.bounds_source, c.beta)
                       for c in constraints]
    if cfg.beta is not None:
        constraints = [Constraint(c.quantity, c.kind, c.source,
                                  cfg.beta if c.source == "fvrel" else c.beta)
                       for c in constraints]
    limiter = LimiterConfig(mode=cfg.limiter_mode or "off",
                            blend=cfg.blend or "subcell",
                            constraints=constraints,
                            gamma_relax=cfg.gamma_relax,
                            audit=cfg.audit)
    indicator = IndicatorConfig(quantity=cfg.indicator_quantity,
                                alpha_max=cfg.alpha_max,
                                alpha_floor=cfg.alpha_floor)
    far = case.far_field(eq) if case.far_field is not None else None
    return RunSetup(case=case, config=cfg, eq=eq, mesh=mesh, u0=u0,
                    limiter=limiter, indicator=indicator, far_field=far)
