"""Run loop: initialization, SSP-RK3 stepping with limiting, outputs.

Runs are deterministic for a given configuration. A NaN or inadmissible
state with no active safeguard aborts with step, stage and node context
plus a state dump next to the regular outputs.
"""
from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

import numpy as np

from .blending import BlendingField, blend_elementwise
from .cases import RunSetup, build_setup
from .config import RunConfig
from .diagnostics import (AlphaTracker, DiagWriter, conserved_totals,
                          record_step)
from .fct import StageStats, limiting_stage
from .indicator import apriori_alphas
from .semidisc import SemiDiscretization
from .stepping import ssp_rk3_step, update_ch
from .vtk_io import write_snapshot

__all__ = ["SolverAbort", "RunResult", "run", "make_stage_operator",
           "snapshot_fields"]


class SolverAbort(RuntimeError):
    def __init__(self, message, step=None, stage=None, node=None):
        super().__init__(message)
        self.step = step
        self.stage = stage
        self.node = node


@dataclass
class RunResult:
    status: str
    steps: int
    t: float
    wall_time: float
    outdir: str
    min_rho: float
    min_p: float
    drift: np.ndarray
    alpha_run_mean: float
    alpha_run_max: float
    stats: StageStats
    message: str = ""
    snapshots: list = field(default_factory=list)


def make_stage_operator(semi: SemiDiscretization, setup: RunSetup,
                        stats: StageStats, tracker: AlphaTracker | None = None):
    """Forward-Euler substep operator including the configured limiting."""
    lim = setup.limiter
    mesh = semi.mesh

    def stage(u, t, dt):
        if lim.mode == "fct":
            u_new, alpha_nodes, st = limiting_stage(u, dt, semi, lim)
            stats.merge(st)
        elif lim.mode == "apriori":
            alpha_e = apriori_alphas(u, semi.eq, semi.ops, setup.indicator)
            uext = semi.exterior_states(u)
            dg = semi.dg_flux_buffers(u, uext)
            flagged = np.nonzero(alpha_e > 0.0)[0]
            if lim.blend == "element":
                du = semi.rhs_from_buffers(*dg)
                if len(flagged):
                    fv = semi.fv_flux_buffers(u, uext, match_faces=True,
                                              dg_buffers=dg, elems=flagged)
                    du_fv = semi.rhs_from_buffers(*fv)
                    du[flagged] = blend_elementwise(
                        du, du_fv, alpha_e)[flagged]
                u_new = u + dt * du
                alpha_nodes = np.broadcast_to(
                    alpha_e[:, None, None], mesh.jac.shape).copy()
            else:
                fld = BlendingField.from_element(alpha_e, mesh)
                fv = semi.fv_flux_buffers(u, uext)
                f1 = (1.0 - fld.a1[..., None]) * dg[0] + fld.a1[..., None] * fv[0]
                f2 = (1.0 - fld.a2[..., None]) * dg[1] + fld.a2[..., None] * fv[1]
                u_new = u + dt * semi.rhs_from_buffers(f1, f2)
                alpha_nodes = fld.nodal()
        else:
            u_new = u + dt * semi.dg_rhs(u)
            alpha_nodes = None
        if tracker is not None:
            tracker.add_stage(t, alpha_nodes)
        return u_new, alpha_nodes

    return stage


def snapshot_fields(u, eq, alpha_nodes=None):
    """Conserved + derived nodal fields for a snapshot file."""
    fields = {name: u[..., k].copy() for k, name in enumerate(eq.var_names)}
    if eq.kind != "scalar":
        fields["rho"] = u[..., 0].copy()
        fields["p"] = eq.pressure(u)
        if eq.kind == "euler":
            fields["phi"] = eq.modified_specific_entropy_np(u)
    fields["alpha"] = (np.zeros_like(u[..., 0]) if alpha_nodes is None
                       else np.asarray(alpha_nodes, dtype=float))
    return fields


def _check_admissible(u, eq, step):
    finite = np.isfinite(u).all(axis=-1)
    bad = ~finite | ~eq.admissible_np(np.where(finite[..., None], u, 1.0))
    if np.any(bad):
        e, i, j = np.argwhere(bad)[0]
        raise SolverAbort(
            f"inadmissible state at step {step}, element {e}, node ({i},{j}): "
            f"{eq.describe_state(u[e, i, j])}",
            step=step, node=(int(e), int(i), int(j)))


def run(config: RunConfig) -> RunResult:
    """Execute a configured case run; writes diag.csv, snapshots, summary."""
    setup = build_setup(config)
    cfg = setup.config
    eq, mesh = setup.eq, setup.mesh
    semi = SemiDiscretization(
        mesh, eq, volume_mode=cfg.volume_mode, volume_flux=cfg.volume_flux,
        surface_flux=cfg.surface_flux, fv_order=cfg.fv_order,
        fv_surface_flux=cfg.fv_flux, far_field=setup.far_field)

    os.makedirs(cfg.outdir, exist_ok=True)
    volw = mesh.volume_weights()
    tracker = AlphaTracker(volw)
    stats = StageStats()
    stage = make_stage_operator(semi, setup, stats, tracker)
    diag = DiagWriter(os.path.join(cfg.outdir, "diag.csv"), eq.var_names)

    u = setup.u0.copy()
    totals0 = conserved_totals(u, volw)
    l1 = np.einsum("kij,kijv->v", volw, np.abs(u))
    # identically-zero components (e.g. the divergence-cleaning field at
    # t=0) measure their drift against the leading conserved magnitude
    totals_scale = np.maximum(np.abs(totals0), l1)
    totals_scale = np.where(totals_scale > 0.0, totals_scale, l1.max())
    totals_scale = np.maximum(totals_scale, 1e-300)

    t_final = cfg.t_final
    cadence = cfg.cadence if cfg.cadence else t_final
    t = 0.0
    step = 0
    min_rho_run = np.inf
    min_p_run = np.inf
    snapshots = []
    t0 = time.perf_counter()

    def snap(tag, alpha):
        path = os.path.join(cfg.outdir, f"snap_{tag}.vtk")
        write_snapshot(path, mesh, snapshot_fields(u, eq, alpha),
                       title=f"{setup.case.case_id} t={t:.8g}")
        snapshots.append(path)

    snap("0000", None)
    next_mark = cadence
    status, message = "ok", ""
    try:
        while t < t_final - 1e-14 and step < cfg.max_steps:
            if eq.kind == "mhd":
                eq.set_ch(update_ch(u, mesh, eq))
            dt = semi.cfl_time_step(u, cfg.cfl)
            dt = min(dt, t_final - t, next_mark - t)
            u, stage_alphas = ssp_rk3_step(u, t, dt, stage)
            t += dt
            step += 1
            _check_admissible(u, eq, step)
            rec = record_step(t, dt, tracker, u, eq, volw, totals0,
                              totals_scale)
            diag.write(rec)
            min_rho_run = min(min_rho_run, rec.min_rho)
            min_p_run = min(min_p_run, rec.min_p)
            if t >= next_mark - 1e-12:
                snap(f"{step:04d}", stage_alphas[-1])
                next_mark += cadence
    except SolverAbort as exc:
        status, message = "aborted", str(exc)
        dump = os.path.join(cfg.outdir, "abort_state.vtk")
        safe = {name: np.nan_to_num(f) for name, f in
                snapshot_fields(u, eq).items()}
        write_snapshot(dump, mesh, safe, title=f"abort at step {step}")
    finally:
        diag.close()

    wall = time.perf_counter() - t0
    totals = conserved_totals(u, volw)
    drift = np.abs(totals - totals0) / totals_scale
    result = RunResult(status=status, steps=step, t=t, wall_time=wall,
                       outdir=cfg.outdir, min_rho=float(min_rho_run),
                       min_p=float(min_p_run), drift=drift,
                       alpha_run_mean=tracker.run_mean,
                       alpha_run_max=tracker.run_max,
                       stats=stats, message=message, snapshots=snapshots)
    _write_summary(os.path.join(cfg.outdir, "summary.txt"), setup, result)
    return result


def _write_summary(path, setup: RunSetup, res: RunResult):
    eq = setup.eq
    with open(path, "w") as fh:
        fh.write(f"case: {setup.case.case_id}\n")
        fh.write(f"status: {res.status}\n")
        if res.message:
            fh.write(f"message: {res.message}\n")
        fh.write(f"steps: {res.steps}\n")
        fh.write(f"t_reached: {res.t:.17g}\n")
        fh.write(f"wall_time_s: {res.wall_time:.3f}\n")
        fh.write(f"min_rho_run: {res.min_rho:.17g}\n")
        fh.write(f"min_p_run: {res.min_p:.17g}\n")
        fh.write(f"alpha_run_mean: {res.alpha_run_mean:.17g}\n")
        fh.write(f"alpha_run_max: {res.alpha_run_max:.17g}\n")
        for name, val in zip(eq.var_names, res.drift):
            fh.write(f"drift_{name}: {val:.17g}\n")
        fh.write(f"audit_residual_max: {res.stats.audit_residual:.17g}\n")
        fh.write(f"zalesak_violations: {res.stats.zalesak_violations}\n")
        fh.write(f"newton_violations: {res.stats.newton_violations}\n")
        fh.write(f"fv_fallbacks: {res.stats.fv_fallbacks}\n")
