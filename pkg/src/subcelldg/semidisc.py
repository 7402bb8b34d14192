"""Semi-discrete operators: DG and subcell FV flux buffers and RHS assembly.

Both operators share the LGL DOFs, quadrature weights, and subcell
normals of the mesh, and both produce "telescoping" flux buffers

    f1[e, s, j] = flux through the interface between nodes (s-1, j) and (s, j)
    f2[e, i, s] = flux through the interface between nodes (i, s-1) and (i, s)

with s = 0 and s = N+1 the element faces, so that

    J_ij du_ij = (f1[i] - f1[i+1]) / w_i + (f2[j] - f2[j+1]) / w_j.

Face fluxes are evaluated once per shared face and written to both
neighbors; the DG interior entries come from the recursive accumulation
of the volume terms, the FV entries from approximate Riemann solvers on
the subcell normals.
"""
from __future__ import annotations

import numpy as np

from . import kernels
from .boundary import boundary_exterior
from .mesh import BC_CHAR, BC_DIRICHLET, CurvedMesh

__all__ = ["SemiDiscretization", "dg_rhs", "fv_rhs"]

_SIDES = (0, 1, 2, 3)


class SemiDiscretization:
    """Binds a mesh and an equation system to concrete DG/FV operators."""

    def __init__(self, mesh: CurvedMesh, eq, *, volume_mode="split",
                 volume_flux=None, surface_flux="llf", fv_order=1,
                 fv_surface_flux=None, far_field=None):
        if volume_mode not in ("split", "standard"):
            raise ValueError(f"unknown volume mode {volume_mode!r}")
        self.mesh = mesh
        self.ops = mesh.ops
        self.eq = eq
        self.volume_mode = volume_mode
        if volume_flux is None:
            volume_flux = "ec" if eq.kind == "scalar" else "chandrashekar"
        self.volume_flux = volume_flux
        self.surface_flux = surface_flux
        self.fv_order = int(fv_order)
        self.fv_surface_flux = fv_surface_flux or surface_flux
        if self.fv_order not in (1, 2):
            raise ValueError(f"FV reconstruction order must be 1 or 2, "
                             f"got {fv_order}")

        k = mesh.n_elements
        npts = self.ops.n_nodes
        nv = eq.n_vars
        self._all_elems = np.arange(k, dtype=np.int64)
        self._wk = np.empty((k, npts, npts, eq.nw))
        self._wext = np.empty((k, 4, npts, eq.nw))
        self.fv_fallback_count = 0

        self._prep, _ = kernels.make_prep(eq.prep_node, eq.nw)
        self._prep_ext = kernels.make_prep_ext(eq.prep_node)
        self._volume_kernels = {}
        self._surface_kernels = {}
        self._fv_kernels = {}

        # static metric norms and unit normals for the CFL bound
        self._m1 = np.linalg.norm(mesh.ja1, axis=-1)
        self._m2 = np.linalg.norm(mesh.ja2, axis=-1)
        self._n1u = mesh.ja1 / self._m1[..., None]
        self._n2u = mesh.ja2 / self._m2[..., None]

        # boundary face data: interior-trace indices, outward unit normals,
        # far-field states where the tag needs one
        b = mesh.bfaces
        self._b_e = b[:, 0].astype(np.int64)
        self._b_side = b[:, 1].astype(np.int64)
        self._b_tag = b[:, 2].astype(np.int64)
        nrm = np.empty((len(b), npts, 2))
        coords = np.empty((len(b), npts, 2))
        for bi, (e, side, _tag) in enumerate(b):
            if side == 0:
                vec, xy = -mesh.ja1[e, 0], mesh.x[e, 0]
            elif side == 1:
                vec, xy = mesh.ja1[e, -1], mesh.x[e, -1]
            elif side == 2:
                vec, xy = -mesh.ja2[e, :, 0], mesh.x[e, :, 0]
            else:
                vec, xy = mesh.ja2[e, :, -1], mesh.x[e, :, -1]
            nrm[bi] = vec / np.linalg.norm(vec, axis=-1, keepdims=True)
            coords[bi] = xy
        self._b_normal = nrm
        self._b_far = np.full((len(b), npts, nv), np.nan)
        needs_far = np.isin(self._b_tag, (BC_CHAR, BC_DIRICHLET))
        if np.any(needs_far):
            if far_field is None:
                raise ValueError(
                    "mesh has characteristic/dirichlet boundaries but no "
                    "far_field function was given")
            self._b_far[needs_far] = far_field(coords[needs_far, :, 0],
                                               coords[needs_far, :, 1])

    # kernel caches ------------------------------------------------------

    def _volume_kernel(self, name):
        if name not in self._volume_kernels:
            self._volume_kernels[name] = kernels.make_split_volume(
                self.eq.volume_fluxes[name])
        return self._volume_kernels[name]

    def _surface(self, name):
        if name not in self._surface_kernels:
            riemann = self.eq.surface_fluxes[name]
            s0, s1 = kernels.make_surface_interior(riemann)
            sb = kernels.make_surface_boundary(riemann)
            self._surface_kernels[name] = (s0, s1, sb)
        return self._surface_kernels[name]

    def _fv_kernel(self, order, name):
        key = (order, name)
        if key not in self._fv_kernels:
            riemann = self.eq.surface_fluxes[name]
            if order == 1:
                self._fv_kernels[key] = kernels.make_fv_first_order(riemann)
            else:
                self._fv_kernels[key] = kernels.make_fv_second_order(
                    riemann, self.eq.prim_node, self.eq.cons_node,
                    self.eq.positive)
        return self._fv_kernels[key]

    # exterior states ------------------------------------------------------

    def exterior_states(self, u):
        """Neighbor/BC trace states per element side, shape (K, 4, Np, nv)."""
        mesh = self.mesh
        npts = self.ops.n_nodes
        uext = np.empty((mesh.n_elements, 4, npts, self.eq.n_vars))
        f0, f1 = mesh.faces0, mesh.faces1
        if len(f0):
            uext[f0[:, 0], 1] = u[f0[:, 1], 0]
            uext[f0[:, 1], 0] = u[f0[:, 0], -1]
        if len(f1):
            uext[f1[:, 0], 3] = u[f1[:, 1], :, 0]
            uext[f1[:, 1], 2] = u[f1[:, 0], :, -1]
        if len(self._b_e):
            trace = self._boundary_trace(u)
            for tag in np.unique(self._b_tag):
                sel = self._b_tag == tag
                far = self._b_far[sel]
                ext = boundary_exterior(int(tag), trace[sel],
                                        self._b_normal[sel], far, self.eq)
                uext[self._b_e[sel], self._b_side[sel]] = ext
        return uext

    def _boundary_trace(self, u):
        npts = self.ops.n_nodes
        trace = np.empty((len(self._b_e), npts, self.eq.n_vars))
        for side in _SIDES:
            sel = self._b_side == side
            if not np.any(sel):
                continue
            es = self._b_e[sel]
            if side == 0:
                trace[sel] = u[es, 0]
            elif side == 1:
                trace[sel] = u[es, -1]
            elif side == 2:
                trace[sel] = u[es, :, 0]
            else:
                trace[sel] = u[es, :, -1]
        return trace

    # flux buffers ---------------------------------------------------------

    def _empty_buffers(self):
        k = self.mesh.n_elements
        npts = self.ops.n_nodes
        nv = self.eq.n_vars
        f1 = np.empty((k, npts + 1, npts, nv))
        f2 = np.empty((k, npts, npts + 1, nv))
        return f1, f2

    def _apply_surface(self, name, u, uext, f1, f2):
        s0, s1, sb = self._surface(name)
        mesh = self.mesh
        if len(mesh.faces0):
            s0(u, mesh.faces0, mesh.ja1, self.eq.params, f1)
        if len(mesh.faces1):
            s1(u, mesh.faces1, mesh.ja2, self.eq.params, f2)
        if len(self._b_e):
            uext_b = uext[self._b_e, self._b_side]
            sb(u, uext_b, self._b_e, self._b_side, mesh.ja1, mesh.ja2,
               self.eq.params, f1, f2)

    def dg_flux_buffers(self, u, uext=None, *, volume_mode=None,
                        volume_flux=None, surface_flux=None):
        """High-order telescoping fluxes: surface entries at s in {0, N+1},
        interior entries from the volume-term recursion."""
        mode = volume_mode or self.volume_mode
        vflux = volume_flux or self.volume_flux
        sflux = surface_flux or self.surface_flux
        if uext is None:
            uext = self.exterior_states(u)
        mesh, ops, eq = self.mesh, self.ops, self.eq
        npts = ops.n_nodes
        if mode == "split":
            fvol1 = np.empty(u.shape)
            fvol2 = np.empty(u.shape)
            self._prep(u, eq.params, self._wk)
            self._volume_kernel(vflux)(self._wk, mesh.ja1, mesh.ja2, ops.S,
                                       eq.params, fvol1, fvol2)
        else:
            ft1 = eq.flux_dot_n_np(u, mesh.ja1)
            ft2 = eq.flux_dot_n_np(u, mesh.ja2)
            fvol1 = -np.einsum("im,kmjv->kijv", ops.Sbar, ft1)
            fvol2 = -np.einsum("jm,kimv->kijv", ops.Sbar, ft2)
        f1, f2 = self._empty_buffers()
        f1[:, 1:npts] = -np.cumsum(fvol1, axis=1)[:, : npts - 1]
        f2[:, :, 1:npts] = -np.cumsum(fvol2, axis=2)[:, :, : npts - 1]
        self._apply_surface(sflux, u, uext, f1, f2)
        return f1, f2

    def fv_flux_buffers(self, u, uext=None, *, order=None, surface_flux=None,
                        match_faces=False, dg_buffers=None, elems=None):
        """Subcell FV fluxes; ``match_faces`` copies the DG face entries
        (required for conservative element-wise blending)."""
        order = order or self.fv_order
        sflux = surface_flux or self.fv_surface_flux
        if uext is None:
            uext = self.exterior_states(u)
        mesh, ops, eq = self.mesh, self.ops, self.eq
        npts = ops.n_nodes
        if elems is None:
            elems = self._all_elems
        f1, f2 = self._empty_buffers()
        if order == 1:
            self._fv_kernel(1, sflux)(u, mesh.n1, mesh.n2, eq.params,
                                      f1, f2, elems)
        else:
            nfb = self._fv_kernel(2, sflux)(u, mesh.n1, mesh.n2, ops.nodes,
                                            ops.iface_pos, eq.params, f1, f2,
                                            elems)
            self.fv_fallback_count += int(nfb)
        # with identical solver and (reconstruction-free) face inputs, the
        # FV face fluxes coincide with the DG surface fluxes
        same_faces = dg_buffers is not None and sflux == self.surface_flux
        if match_faces or same_faces:
            if dg_buffers is None:
                raise ValueError("match_faces requires the DG buffers")
            f1[:, 0] = dg_buffers[0][:, 0]
            f1[:, npts] = dg_buffers[0][:, npts]
            f2[:, :, 0] = dg_buffers[1][:, :, 0]
            f2[:, :, npts] = dg_buffers[1][:, :, npts]
        else:
            self._apply_surface(sflux, u, uext, f1, f2)
        return f1, f2

    def fv_buffers_with_bars(self, u, uext=None, *, match_faces=False,
                             dg_buffers=None, prepped=False):
        """First-order fluxes and bar states in one interface sweep.

        The FCT stage uses it whenever its bounds come from bar states.
        With the LLF solver the interface wavespeed is shared between
        flux and bar state; other solvers compute their flux alongside.
        """
        if self.fv_order != 1:
            raise ValueError("fused FV/bar sweep requires first-order FV")
        if uext is None:
            uext = self.exterior_states(u)
        mesh, eq = self.mesh, self.eq
        k = mesh.n_elements
        npts = self.ops.n_nodes
        nv = eq.n_vars
        key = self.fv_surface_flux
        if not hasattr(self, "_fused_kernels"):
            self._fused_kernels = {}
        if key not in self._fused_kernels:
            if key == "llf":
                self._fused_kernels[key] = kernels.make_fv1_llf_with_bars(
                    eq.flux_w, eq.max_speed_w)
            else:
                self._fused_kernels[key] = kernels.make_fv1_with_bars(
                    eq.surface_fluxes[key], eq.flux_w, eq.max_speed_w)
        if not prepped:
            self._prep(u, eq.params, self._wk)
        self._prep_ext(uext, eq.params, self._wext)
        f1, f2 = self._empty_buffers()
        bar1 = np.empty((k, npts + 1, npts, nv))
        bar2 = np.empty((k, npts, npts + 1, nv))
        lam1 = np.empty((k, npts + 1, npts))
        lam2 = np.empty((k, npts, npts + 1))
        self._fused_kernels[key](u, self._wk, uext, self._wext, mesh.n1,
                                 mesh.n2, eq.params, f1, f2, bar1, lam1,
                                 bar2, lam2)
        same_faces = (dg_buffers is not None
                      and self.fv_surface_flux == self.surface_flux)
        if match_faces or same_faces:
            if dg_buffers is None:
                raise ValueError("match_faces requires the DG buffers")
            f1[:, 0] = dg_buffers[0][:, 0]
            f1[:, npts] = dg_buffers[0][:, npts]
            f2[:, :, 0] = dg_buffers[1][:, :, 0]
            f2[:, :, npts] = dg_buffers[1][:, :, npts]
        else:
            self._apply_surface(self.fv_surface_flux, u, uext, f1, f2)
        return (f1, f2), (bar1, lam1, bar2, lam2)

    def rhs_from_buffers(self, f1, f2):
        w = self.ops.weights
        du = (f1[:, :-1] - f1[:, 1:]) / w[None, :, None, None]
        du += (f2[:, :, :-1] - f2[:, :, 1:]) / w[None, None, :, None]
        du /= self.mesh.jac[..., None]
        return du

    def dg_rhs(self, u, uext=None, **kw):
        f1, f2 = self.dg_flux_buffers(u, uext, **kw)
        return self.rhs_from_buffers(f1, f2)

    def fv_rhs(self, u, uext=None, **kw):
        f1, f2 = self.fv_flux_buffers(u, uext, **kw)
        return self.rhs_from_buffers(f1, f2)

    # time step ------------------------------------------------------------

    def cfl_time_step(self, u, cfl, uext=None):
        """CFL step from pairwise interface wavespeeds.

        The per-node directional bound is the max of the Riemann-problem
        wavespeeds over the node's incident interfaces (ghost states
        included). One-state nodal speeds under-resolve strong contrasts
        such as inflow fronts and near-vacuum corners, where the
        shock-corrected pair bound is decisively larger.
        """
        mesh, eq = self.mesh, self.eq
        if uext is None:
            uext = self.exterior_states(u)
        if not hasattr(self, "_iface_speed_kernel"):
            self._iface_speed_kernel = kernels.make_iface_speeds(eq.max_speed_w)
        k = mesh.n_elements
        npts = self.ops.n_nodes
        self._prep(u, eq.params, self._wk)
        self._prep_ext(uext, eq.params, self._wext)
        lam1 = np.empty((k, npts + 1, npts))
        lam2 = np.empty((k, npts, npts + 1))
        self._iface_speed_kernel(self._wk, self._wext, mesh.n1, mesh.n2,
                                 eq.params, lam1, lam2)
        l1 = np.maximum(lam1[:, :-1], lam1[:, 1:])
        l2 = np.maximum(lam2[:, :, :-1], lam2[:, :, 1:])
        w = self.ops.weights
        denom = l1 * self._m1 / w[None, :, None] + l2 * self._m2 / w[None, None, :]
        dt = cfl * float(np.min(mesh.jac / denom))
        if not dt > 0.0 or not np.isfinite(dt):
            raise FloatingPointError(f"nonpositive or invalid time step {dt}")
        return dt

    # bar states -----------------------------------------------------------

    def bar_states(self, u, uext=None, prepped=False):
        """Bar states and wavespeeds on every subcell interface."""
        if uext is None:
            uext = self.exterior_states(u)
        mesh, eq = self.mesh, self.eq
        k = mesh.n_elements
        npts = self.ops.n_nodes
        nv = eq.n_vars
        if not hasattr(self, "_bars_kernel"):
            self._bars_kernel = kernels.make_bar_states(eq.flux_w,
                                                        eq.max_speed_w)
        if not prepped:
            self._prep(u, eq.params, self._wk)
        self._prep_ext(uext, eq.params, self._wext)
        bar1 = np.empty((k, npts + 1, npts, nv))
        bar2 = np.empty((k, npts, npts + 1, nv))
        lam1 = np.empty((k, npts + 1, npts))
        lam2 = np.empty((k, npts, npts + 1))
        self._bars_kernel(u, self._wk, uext, self._wext, mesh.n1, mesh.n2,
                          eq.params, bar1, lam1, bar2, lam2)
        return bar1, lam1, bar2, lam2


def _check_admissible(state, eq):
    ok = eq.admissible_np(state) & np.isfinite(state).all(axis=-1)
    if not np.all(ok):
        e, i, j = np.argwhere(~ok)[0]
        raise ValueError(
            f"inadmissible state at element {e}, node ({i},{j}): "
            f"{eq.describe_state(state[e, i, j])}")


def dg_rhs(state, mesh, ops, eq, mode="split", volume_flux=None,
           surface_flux="llf", far_field=None):
    """Functional wrapper: high-order DG right-hand side."""
    _check_admissible(state, eq)
    semi = SemiDiscretization(mesh, eq, volume_mode=mode,
                              volume_flux=volume_flux,
                              surface_flux=surface_flux, far_field=far_field)
    return semi.dg_rhs(state)


def fv_rhs(state, mesh, ops, eq, solver="llf", order=1, far_field=None):
    """Functional wrapper: compatible subcell FV right-hand side."""
    _check_admissible(state, eq)
    semi = SemiDiscretization(mesh, eq, surface_flux=solver,
                              fv_order=order, fv_surface_flux=solver,
                              far_field=far_field)
    return semi.fv_rhs(state)
