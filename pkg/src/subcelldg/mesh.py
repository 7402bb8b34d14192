"""Curvilinear quadrilateral meshes with compatible subcell metric terms.

Meshes are structured grids of (N+1)x(N+1)-node quadrilateral elements.
Per element we store nodal physical coordinates, the mapping Jacobian J,
the contravariant metric vectors Ja1 = (y_eta, -x_eta) and
Ja2 = (-y_xi, x_xi), and the subcell interface normal vectors derived
from the SBP derivative matrix,

    n_(i,i+1)j = Ja1_0j + sum_{l<=i} sum_m Q_lm (Ja1)_mj,

which telescope to the face metric terms and satisfy the discrete
subcell metric identities node by node. Index s of the stored normal
arrays refers to the interface between nodes s-1 and s, so s = 0 and
s = N+1 are the element faces.

Element faces are numbered W=0 (xi1-), E=1 (xi1+), S=2 (xi2-), N=3 (xi2+).
Only conforming, identically-oriented interfaces are supported.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sbp import SbpOperatorSet, build_operators

__all__ = [
    "CurvedMesh",
    "MeshError",
    "BC_NONE",
    "BC_WALL",
    "BC_CHAR",
    "BC_DIRICHLET",
    "BC_NAMES",
    "compute_metrics",
    "compute_subcell_normals",
    "build_cartesian",
    "build_mapped",
    "build_bow_shock_mesh",
    "save_mesh",
    "load_mesh",
]

W, E, S, N = 0, 1, 2, 3

BC_NONE = 0
BC_WALL = 1
BC_CHAR = 2
BC_DIRICHLET = 3
BC_NAMES = {
    BC_NONE: "periodic",
    BC_WALL: "reflecting_wall",
    BC_CHAR: "characteristic_io",
    BC_DIRICHLET: "dirichlet_const",
}
BC_CODES = {v: k for k, v in BC_NAMES.items()}


class MeshError(ValueError):
    pass


def compute_metrics(x: np.ndarray, ops: SbpOperatorSet):
    """Collocation metric terms of nodal coordinates ``x`` (K, Np, Np, 2).

    Returns (jac, Ja1, Ja2). Raises :class:`MeshError` with the offending
    node location if the Jacobian is nonpositive anywhere.
    """
    d = ops.D
    x_xi = np.einsum("ia,kajc->kijc", d, x)
    x_eta = np.einsum("ja,kiac->kijc", d, x)
    jac = x_xi[..., 0] * x_eta[..., 1] - x_eta[..., 0] * x_xi[..., 1]
    if np.any(jac <= 0.0):
        e, i, j = np.unravel_index(np.argmin(jac), jac.shape)
        raise MeshError(
            f"nonpositive Jacobian {jac[e, i, j]:.3e} at element {e}, "
            f"node ({i},{j}), x = {tuple(x[e, i, j])}")
    ja1 = np.stack((x_eta[..., 1], -x_eta[..., 0]), axis=-1)
    ja2 = np.stack((-x_xi[..., 1], x_xi[..., 0]), axis=-1)
    return jac, ja1, ja2


def compute_subcell_normals(ja1: np.ndarray, ja2: np.ndarray, ops: SbpOperatorSet):
    """Subcell interface normals from volume metric terms.

    Returns (n1, n2) with shapes (K, N+2, Np, 2) and (K, Np, N+2, 2).
    The stored vector for interface (a, b) is oriented along +xi; the
    reverse orientation is its negation.
    """
    npts = ops.n_nodes
    k = ja1.shape[0]
    inner1 = np.einsum("lm,kmjc->kljc", ops.Q, ja1)
    inner2 = np.einsum("lm,kimc->kilc", ops.Q, ja2)
    # cumulative prefix sums along each reference direction
    n1 = np.empty((k, npts + 1, npts, 2))
    n1[:, 0] = ja1[:, 0]
    n1[:, 1:] = ja1[:, :1] + np.cumsum(inner1, axis=1)
    n2 = np.empty((k, npts, npts + 1, 2))
    n2[:, :, 0] = ja2[:, :, 0]
    n2[:, :, 1:] = ja2[:, :, :1] + np.cumsum(inner2, axis=2)
    return n1, n2


@dataclass
class CurvedMesh:
    """Structured collection of curvilinear elements with shared DOF layout.

    Elements are stored row-major over the (nx, ny) element grid,
    e = ey * nx + ex. ``neighbor[e, side]`` is -1 on a physical boundary;
    periodic connections are resolved into neighbor indices and carry no
    boundary tag.
    """

    ops: SbpOperatorSet
    nx: int
    ny: int
    x: np.ndarray            # (K, Np, Np, 2)
    jac: np.ndarray          # (K, Np, Np)
    ja1: np.ndarray          # (K, Np, Np, 2)
    ja2: np.ndarray          # (K, Np, Np, 2)
    n1: np.ndarray           # (K, N+2, Np, 2)
    n2: np.ndarray           # (K, Np, N+2, 2)
    neighbor: np.ndarray     # (K, 4) int32
    bc: np.ndarray           # (K, 4) int8 tag codes, BC_NONE where interior
    faces0: np.ndarray       # (F0, 2) int32 [eL, eR], eL east face to eR west
    faces1: np.ndarray       # (F1, 2) int32 [eL, eR], eL north face to eR south
    bfaces: np.ndarray       # (B, 3) int32 [e, side, tag]
    periodic: tuple = (False, False)
    side_tags: dict = field(default_factory=dict)
    n_wrap0: int = 0         # periodic wrap faces at the tail of faces0
    n_wrap1: int = 0

    @property
    def n_elements(self) -> int:
        return self.x.shape[0]

    @property
    def degree(self) -> int:
        return self.ops.degree

    def volume_weights(self) -> np.ndarray:
        """J_ij w_i w_j per node, shape (K, Np, Np)."""
        w = self.ops.weights
        return self.jac * w[None, :, None] * w[None, None, :]

    def total_volume(self) -> float:
        return float(np.sum(self.volume_weights()))

    def metric_identity_residual(self) -> float:
        w = self.ops.weights
        r = (self.n1[:, :-1] - self.n1[:, 1:]) / w[None, :, None, None] \
            + (self.n2[:, :, :-1] - self.n2[:, :, 1:]) / w[None, None, :, None]
        return float(np.max(np.abs(r)))

    def face_normal_residual(self) -> float:
        """Max deviation of face normals from the face metric terms."""
        r1 = np.max(np.abs(self.n1[:, 0] - self.ja1[:, 0]))
        r2 = np.max(np.abs(self.n1[:, -1] - self.ja1[:, -1]))
        r3 = np.max(np.abs(self.n2[:, :, 0] - self.ja2[:, :, 0]))
        r4 = np.max(np.abs(self.n2[:, :, -1] - self.ja2[:, :, -1]))
        return float(max(r1, r2, r3, r4))

    def conforming_residual(self) -> float:
        """Max coordinate mismatch across physically shared (non-wrap) faces."""
        res = 0.0
        f0 = self.faces0[: len(self.faces0) - self.n_wrap0]
        f1 = self.faces1[: len(self.faces1) - self.n_wrap1]
        if len(f0):
            eL, eR = f0[:, 0], f0[:, 1]
            res = max(res, float(np.max(np.abs(self.x[eL, -1] - self.x[eR, 0]))))
        if len(f1):
            eL, eR = f1[:, 0], f1[:, 1]
            res = max(res, float(np.max(np.abs(self.x[eL, :, -1] - self.x[eR, :, 0]))))
        return res

    def watertight_residual(self) -> float:
        """Max mismatch of outward face normals across shared faces.

        The outward normal of the east face equals minus the neighbor's
        outward west normal exactly when the stored metric terms agree.
        """
        res = 0.0
        f0 = self.faces0[: len(self.faces0) - self.n_wrap0]
        f1 = self.faces1[: len(self.faces1) - self.n_wrap1]
        if len(f0):
            eL, eR = f0[:, 0], f0[:, 1]
            res = max(res, float(np.max(np.abs(self.ja1[eL, -1] - self.ja1[eR, 0]))))
        if len(f1):
            eL, eR = f1[:, 0], f1[:, 1]
            res = max(res, float(np.max(np.abs(self.ja2[eL, :, -1] - self.ja2[eR, :, 0]))))
        return res


def _structured_connectivity(nx, ny, periodic, tags):
    """Neighbor table, unique face lists and tagged boundary faces."""
    k = nx * ny
    eid = np.arange(k, dtype=np.int32).reshape(ny, nx)  # [ey, ex]
    neighbor = np.full((k, 4), -1, dtype=np.int32)
    bc = np.zeros((k, 4), dtype=np.int8)
    per_x, per_y = periodic

    neighbor[eid[:, 1:].ravel(), W] = eid[:, :-1].ravel()
    neighbor[eid[:, :-1].ravel(), E] = eid[:, 1:].ravel()
    neighbor[eid[1:, :].ravel(), S] = eid[:-1, :].ravel()
    neighbor[eid[:-1, :].ravel(), N] = eid[1:, :].ravel()

    faces0 = [np.stack([eid[:, :-1].ravel(), eid[:, 1:].ravel()], axis=1)]
    faces1 = [np.stack([eid[:-1, :].ravel(), eid[1:, :].ravel()], axis=1)]
    bfaces = []
    n_wrap0 = n_wrap1 = 0

    if per_x:
        neighbor[eid[:, 0], W] = eid[:, -1]
        neighbor[eid[:, -1], E] = eid[:, 0]
        faces0.append(np.stack([eid[:, -1], eid[:, 0]], axis=1))
        n_wrap0 = ny
    else:
        code_w, code_e = BC_CODES[tags["west"]], BC_CODES[tags["east"]]
        bc[eid[:, 0], W] = code_w
        bc[eid[:, -1], E] = code_e
        bfaces.append(np.stack([eid[:, 0], np.full(ny, W), np.full(ny, code_w)], axis=1))
        bfaces.append(np.stack([eid[:, -1], np.full(ny, E), np.full(ny, code_e)], axis=1))
    if per_y:
        neighbor[eid[0, :], S] = eid[-1, :]
        neighbor[eid[-1, :], N] = eid[0, :]
        faces1.append(np.stack([eid[-1, :], eid[0, :]], axis=1))
        n_wrap1 = nx
    else:
        code_s, code_n = BC_CODES[tags["south"]], BC_CODES[tags["north"]]
        bc[eid[0, :], S] = code_s
        bc[eid[-1, :], N] = code_n
        bfaces.append(np.stack([eid[0, :], np.full(nx, S), np.full(nx, code_s)], axis=1))
        bfaces.append(np.stack([eid[-1, :], np.full(nx, N), np.full(nx, code_n)], axis=1))

    faces0 = np.concatenate(faces0).astype(np.int32) if faces0 else np.zeros((0, 2), np.int32)
    faces1 = np.concatenate(faces1).astype(np.int32) if faces1 else np.zeros((0, 2), np.int32)
    bfaces = (np.concatenate(bfaces).astype(np.int32)
              if bfaces else np.zeros((0, 3), np.int32))
    return neighbor, bc, faces0, faces1, bfaces, n_wrap0, n_wrap1


def _mesh_from_coords(x, nx, ny, ops, periodic, tags):
    jac, ja1, ja2 = compute_metrics(x, ops)
    n1, n2 = compute_subcell_normals(ja1, ja2, ops)
    neighbor, bc, faces0, faces1, bfaces, n_wrap0, n_wrap1 = \
        _structured_connectivity(nx, ny, periodic, tags)
    return CurvedMesh(ops=ops, nx=nx, ny=ny, x=x, jac=jac, ja1=ja1, ja2=ja2,
                      n1=n1, n2=n2, neighbor=neighbor, bc=bc,
                      faces0=faces0, faces1=faces1, bfaces=bfaces,
                      periodic=tuple(periodic), side_tags=dict(tags),
                      n_wrap0=n_wrap0, n_wrap1=n_wrap1)


def _reference_grid(nx, ny, ops):
    """Global reference coordinates in [0,1]^2 at every element node.

    Shared face nodes evaluate to bitwise-identical reference points from
    both sides, which keeps the built-in meshes conforming to roundoff.
    """
    npts = ops.n_nodes
    frac = 0.5 * (ops.nodes + 1.0)               # exact 0 and 1 endpoints
    ex = np.arange(nx)[None, :, None, None, None]
    ey = np.arange(ny)[:, None, None, None, None]
    xg = (ex + frac[None, None, :, None, None]) / nx
    yg = (ey + frac[None, None, None, :, None]) / ny
    xg = np.broadcast_to(xg, (ny, nx, npts, npts, 1)).reshape(-1, npts, npts)
    yg = np.broadcast_to(yg, (ny, nx, npts, npts, 1)).reshape(-1, npts, npts)
    return xg, yg


DEFAULT_TAGS = {"west": "dirichlet_const", "east": "dirichlet_const",
                "south": "dirichlet_const", "north": "dirichlet_const"}


def build_cartesian(nx, ny, bounds, ops, periodic=(True, True), tags=None):
    """Uniform Cartesian mesh on ``bounds = (x0, x1, y0, y1)``."""
    if nx < 1 or ny < 1:
        raise MeshError(f"need at least one element per direction, got {nx}x{ny}")
    x0, x1, y0, y1 = map(float, bounds)
    if not (x1 > x0 and y1 > y0):
        raise MeshError(f"degenerate rectangle {bounds}")
    tags = {**DEFAULT_TAGS, **(tags or {})}
    xg, yg = _reference_grid(nx, ny, ops)
    x = np.empty(xg.shape + (2,))
    x[..., 0] = x0 + (x1 - x0) * xg
    x[..., 1] = y0 + (y1 - y0) * yg
    return _mesh_from_coords(x, nx, ny, ops, periodic, tags)


def build_mapped(nx, ny, mapping, ops, periodic=(False, False), tags=None):
    """Curvilinear mesh from a smooth map of the unit square.

    ``mapping(X, Y)`` takes arrays of reference coordinates in [0,1] and
    returns physical (x, y) arrays. The map must have positive Jacobian.
    """
    if nx < 1 or ny < 1:
        raise MeshError(f"need at least one element per direction, got {nx}x{ny}")
    tags = {**DEFAULT_TAGS, **(tags or {})}
    xg, yg = _reference_grid(nx, ny, ops)
    px, py = mapping(xg, yg)
    x = np.stack((px, py), axis=-1).astype(float)
    return _mesh_from_coords(x, nx, ny, ops, periodic, tags)


# Blunt-body geometry: inflow arc of radius 5.9 about (3.85, 0); body made
# of a unit flat front on the x=0 line plus two quarter circles of radius
# 0.5 rounding to the shoulders at (0.5, +/-1).

_ARC_CENTER = (3.85, 0.0)
_ARC_RADIUS = 5.9
_BODY_R = 0.5
_ARC_HALF_SPAN = np.arcsin(2.6 / 5.9)


def bow_shock_arc(s):
    """Inflow arc, s in [0,1] from bottom to top; s=0.5 is (-2.05, 0)."""
    phi = _ARC_HALF_SPAN * (2.0 * np.asarray(s, dtype=float) - 1.0)
    return _ARC_CENTER[0] - _ARC_RADIUS * np.cos(phi), _ARC_RADIUS * np.sin(phi)


def bow_shock_body(s):
    """Blunt-body curve by arc-length fraction s in [0,1], bottom to top."""
    s = np.asarray(s, dtype=float)
    quarter = 0.5 * np.pi * _BODY_R
    total = 2.0 * quarter + 1.0
    a = s * total
    x = np.empty_like(a)
    y = np.empty_like(a)
    lo = a <= quarter
    hi = a >= quarter + 1.0
    mid = ~(lo | hi)
    th = 1.5 * np.pi - a[lo] / _BODY_R
    x[lo] = 0.5 + _BODY_R * np.cos(th)
    y[lo] = -0.5 + _BODY_R * np.sin(th)
    x[mid] = 0.0
    y[mid] = -0.5 + (a[mid] - quarter)
    th = np.pi - (a[hi] - quarter - 1.0) / _BODY_R
    x[hi] = 0.5 + _BODY_R * np.cos(th)
    y[hi] = 0.5 + _BODY_R * np.sin(th)
    return x, y


def build_bow_shock_mesh(n_radial, n_circ, ops, tags=None):
    """Ruled mesh between the inflow arc and the blunt body.

    xi1 runs from the arc (characteristic inflow/outflow) to the body
    (reflecting wall); xi2 runs bottom to top with characteristic ends.
    """
    if n_radial < 4 or n_circ < 12:
        raise MeshError(
            f"resolution below the coarse preset (4x12): {n_radial}x{n_circ}")

    def mapping(X, Y):
        ax, ay = bow_shock_arc(Y)
        bx, by = bow_shock_body(Y)
        return (1.0 - X) * ax + X * bx, (1.0 - X) * ay + X * by

    if tags is None:
        tags = {"west": "characteristic_io", "east": "reflecting_wall",
                "south": "characteristic_io", "north": "characteristic_io"}
    return build_mapped(n_radial, n_circ, mapping, ops,
                        periodic=(False, False), tags=tags)


def save_mesh(mesh: CurvedMesh, path):
    """Native text format: header `nx ny N`, boundary tag line, then per
    element the nodal coordinates row-major (i outer, j inner)."""
    with open(path, "w") as fh:
        fh.write(f"{mesh.nx} {mesh.ny} {mesh.degree}\n")
        sides = []
        for key, axis in (("west", 0), ("east", 0), ("south", 1), ("north", 1)):
            sides.append("periodic" if mesh.periodic[axis]
                         else mesh.side_tags.get(key, "dirichlet_const"))
        fh.write(" ".join(sides) + "\n")
        for e in range(mesh.n_elements):
            for i in range(mesh.ops.n_nodes):
                for j in range(mesh.ops.n_nodes):
                    fh.write(f"{mesh.x[e, i, j, 0]:.17g} {mesh.x[e, i, j, 1]:.17g}\n")


def load_mesh(path, ops: SbpOperatorSet | None = None) -> CurvedMesh:
    with open(path) as fh:
        nx, ny, deg = (int(tok) for tok in fh.readline().split())
        sides = fh.readline().split()
        if len(sides) != 4:
            raise MeshError(f"bad boundary tag line in {path}")
        coords = np.loadtxt(fh)
    if ops is None:
        ops = build_operators(deg)
    elif ops.degree != deg:
        raise MeshError(f"operator degree {ops.degree} != mesh degree {deg}")
    npts = deg + 1
    k = nx * ny
    if coords.shape != (k * npts * npts, 2):
        raise MeshError(f"expected {k * npts * npts} coordinate rows in {path}, "
                        f"got {coords.shape[0]}")
    x = coords.reshape(k, npts, npts, 2)
    periodic = (sides[0] == "periodic", sides[2] == "periodic")
    if (sides[1] == "periodic") != periodic[0] or (sides[3] == "periodic") != periodic[1]:
        raise MeshError("periodic tags must pair up on opposite sides")
    tags = dict(DEFAULT_TAGS)
    for name, tag in zip(("west", "east", "south", "north"), sides):
        if tag != "periodic":
            tags[name] = tag
    return _mesh_from_coords(x, nx, ny, ops, periodic, tags)
