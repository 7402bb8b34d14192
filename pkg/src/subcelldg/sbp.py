"""Legendre-Gauss-Lobatto quadrature and diagonal-norm SBP operators.

All reference-space machinery lives here: the LGL nodes and weights on
[-1, 1], the SBP derivative matrix Q (with Q + Q^T = B), the volume
matrices S = 2Q - B and Sbar = Q - B used by the split-form and standard
volume kernels, and the nodal <-> modal Legendre transforms used by the
troubled-cell indicator.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SbpOperatorSet",
    "build_operators",
    "modal_transform",
    "nodal_transform",
    "modal_transform_2d",
    "legendre",
]

MAX_DEGREE = 15


def legendre(n: int, x):
    """Evaluate P_n and P_n' by the three-term recurrence.

    Works on scalars or arrays. Returns (P_n(x), P_n'(x)).
    """
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev, np.zeros_like(x)
    p = x.copy()
    dp_prev = np.zeros_like(x)
    dp = np.ones_like(x)
    for k in range(2, n + 1):
        p_next = ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
        dp_next = dp_prev + (2 * k - 1) * p
        p_prev, p = p, p_next
        dp_prev, dp = dp, dp_next
    return p, dp


def _lgl_nodes_weights(n: int):
    """LGL nodes (roots of (1 - x^2) P_n') and weights 2 / (n(n+1) P_n^2)."""
    if n == 1:
        return np.array([-1.0, 1.0]), np.array([1.0, 1.0])
    # Chebyshev-Gauss-Lobatto initial guesses for the interior roots of P_n'.
    nodes = np.empty(n + 1)
    nodes[0], nodes[-1] = -1.0, 1.0
    x = -np.cos(np.pi * np.arange(1, n) / n)
    for _ in range(100):
        p, dp = legendre(n, x)
        # (1 - x^2) P_n'' = 2 x P_n' - n(n+1) P_n
        d2p = (2.0 * x * dp - n * (n + 1) * p) / (1.0 - x * x)
        dx = dp / d2p
        x -= dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    # Enforce the +/- symmetry of the node set exactly.
    x = 0.5 * (x - x[::-1])
    nodes[1:-1] = x
    p, _ = legendre(n, nodes)
    weights = 2.0 / (n * (n + 1) * p * p)
    return nodes, weights


def _diff_matrix(nodes: np.ndarray) -> np.ndarray:
    """Lagrange differentiation matrix via barycentric weights."""
    m = len(nodes)
    dx = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(dx, 1.0)
    b = 1.0 / np.prod(dx, axis=1)
    d = (b[None, :] / b[:, None]) / dx
    np.fill_diagonal(d, 0.0)
    np.fill_diagonal(d, -np.sum(d, axis=1))
    return d


@dataclass(frozen=True)
class SbpOperatorSet:
    """Reference operators for one polynomial degree.

    Attributes
    ----------
    degree : polynomial degree N
    nodes, weights : LGL points and quadrature weights on [-1, 1]
    Q : SBP derivative matrix, Q_ij = w_i l_j'(xi_i)
    B : boundary evaluation matrix diag(-1, 0, ..., 0, 1)
    S, Sbar : split-form (2Q - B) and standard (Q - B) volume matrices
    D : nodal differentiation matrix diag(w)^-1 Q
    vand, vand_inv : orthonormal-Legendre Vandermonde and its inverse
    iface_pos : cumulative-weight subcell interface positions (N+2 values)
    """

    degree: int
    nodes: np.ndarray
    weights: np.ndarray
    Q: np.ndarray
    B: np.ndarray
    S: np.ndarray
    Sbar: np.ndarray
    D: np.ndarray
    vand: np.ndarray
    vand_inv: np.ndarray
    iface_pos: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.degree + 1

    def __post_init__(self):
        for arr in (self.nodes, self.weights, self.Q, self.B, self.S,
                    self.Sbar, self.D, self.vand, self.vand_inv,
                    self.iface_pos):
            arr.setflags(write=False)


def build_operators(N: int) -> SbpOperatorSet:
    """Construct the LGL/SBP operator set for degree ``N``.

    Degrees outside [1, 15] are rejected: N = 0 has no interior subcell
    structure and the node solve is not validated beyond 15.
    """
    if not isinstance(N, (int, np.integer)):
        raise TypeError(f"polynomial degree must be an integer, got {N!r}")
    if N < 1 or N > MAX_DEGREE:
        raise ValueError(f"polynomial degree must be in [1, {MAX_DEGREE}], got {N}")

    nodes, weights = _lgl_nodes_weights(N)
    D = _diff_matrix(nodes)
    Q = weights[:, None] * D
    B = np.zeros((N + 1, N + 1))
    B[0, 0], B[-1, -1] = -1.0, 1.0

    # Orthonormal Legendre Vandermonde: vand[i, n] = sqrt(n + 1/2) P_n(xi_i).
    vand = np.empty((N + 1, N + 1))
    for n in range(N + 1):
        p, _ = legendre(n, nodes)
        vand[:, n] = np.sqrt(n + 0.5) * p
    vand_inv = np.linalg.inv(vand)

    iface_pos = np.concatenate(([-1.0], -1.0 + np.cumsum(weights)))
    iface_pos[-1] = 1.0

    return SbpOperatorSet(
        degree=N,
        nodes=nodes,
        weights=weights,
        Q=Q,
        B=B,
        S=2.0 * Q - B,
        Sbar=Q - B,
        D=D,
        vand=vand,
        vand_inv=vand_inv,
        iface_pos=iface_pos,
    )


def modal_transform(nodal: np.ndarray, ops: SbpOperatorSet) -> np.ndarray:
    """Nodal values at the LGL points -> orthonormal Legendre coefficients."""
    nodal = np.asarray(nodal, dtype=float)
    if nodal.shape[-1] != ops.n_nodes:
        raise ValueError(
            f"expected last axis of length {ops.n_nodes}, got {nodal.shape[-1]}")
    return nodal @ ops.vand_inv.T


def nodal_transform(modal: np.ndarray, ops: SbpOperatorSet) -> np.ndarray:
    """Inverse of :func:`modal_transform`."""
    modal = np.asarray(modal, dtype=float)
    if modal.shape[-1] != ops.n_nodes:
        raise ValueError(
            f"expected last axis of length {ops.n_nodes}, got {modal.shape[-1]}")
    return modal @ ops.vand.T


def modal_transform_2d(field: np.ndarray, ops: SbpOperatorSet) -> np.ndarray:
    """Tensor-product modal transform of (..., N+1, N+1) nodal fields."""
    field = np.asarray(field, dtype=float)
    m = np.einsum("ai,...ij->...aj", ops.vand_inv, field)
    return np.einsum("bj,...aj->...ab", ops.vand_inv, m)
