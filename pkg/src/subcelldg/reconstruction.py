"""Second-order subcell reconstruction on primitive variables.

Reference implementation of the minmod-limited line reconstruction the
FV kernels use: slopes from divided differences on the LGL node
spacing, zero slope in the boundary subcells, values extrapolated to
the cumulative-weight interface positions. Exposed separately so its
properties (linear reproduction, range boundedness, TVD slopes) can be
tested directly against the data.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sbp import SbpOperatorSet

__all__ = ["ReconstructionConfig", "minmod_slopes", "minmod_reconstruct"]


@dataclass
class ReconstructionConfig:
    order: int = 1             # 1 | 2
    variables: str = "primitive"
    limiter: str = "minmod"

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ValueError(f"order must be 1 or 2, got {self.order}")
        if self.limiter != "minmod":
            raise ValueError(f"only the minmod limiter is available, "
                             f"got {self.limiter!r}")


def minmod_slopes(values: np.ndarray, ops: SbpOperatorSet) -> np.ndarray:
    """Limited slopes per subcell for a row of N+1 values (last axis)."""
    values = np.asarray(values, dtype=float)
    xi = ops.nodes
    if values.shape[-1] != ops.n_nodes:
        raise ValueError(f"expected rows of {ops.n_nodes} values, "
                         f"got {values.shape[-1]}")
    fwd = np.diff(values, axis=-1) / np.diff(xi)
    slopes = np.zeros_like(values)
    a, b = fwd[..., 1:], fwd[..., :-1]
    same = (a > 0) & (b > 0) | ((a < 0) & (b < 0))
    slopes[..., 1:-1] = np.where(
        same, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)
    return slopes


def minmod_reconstruct(values: np.ndarray, ops: SbpOperatorSet):
    """Left/right states straddling each interior subcell interface.

    Returns (left, right), each shaped like ``values`` with the last
    axis reduced to the N interior interfaces: ``left[..., k]`` is the
    value just below interface k+1 (between subcells k and k+1).
    """
    values = np.asarray(values, dtype=float)
    xi = ops.nodes
    pos = ops.iface_pos
    slopes = minmod_slopes(values, ops)
    left = values[..., :-1] + slopes[..., :-1] * (pos[1:-1] - xi[:-1])
    right = values[..., 1:] + slopes[..., 1:] * (pos[1:-1] - xi[1:])
    return left, right
