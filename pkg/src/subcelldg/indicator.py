"""A priori troubled-cell indicator from modal energy.

The indicator quantity is transformed to the hierarchical Legendre basis
per element; the energy fraction of the highest (and second highest)
modes drives a logistic blending coefficient with fixed sharpness
s = 9.21024 and the degree-dependent threshold T(N) = 0.5 * 10^(-1.8 (N+1)^0.25).
In 2D the "highest mode" energy sums all coefficients with
max(i, j) = N against the total; the second ratio repeats this on the
degree-(N-1) sub-tensor, and reduces to the 1D formula for fields that
vary in a single reference direction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sbp import SbpOperatorSet, modal_transform_2d

__all__ = ["IndicatorConfig", "threshold", "modal_energy", "logistic_alpha",
           "alpha_from_energy", "indicator_field", "apriori_alphas"]

SHARPNESS = 9.21024


@dataclass
class IndicatorConfig:
    quantity: str = "auto"       # auto | u | rho | p | rho_p
    alpha_max: float = 0.5
    alpha_floor: float = 0.001
    sharpness: float = SHARPNESS

    def __post_init__(self):
        if not 0.0 < self.alpha_max <= 1.0:
            raise ValueError(f"alpha_max must be in (0,1], got {self.alpha_max}")
        if self.sharpness <= 0.0:
            raise ValueError(f"sharpness must be positive, got {self.sharpness}")


def threshold(n: int) -> float:
    return 0.5 * 10.0 ** (-1.8 * (n + 1.0) ** 0.25)


def modal_energy(field: np.ndarray, ops: SbpOperatorSet) -> np.ndarray:
    """Highest-modes energy fraction per element.

    ``field`` has shape (..., N+1, N+1); an all-zero element returns 0.
    """
    n = ops.degree
    m2 = modal_transform_2d(field, ops) ** 2
    total = m2.sum(axis=(-2, -1))
    top = total - m2[..., :n, :n].sum(axis=(-2, -1))
    with np.errstate(invalid="ignore", divide="ignore"):
        e_hi = np.where(total > 0.0, top / np.maximum(total, 1e-300), 0.0)
    if n >= 2:
        sub = m2[..., :n, :n]
        sub_total = sub.sum(axis=(-2, -1))
        sub_top = sub_total - sub[..., : n - 1, : n - 1].sum(axis=(-2, -1))
        with np.errstate(invalid="ignore", divide="ignore"):
            e_lo = np.where(sub_total > 0.0,
                            sub_top / np.maximum(sub_total, 1e-300), 0.0)
        return np.maximum(e_hi, e_lo)
    return e_hi


def logistic_alpha(energy, n: int, sharpness: float = SHARPNESS):
    """Raw logistic coefficient, before floor snapping and clamping."""
    t = threshold(n)
    return 1.0 / (1.0 + np.exp(-sharpness / t * (np.asarray(energy, dtype=float) - t)))


def alpha_from_energy(energy, config: IndicatorConfig, n: int):
    """Logistic value, snapped to zero below the floor, clamped to alpha_max."""
    a = logistic_alpha(energy, n, config.sharpness)
    a = np.where(a < config.alpha_floor, 0.0, a)
    return np.minimum(a, config.alpha_max)


def indicator_field(u, eq, config: IndicatorConfig):
    quantity = config.quantity
    if quantity == "auto":
        quantity = "u" if eq.kind == "scalar" else "rho_p"
    if quantity == "u":
        return u[..., 0]
    if quantity == "rho":
        return u[..., 0]
    if quantity == "p":
        return eq.pressure(u)
    if quantity == "rho_p":
        return u[..., 0] * eq.pressure(u)
    raise ValueError(f"unknown indicator quantity {quantity!r}")


def apriori_alphas(u, eq, ops: SbpOperatorSet, config: IndicatorConfig):
    """Element blending coefficients from the current state."""
    energy = modal_energy(indicator_field(u, eq, config), ops)
    return alpha_from_energy(energy, config, ops.degree)
