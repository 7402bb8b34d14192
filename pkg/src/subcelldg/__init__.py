"""2D nodal DG spectral element solver with subcell FV convex limiting."""

__version__ = "0.1.0"

from . import blending, equations, fct, indicator, mesh, sbp, semidisc, stepping

__all__ = ["blending", "equations", "fct", "indicator", "mesh", "sbp",
           "semidisc", "stepping", "__version__"]
