"""Post-hoc figure generation for subcelldg run outputs."""

__version__ = "0.1.0"

from .io import Snapshot, read_diag, read_snapshot
from .phash import average_hash, hamming
from .plots import PlotJob, plot

__all__ = ["Snapshot", "read_diag", "read_snapshot", "average_hash",
           "hamming", "PlotJob", "plot", "__version__"]
