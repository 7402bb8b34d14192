"""Parsers for the solver's run outputs.

Accepts exactly the documented formats: legacy-VTK structured-grid text
snapshots (snap_*.vtk) and the columnar diag.csv time series. Schema
drift fails loudly with the offending file line.
"""
from __future__ import annotations

import csv
import glob
import os

import numpy as np

__all__ = ["Snapshot", "read_snapshot", "read_diag", "list_snapshots"]


class Snapshot:
    """Structured point grid plus named nodal scalar fields."""

    def __init__(self, dims, points, fields):
        self.dims = dims                       # (nx, ny, 1)
        self.points = points                   # (n, 3)
        self.fields = fields                   # name -> flat array

    def grid(self):
        nx, ny = self.dims[0], self.dims[1]
        x = self.points[:, 0].reshape(ny, nx)
        y = self.points[:, 1].reshape(ny, nx)
        return x, y

    def field2d(self, name):
        if name not in self.fields:
            raise KeyError(
                f"no field {name!r} in snapshot (available: "
                f"{sorted(self.fields)})")
        nx, ny = self.dims[0], self.dims[1]
        return self.fields[name].reshape(ny, nx)


def _fail(path, lineno, message, line):
    raise ValueError(f"{path}:{lineno + 1}: {message}: {line!r}")


def read_snapshot(path) -> Snapshot:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("# vtk DataFile"):
        _fail(path, 0, "missing VTK header", lines[0] if lines else "")
    if lines[2].strip() != "ASCII":
        _fail(path, 2, "expected ASCII dataset", lines[2])
    if lines[3].strip() != "DATASET STRUCTURED_GRID":
        _fail(path, 3, "expected DATASET STRUCTURED_GRID", lines[3])
    i = 4
    if not lines[i].startswith("DIMENSIONS"):
        _fail(path, i, "expected DIMENSIONS", lines[i])
    dims = tuple(int(t) for t in lines[i].split()[1:])
    i += 1
    if not lines[i].startswith("POINTS"):
        _fail(path, i, "expected POINTS", lines[i])
    n = int(lines[i].split()[1])
    if n != dims[0] * dims[1] * dims[2]:
        _fail(path, i, "point count does not match DIMENSIONS", lines[i])
    points = np.empty((n, 3))
    for k in range(n):
        i += 1
        try:
            points[k] = [float(t) for t in lines[i].split()]
        except (ValueError, IndexError):
            _fail(path, i, "bad point row", lines[i])
    i += 1
    if not lines[i].startswith("POINT_DATA"):
        _fail(path, i, "expected POINT_DATA", lines[i])
    i += 1
    fields = {}
    while i < len(lines):
        if not lines[i].strip():
            i += 1
            continue
        if not lines[i].startswith("SCALARS"):
            _fail(path, i, "expected SCALARS block", lines[i])
        name = lines[i].split()[1]
        i += 1
        if not lines[i].startswith("LOOKUP_TABLE"):
            _fail(path, i, "expected LOOKUP_TABLE", lines[i])
        vals = np.empty(n)
        for k in range(n):
            i += 1
            try:
                vals[k] = float(lines[i])
            except (ValueError, IndexError):
                _fail(path, i, f"bad value in field {name!r}", lines[i])
        fields[name] = vals
        i += 1
    return Snapshot(dims, points, fields)


DIAG_PREFIX = ["t", "dt", "max_alpha", "mean_alpha", "entropy",
               "min_rho", "min_p"]


def read_diag(path):
    """diag.csv -> dict of named columns (numpy arrays)."""
    with open(path) as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: empty diagnostics file")
    header = rows[0]
    if header[: len(DIAG_PREFIX)] != DIAG_PREFIX:
        raise ValueError(f"{path}:1: unexpected diagnostics header: {header!r}")
    data = {name: np.empty(len(rows) - 1) for name in header}
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValueError(f"{path}:{r}: row width {len(row)} != "
                             f"header width {len(header)}")
        for name, tok in zip(header, row):
            try:
                data[name][r - 2] = float(tok)
            except ValueError:
                raise ValueError(f"{path}:{r}: bad number {tok!r} "
                                 f"in column {name}") from None
    return data


def list_snapshots(rundir):
    snaps = sorted(glob.glob(os.path.join(rundir, "snap_*.vtk")))
    if not snaps:
        raise FileNotFoundError(f"no snap_*.vtk files in {rundir}")
    return snaps
