"""Legacy VTK structured-grid text snapshots (write and read).

The global point grid stacks the per-element LGL nodes of the structured
element grid: point (gi, gj) with gi = ex (N+1) + i, gj = ey (N+1) + j,
listed x-fastest. Duplicate points on shared faces are intentional.
Numbers carry 17 significant digits so a read-back reproduces the field
bit for bit.
"""
from __future__ import annotations

import numpy as np

__all__ = ["write_snapshot", "read_snapshot"]


def _global_grid(mesh, field):
    ny, nx = mesh.ny, mesh.nx
    npts = mesh.ops.n_nodes
    arr = field.reshape(ny, nx, npts, npts)
    return arr.transpose(0, 3, 1, 2).reshape(ny * npts, nx * npts)


def write_snapshot(path, mesh, fields: dict, title="snapshot"):
    """Write nodal scalar fields (each shaped (K, Np, Np)) as POINT_DATA."""
    npts = mesh.ops.n_nodes
    nxg = mesh.nx * npts
    nyg = mesh.ny * npts
    total = nxg * nyg
    gx = _global_grid(mesh, mesh.x[..., 0]).ravel()
    gy = _global_grid(mesh, mesh.x[..., 1]).ravel()
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(title.replace("\n", " ") + "\n")
        fh.write("ASCII\n")
        fh.write("DATASET STRUCTURED_GRID\n")
        fh.write(f"DIMENSIONS {nxg} {nyg} 1\n")
        fh.write(f"POINTS {total} double\n")
        for px, py in zip(gx, gy):
            fh.write(f"{px:.17g} {py:.17g} 0\n")
        fh.write(f"POINT_DATA {total}\n")
        for name, field in fields.items():
            if field.shape != mesh.jac.shape:
                raise ValueError(f"field {name!r} has shape {field.shape}, "
                                 f"expected {mesh.jac.shape}")
            fh.write(f"SCALARS {name} double 1\n")
            fh.write("LOOKUP_TABLE default\n")
            for val in _global_grid(mesh, field).ravel():
                fh.write(f"{val:.17g}\n")


def read_snapshot(path):
    """Parse a snapshot written by :func:`write_snapshot`.

    Returns (dims, points, fields) with points shaped (n, 3) and each
    field a flat array in point order. Raises ValueError with the
    offending line on schema drift.
    """
    dims = None
    points = None
    fields = {}
    with open(path) as fh:
        lines = fh.read().splitlines()
    i = 0

    def expect(predicate, message):
        if not predicate:
            raise ValueError(f"{path}:{i + 1}: {message}: {lines[i]!r}")

    expect(lines[0].startswith("# vtk DataFile"), "missing VTK header")
    expect(lines[2].strip() == "ASCII", "expected ASCII dataset")
    expect(lines[3].strip() == "DATASET STRUCTURED_GRID",
           "expected STRUCTURED_GRID")
    i = 4
    expect(lines[i].startswith("DIMENSIONS"), "expected DIMENSIONS")
    dims = tuple(int(t) for t in lines[i].split()[1:])
    i += 1
    expect(lines[i].startswith("POINTS"), "expected POINTS")
    n = int(lines[i].split()[1])
    pts = np.empty((n, 3))
    for k in range(n):
        i += 1
        pts[k] = [float(t) for t in lines[i].split()]
    points = pts
    i += 1
    expect(lines[i].startswith("POINT_DATA"), "expected POINT_DATA")
    i += 1
    while i < len(lines):
        if not lines[i].strip():
            i += 1
            continue
        expect(lines[i].startswith("SCALARS"), "expected SCALARS block")
        name = lines[i].split()[1]
        i += 1
        expect(lines[i].startswith("LOOKUP_TABLE"), "expected LOOKUP_TABLE")
        vals = np.empty(n)
        for k in range(n):
            i += 1
            vals[k] = float(lines[i])
        fields[name] = vals
        i += 1
    return dims, points, fields
