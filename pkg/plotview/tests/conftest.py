import subprocess
import sys

import numpy as np
import pytest


def write_fixture_run(rundir, nx=6, ny=6, constant=None):
    """Hand-written run directory in the documented formats."""
    rundir.mkdir(parents=True, exist_ok=True)
    n = nx * ny
    xs = np.linspace(0.0, 1.0, nx)
    ys = np.linspace(0.0, 1.0, ny)
    with open(rundir / "snap_0000.vtk", "w") as fh:
        fh.write("# vtk DataFile Version 3.0\nfixture t=0\nASCII\n")
        fh.write("DATASET STRUCTURED_GRID\n")
        fh.write(f"DIMENSIONS {nx} {ny} 1\n")
        fh.write(f"POINTS {n} double\n")
        for y in ys:
            for x in xs:
                fh.write(f"{x:.17g} {y:.17g} 0\n")
        fh.write(f"POINT_DATA {n}\n")
        for name in ("u", "alpha"):
            fh.write(f"SCALARS {name} double 1\n")
            fh.write("LOOKUP_TABLE default\n")
            for j, y in enumerate(ys):
                for i, x in enumerate(xs):
                    if constant is not None:
                        val = constant if name == "u" else 0.0
                    else:
                        val = np.sin(3 * x) * np.cos(2 * y) if name == "u" \
                            else 0.5 * (x > 0.5)
                    fh.write(f"{val:.17g}\n")
    with open(rundir / "diag.csv", "w") as fh:
        fh.write("t,dt,max_alpha,mean_alpha,entropy,min_rho,min_p,drift_u\n")
        for k in range(5):
            t = 0.01 * k
            fh.write(f"{t},0.01,0,0,1.0,0.5,0,0\n")
    return rundir


@pytest.fixture(scope="session")
def fixture_run(tmp_path_factory):
    return write_fixture_run(tmp_path_factory.mktemp("fixture") / "run")


@pytest.fixture(scope="session")
def constant_run(tmp_path_factory):
    return write_fixture_run(tmp_path_factory.mktemp("fixture") / "const",
                             constant=2.5)


@pytest.fixture(scope="session")
def kpp_run(tmp_path_factory):
    """A real desk-style KPP run produced through the solver CLI."""
    outdir = tmp_path_factory.mktemp("solver") / "kpp"
    cmd = [sys.executable, "-m", "subcelldg.cli", "run",
           "--set", "case.id=kpp", "--set", "mesh.nx=16",
           "--set", "mesh.ny=16", "--set", "time.t_final=0.05",
           "--set", "output.cadence=0.025",
           "--set", f"output.dir={outdir}"]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        pytest.skip(f"solver CLI unavailable: {proc.stderr[:200]}")
    return outdir
