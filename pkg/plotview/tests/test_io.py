import numpy as np
import pytest

from plotview.io import list_snapshots, read_diag, read_snapshot


def test_snapshot_parses_fixture(fixture_run):
    snap = read_snapshot(fixture_run / "snap_0000.vtk")
    assert snap.dims == (6, 6, 1)
    assert set(snap.fields) == {"u", "alpha"}
    x, y = snap.grid()
    assert x.shape == (6, 6)
    assert np.allclose(x[0], np.linspace(0, 1, 6))
    f = snap.field2d("u")
    assert abs(f[0, 0] - np.sin(0) * np.cos(0)) <= 1e-15


def test_missing_field_lists_available(fixture_run):
    snap = read_snapshot(fixture_run / "snap_0000.vtk")
    with pytest.raises(KeyError) as err:
        snap.field2d("vorticity")
    assert "alpha" in str(err.value)


def test_schema_drift_reports_line(tmp_path):
    bad = tmp_path / "bad.vtk"
    bad.write_text("# vtk DataFile Version 3.0\nt\nASCII\n"
                   "DATASET STRUCTURED_GRID\nDIMENSIONS 2 2 1\n"
                   "POINTS 4 double\n0 0 0\n1 0 0\nBROKEN\n1 1 0\n")
    with pytest.raises(ValueError) as err:
        read_snapshot(bad)
    assert "bad.vtk:9" in str(err.value)
    assert "BROKEN" in str(err.value)


def test_diag_parses_and_validates(fixture_run, tmp_path):
    diag = read_diag(fixture_run / "diag.csv")
    assert len(diag["t"]) == 5
    assert np.all(diag["mean_alpha"] == 0.0)
    bad = tmp_path / "diag.csv"
    bad.write_text("time,step\n1,2\n")
    with pytest.raises(ValueError) as err:
        read_diag(bad)
    assert "header" in str(err.value)
    bad.write_text("t,dt,max_alpha,mean_alpha,entropy,min_rho,min_p\n"
                   "0,0.1,0,0,1,1,1\n0,0.1,oops,0,1,1,1\n")
    with pytest.raises(ValueError) as err:
        read_diag(bad)
    assert ":3" in str(err.value)


def test_list_snapshots(fixture_run, tmp_path):
    assert len(list_snapshots(fixture_run)) == 1
    with pytest.raises(FileNotFoundError):
        list_snapshots(tmp_path)


def test_roundtrip_against_solver_output(kpp_run):
    """Schema round trip on files the solver actually wrote."""
    snaps = list_snapshots(kpp_run)
    assert len(snaps) == 3            # t = 0, 0.025, 0.05
    snap = read_snapshot(snaps[-1])
    assert "u" in snap.fields and "alpha" in snap.fields
    assert snap.dims[0] == 16 * 4 and snap.dims[1] == 16 * 4
    diag = read_diag(kpp_run / "diag.csv")
    assert diag["t"][-1] == pytest.approx(0.05, abs=1e-12)
    assert np.all(diag["max_alpha"] <= 1.0)
