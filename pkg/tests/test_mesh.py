import numpy as np
import pytest

from subcelldg.mesh import (BC_CODES, MeshError, bow_shock_arc,
                            bow_shock_body, build_bow_shock_mesh,
                            build_cartesian, build_mapped, load_mesh,
                            save_mesh)
from subcelldg.sbp import build_operators


def test_single_affine_element_metrics():
    ops = build_operators(3)
    mesh = build_cartesian(1, 1, (0.0, 2.0, 0.0, 4.0), ops)
    assert np.allclose(mesh.jac, 2.0)
    assert np.allclose(mesh.ja1[..., 0], 2.0) and np.allclose(mesh.ja1[..., 1], 0.0)
    assert np.allclose(mesh.ja2[..., 0], 0.0) and np.allclose(mesh.ja2[..., 1], 1.0)


def test_subcell_normals_affine_against_direct_sum():
    """Oracle: evaluate the prefix double sum of the normal formula directly."""
    ops = build_operators(3)
    mesh = build_cartesian(1, 1, (0.0, 2.0, 0.0, 4.0), ops)
    npts = 4
    for j in range(npts):
        for s in range(npts + 2 - 1):
            expect = mesh.ja1[0, 0, j].copy()
            for l in range(s):          # interface s sums rows l <= s-1
                for m in range(npts):
                    expect += ops.Q[l, m] * mesh.ja1[0, m, j]
            assert np.allclose(mesh.n1[0, s, j], expect, atol=1e-13)
            assert np.allclose(mesh.n1[0, s, j], [2.0, 0.0], atol=1e-13)


def test_unit_square_metric_identity_exact():
    ops = build_operators(4)
    mesh = build_cartesian(1, 1, (0.0, 1.0, 0.0, 1.0), ops)
    # constant normals cancel; only accumulated roundoff of Q @ const remains
    assert mesh.metric_identity_residual() <= 5e-15


def test_periodic_mesh_has_no_boundary():
    ops = build_operators(2)
    mesh = build_cartesian(2, 2, (0.0, 1.0, 0.0, 1.0), ops, periodic=(True, True))
    assert np.all(mesh.neighbor >= 0)
    assert len(mesh.bfaces) == 0
    assert np.all(mesh.bc == 0)


def test_sine_warped_metric_identity():
    ops = build_operators(4)

    def warp(x, y):
        return (x + 0.1 * np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y),
                y + 0.1 * np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y))

    mesh = build_mapped(3, 3, warp, ops, periodic=(True, True))
    assert mesh.metric_identity_residual() <= 1e-12
    assert mesh.face_normal_residual() <= 1e-12


@pytest.mark.parametrize("seed", range(10))
def test_randomized_mappings_invariants(seed):
    """10 seeds x 10 draws = 100 randomized smooth mappings, N in 1..7."""
    rng = np.random.default_rng(100 + seed)
    for _ in range(10):
        n = int(rng.integers(1, 8))
        ops = build_operators(n)
        a = rng.uniform(-0.08, 0.08, 4)

        def warp(x, y, a=a):
            sx, sy = np.sin(2 * np.pi * x), np.sin(2 * np.pi * y)
            return x + a[0] * sx * sy + a[1] * sy * 0.3, \
                y + a[2] * sx * sy + a[3] * sx * 0.3

        mesh = build_mapped(3, 2, warp, ops, periodic=(False, False))
        assert mesh.metric_identity_residual() <= 1e-12
        assert mesh.face_normal_residual() <= 1e-12
        assert mesh.conforming_residual() <= 1e-12
        assert mesh.watertight_residual() <= 1e-12


def test_face_normal_telescoping():
    """The i = N subcell normal reproduces the face metric terms."""
    ops = build_operators(5)
    rng = np.random.default_rng(8)
    a = rng.uniform(-0.05, 0.05, 4)

    def warp(x, y):
        sx, sy = np.sin(2 * np.pi * x), np.sin(2 * np.pi * y)
        return x + a[0] * sx * sy + a[1] * sy * 0.2, \
            y + a[2] * sx * sy + a[3] * sx * 0.2

    mesh = build_mapped(2, 2, warp, ops)
    assert np.max(np.abs(mesh.n1[:, -1] - mesh.ja1[:, -1])) <= 1e-12
    assert np.max(np.abs(mesh.n1[:, 0] - mesh.ja1[:, 0])) <= 1e-12
    assert np.max(np.abs(mesh.n2[:, :, -1] - mesh.ja2[:, :, -1])) <= 1e-12


def test_degenerate_rectangle_rejected():
    ops = build_operators(2)
    with pytest.raises(MeshError):
        build_cartesian(2, 2, (0.0, 0.0, 0.0, 1.0), ops)


def test_negative_jacobian_rejected_with_location():
    ops = build_operators(3)

    def fold(x, y):
        return x + 0.9 * np.sin(2 * np.pi * x), y   # folds over

    with pytest.raises(MeshError) as err:
        build_mapped(2, 2, fold, ops)
    assert "element" in str(err.value) and "node" in str(err.value)


def test_bow_shock_geometry_anchors():
    bx, by = bow_shock_body(np.array([0.5]))
    assert abs(bx[0]) <= 1e-12 and abs(by[0]) <= 1e-12
    ax, ay = bow_shock_arc(np.array([0.5]))
    assert abs(ax[0] - (-2.05)) <= 1e-12 and abs(ay[0]) <= 1e-12
    # body end points at the shoulders
    bx, by = bow_shock_body(np.array([0.0, 1.0]))
    assert np.allclose(bx, [0.5, 0.5], atol=1e-12)
    assert np.allclose(by, [-1.0, 1.0], atol=1e-12)


def test_bow_shock_mesh_tags_and_metrics():
    ops = build_operators(4)
    mesh = build_bow_shock_mesh(4, 12, ops)
    assert mesh.metric_identity_residual() <= 1e-12
    west = mesh.bfaces[mesh.bfaces[:, 1] == 0]
    east = mesh.bfaces[mesh.bfaces[:, 1] == 1]
    assert np.all(west[:, 2] == BC_CODES["characteristic_io"])
    assert np.all(east[:, 2] == BC_CODES["reflecting_wall"])
    with pytest.raises(MeshError):
        build_bow_shock_mesh(2, 4, ops)


def test_save_load_roundtrip(tmp_path):
    ops = build_operators(3)

    def warp(x, y):
        return x + 0.05 * np.sin(2 * np.pi * y), y + 0.05 * np.sin(2 * np.pi * x)

    mesh = build_mapped(2, 3, warp, ops, periodic=(True, False),
                        tags={"south": "reflecting_wall",
                              "north": "characteristic_io"})
    path = tmp_path / "mesh.txt"
    save_mesh(mesh, path)
    back = load_mesh(path)
    assert back.nx == mesh.nx and back.ny == mesh.ny
    assert back.degree == mesh.degree
    assert np.max(np.abs(back.x - mesh.x)) == 0.0
    assert np.max(np.abs(back.jac - mesh.jac)) <= 1e-14
    assert back.periodic == mesh.periodic
    assert np.array_equal(back.bc, mesh.bc)
