import numpy as np
import pytest

from subcelldg.sbp import (build_operators, legendre, modal_transform,
                           modal_transform_2d, nodal_transform)

# analytic LGL nodes/weights for small degrees
ANALYTIC = {
    1: ([-1.0, 1.0], [1.0, 1.0]),
    2: ([-1.0, 0.0, 1.0], [1 / 3, 4 / 3, 1 / 3]),
    3: ([-1.0, -np.sqrt(1 / 5), np.sqrt(1 / 5), 1.0],
        [1 / 6, 5 / 6, 5 / 6, 1 / 6]),
    4: ([-1.0, -np.sqrt(3 / 7), 0.0, np.sqrt(3 / 7), 1.0],
        [1 / 10, 49 / 90, 32 / 45, 49 / 90, 1 / 10]),
}


@pytest.mark.parametrize("n", sorted(ANALYTIC))
def test_nodes_weights_analytic(n):
    ops = build_operators(n)
    nodes, weights = ANALYTIC[n]
    assert np.allclose(ops.nodes, nodes, rtol=0, atol=1e-13)
    assert np.allclose(ops.weights, weights, rtol=0, atol=1e-13)


@pytest.mark.parametrize("n", range(1, 16))
def test_operator_invariants(n):
    ops = build_operators(n)
    assert ops.nodes[0] == -1.0 and ops.nodes[-1] == 1.0
    assert np.all(np.diff(ops.nodes) > 0)
    assert abs(ops.weights.sum() - 2.0) <= 1e-13
    assert np.max(np.abs(ops.Q + ops.Q.T - ops.B)) <= 1e-12
    assert np.max(np.abs(ops.Q @ np.ones(n + 1))) <= 1e-12
    assert np.allclose(ops.Sbar, ops.Q - ops.B)
    assert np.allclose(ops.S, 2 * ops.Q - ops.B)
    # S is antisymmetric with zero diagonal
    assert np.max(np.abs(ops.S + ops.S.T)) <= 1e-12


@pytest.mark.parametrize("n", range(1, 16))
def test_quadrature_exactness(n):
    ops = build_operators(n)
    for k in range(2 * n):
        exact = 2.0 / (k + 1) if k % 2 == 0 else 0.0
        assert abs(np.sum(ops.weights * ops.nodes ** k) - exact) <= 1e-12


@pytest.mark.parametrize("n", range(1, 16))
def test_differentiation_exact_on_polynomials(n):
    ops = build_operators(n)
    for k in range(n + 1):
        deriv = ops.D @ ops.nodes ** k
        exact = k * ops.nodes ** (k - 1) if k > 0 else np.zeros(n + 1)
        assert np.max(np.abs(deriv - exact)) <= 1e-11


def test_degree_range_rejected():
    with pytest.raises(ValueError):
        build_operators(0)
    with pytest.raises(ValueError):
        build_operators(16)
    with pytest.raises(TypeError):
        build_operators(2.5)


def test_modal_transform_constant():
    ops = build_operators(5)
    m = modal_transform(np.full(6, 3.0), ops)
    # orthonormal mode 0 is 1/sqrt(2), so the coefficient is c sqrt(2)
    assert abs(m[0] - 3.0 * np.sqrt(2.0)) <= 1e-12
    assert np.max(np.abs(m[1:])) <= 1e-12


@pytest.mark.parametrize("n", [2, 4, 7])
def test_modal_transform_pure_highest_mode(n):
    ops = build_operators(n)
    p, _ = legendre(n, ops.nodes)
    m = modal_transform(p, ops)
    assert np.max(np.abs(m[:-1])) <= 1e-12
    assert abs(m[-1] - 1.0 / np.sqrt(n + 0.5)) <= 1e-12


def test_modal_transform_zero_and_roundtrip():
    ops = build_operators(6)
    assert np.max(np.abs(modal_transform(np.zeros(7), ops))) == 0.0
    rng = np.random.default_rng(3)
    v = rng.normal(size=7)
    back = nodal_transform(modal_transform(v, ops), ops)
    assert np.max(np.abs(back - v)) <= 1e-12


def test_modal_transform_rejects_bad_length():
    ops = build_operators(3)
    with pytest.raises(ValueError):
        modal_transform(np.zeros(5), ops)


def test_modal_transform_2d_roundtrip():
    ops = build_operators(4)
    rng = np.random.default_rng(4)
    f = rng.normal(size=(3, 5, 5))
    m = modal_transform_2d(f, ops)
    back = np.einsum("ia,kab,jb->kij", ops.vand, m, ops.vand)
    assert np.max(np.abs(back - f)) <= 1e-12


def test_interface_positions_cover_reference_interval():
    ops = build_operators(5)
    assert ops.iface_pos[0] == -1.0 and ops.iface_pos[-1] == 1.0
    assert np.allclose(np.diff(ops.iface_pos), ops.weights, atol=1e-14)
