import numpy as np
import pytest

from oracles import exact_riemann_speeds, random_admissible_prims
from subcelldg.equations import (EulerSystem, GlmMhdSystem, KppSystem,
                                 euler_chandrashekar_flux, euler_flux,
                                 get_system, glm_mhd_flux,
                                 glm_mhd_volume_flux, hlle_surface_flux,
                                 kpp_ec_flux, kpp_flux, llf_surface_flux,
                                 log_mean, max_wavespeed,
                                 modified_specific_entropy)


# --- KPP ---------------------------------------------------------------

def test_kpp_flux_values():
    assert np.allclose(kpp_flux(0.0), [0.0, 1.0])
    s = np.sqrt(2.0) / 2.0
    assert np.allclose(kpp_flux(np.pi / 4), [s, s])
    assert np.allclose(kpp_flux(3.5 * np.pi), [-1.0, 0.0], atol=1e-15)


def test_kpp_ec_flux_values_and_symmetry():
    assert np.allclose(kpp_ec_flux(1.0, 1.0), [np.sin(1.0), np.cos(1.0)])
    # difference quotient of the potential flux psi = (-cos u, sin u)
    assert np.allclose(kpp_ec_flux(0.0, np.pi), [2.0 / np.pi, 0.0], atol=1e-15)
    a, b = 0.3, 2.1
    assert np.allclose(kpp_ec_flux(a, b), kpp_ec_flux(b, a))


def test_kpp_ec_flux_continuity_at_switch():
    u = 0.7
    eps = 1e-8   # the quotient/consistency switch threshold
    above = kpp_ec_flux(u, u + 1.0001 * eps)
    below = kpp_ec_flux(u, u + 0.9999 * eps)
    assert np.max(np.abs(above - below)) <= 1e-10


def test_kpp_llf_example():
    eq = KppSystem()
    f = llf_surface_flux([0.0], [np.pi], (1.0, 0.0), eq)
    assert abs(f[0] - (-np.pi / 2.0)) <= 1e-14
    assert abs(max_wavespeed([0.2], [5.0], (0.6, 0.8), eq) - 1.0) == 0.0


# --- Euler -------------------------------------------------------------

def test_euler_flux_values():
    f = euler_flux([1.0, 0.0, 0.0, 1.0], gamma=1.4)
    assert np.allclose(f[0], [0.0, 0.4, 0.0, 0.0])
    assert np.allclose(f[1], [0.0, 0.0, 0.4, 0.0])
    # free stream rho=1.4, v=(4,0), p=1: rhoE = 2.5 + 11.2
    eq = EulerSystem(1.4)
    u = eq.conserved(np.array([1.4, 4.0, 0.0, 1.0]))
    f = euler_flux(u, gamma=1.4)
    assert np.allclose(f[0], [5.6, 23.4, 0.0, 58.8])


def test_euler_flux_rotational_consistency():
    eq = EulerSystem(1.4)
    u = eq.conserved(np.array([2.0, 1.0, -0.5, 3.0]))
    f = euler_flux(u, gamma=1.4)
    fy = eq.flux_dot_n_np(u[None, :], np.array([[0.0, 1.0]]))[0]
    assert np.allclose(f[1], fy)


def test_euler_flux_rejects_nonpositive_density():
    with pytest.raises(ValueError):
        euler_flux([-1.0, 0.0, 0.0, 1.0])


def test_log_mean():
    assert log_mean(1.0, 1.0) == 1.0
    assert abs(log_mean(1.0, np.e) - (np.e - 1.0)) <= 1e-14


def test_chandrashekar_consistency_and_symmetry():
    """Consistency and symmetry over 1000 random admissible pairs."""
    eq = EulerSystem(1.4)
    rng = np.random.default_rng(5)
    ua = eq.conserved(random_admissible_prims(rng, 1000))
    ub = eq.conserved(random_admissible_prims(rng, 1000))
    flux = eq.volume_fluxes["chandrashekar"]
    wa = np.empty(eq.nw)
    wb = np.empty(eq.nw)
    fab = np.empty(4)
    fba = np.empty(4)
    n = np.array([0.6, -0.8])
    for k in range(1000):
        eq.prep_node(ua[k], eq.params, wa)
        eq.prep_node(ub[k], eq.params, wb)
        flux(wa, wa, n[0], n[1], n[0], n[1], eq.params, fab)
        ref = eq.flux_dot_n_np(ua[k][None], n[None])[0]
        assert np.max(np.abs(fab - ref)) <= 1e-12 * max(1.0, np.max(np.abs(ref)))
        flux(wa, wb, n[0], n[1], n[0], n[1], eq.params, fab)
        flux(wb, wa, n[0], n[1], n[0], n[1], eq.params, fba)
        assert np.max(np.abs(fab - fba)) <= 1e-12 * max(1.0, np.max(np.abs(fab)))


def test_llf_consistency_and_euler_value():
    eq = EulerSystem(1.4)
    u = eq.conserved(np.array([1.0, 0.5, -0.2, 2.0]))
    n = np.array([0.6, 0.8])
    f = llf_surface_flux(u, u, n, eq)
    assert np.allclose(f, eq.flux_dot_n_np(u[None, :], n[None, :])[0])


def test_hlle_upwind_limits_and_consistency():
    eq = EulerSystem(1.4)
    u = eq.conserved(np.array([1.0, 3.0, 0.0, 1.0]))   # supersonic to the right
    f = hlle_surface_flux(u, 0.9 * u, (1.0, 0.0), eq)
    assert np.allclose(f, eq.flux_dot_n_np(u[None, :], np.array([[1.0, 0.0]]))[0])
    f = hlle_surface_flux(u, u, (0.0, 1.0), eq)
    assert np.allclose(f, eq.flux_dot_n_np(u[None, :], np.array([[0.0, 1.0]]))[0])


def test_hlle_intermediate_state_positive():
    eq = EulerSystem(1.4)
    rng = np.random.default_rng(6)
    wl = random_admissible_prims(rng, 1000)
    wr = random_admissible_prims(rng, 1000)
    ul = eq.conserved(wl)
    ur = eq.conserved(wr)
    g = 1.4
    for k in range(1000):
        rl, v1l, v2l, pl = wl[k]
        rr, v1r, v2r, pr = wr[k]
        cl = np.sqrt(g * pl / rl)
        cr = np.sqrt(g * pr / rr)
        sql, sqr = np.sqrt(rl), np.sqrt(rr)
        isq = 1.0 / (sql + sqr)
        vroe = (sql * v1l + sqr * v1r) * isq
        d2 = (sql * cl ** 2 + sqr * cr ** 2) * isq \
            + 0.5 * sql * sqr * isq ** 2 * (v1r - v1l) ** 2
        s_l = min(v1l - cl, vroe - np.sqrt(d2))
        s_r = max(v1r + cr, vroe + np.sqrt(d2))
        if s_l >= 0.0 or s_r <= 0.0:
            continue
        n = np.array([1.0, 0.0])
        f_l = eq.flux_dot_n_np(ul[k][None], n[None])[0]
        f_r = eq.flux_dot_n_np(ur[k][None], n[None])[0]
        ustar = (s_r * ur[k] - s_l * ul[k] + f_l - f_r) / (s_r - s_l)
        assert ustar[0] > 0.0
        assert eq.pressure(ustar[None])[0] > 0.0


def test_max_wavespeed_examples():
    eq = EulerSystem(1.4)
    u = eq.conserved(np.array([1.4, 0.0, 0.0, 1.0]))   # at rest, c = 1
    assert abs(max_wavespeed(u, u, (1.0, 0.0), eq) - 1.0) <= 1e-14
    eqj = EulerSystem(5.0 / 3.0)
    jet = eqj.conserved(np.array([5.0, 800.0, 0.0, 0.4127]))
    amb = eqj.conserved(np.array([0.5, 0.0, 0.0, 0.4127]))
    c_jet = np.sqrt(5.0 / 3.0 * 0.4127 / 5.0)
    assert max_wavespeed(jet, amb, (1.0, 0.0), eqj) >= 800.0 + c_jet


def test_max_wavespeed_bounds_exact_riemann():
    eq = EulerSystem(1.4)
    rng = np.random.default_rng(7)
    wl = random_admissible_prims(rng, 1000)
    wr = random_admissible_prims(rng, 1000)
    ul = eq.conserved(wl)
    ur = eq.conserved(wr)
    for k in range(1000):
        try:
            smin, smax = exact_riemann_speeds(wl[k, 0], wl[k, 1], wl[k, 3],
                                              wr[k, 0], wr[k, 1], wr[k, 3], 1.4)
        except ValueError:
            continue
        lam = max_wavespeed(ul[k], ur[k], (1.0, 0.0), eq)
        assert max(abs(smin), abs(smax)) <= lam * (1.0 + 1e-12)


def test_modified_specific_entropy():
    assert abs(modified_specific_entropy([1.0, 0.0, 0.0, 2.5], 1.4) - 2.5) <= 1e-14
    # multiplying rho by k at fixed p scales phi by k^(-gamma)
    eq = EulerSystem(1.4)
    u1 = eq.conserved(np.array([1.0, 0.3, -0.1, 2.0]))
    u2 = eq.conserved(np.array([3.0, 0.3, -0.1, 2.0]))
    r = modified_specific_entropy(u2) / modified_specific_entropy(u1)
    assert abs(r - 3.0 ** (-1.4)) <= 1e-12
    # phi > 0 iff p > 0 at positive density
    assert modified_specific_entropy(eq.conserved(np.array([2.0, 1.0, 0.0, 0.01]))) > 0


def test_euler_entropy_variables_contract_flux():
    """v . f(u) - U vn = psi with psi = rho vn the entropy flux potential."""
    eq = EulerSystem(1.4)
    rng = np.random.default_rng(9)
    w = random_admissible_prims(rng, 50)
    u = eq.conserved(w)
    v = eq.entropy_variables_np(u)
    n = np.array([0.6, -0.8])
    f = eq.flux_dot_n_np(u, np.broadcast_to(n, (50, 2)))
    vn = w[:, 1] * n[0] + w[:, 2] * n[1]
    ent_flux = eq.entropy_np(u) * vn
    psi = u[:, 0] * vn
    assert np.max(np.abs(np.sum(v * f, axis=-1) - ent_flux - psi)) <= 1e-10


# --- GLM-MHD -----------------------------------------------------------

def test_glm_flux_reduces_to_euler():
    eq = GlmMhdSystem(1.4)
    u = np.array([1.0, 0.5, -0.2, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0])
    f = glm_mhd_flux(u, gamma=1.4)
    ee = EulerSystem(1.4)
    fe = euler_flux(u[[0, 1, 2, 4]], gamma=1.4)
    assert np.allclose(f[:, [0, 1, 2, 4]], fe)
    assert np.allclose(f[:, [3, 5, 6, 7, 8]], 0.0)


def test_glm_flux_orszag_tang_state():
    rho = 25.0 / (36.0 * np.pi)
    p = 5.0 / (12.0 * np.pi)
    eq = GlmMhdSystem(5.0 / 3.0)
    # state at (x, y) = (0.25, 0): v = (0, 1), B = (0, -1/sqrt(4 pi))
    b2 = -1.0 / np.sqrt(4.0 * np.pi)
    w = np.array([rho, 0.0, 1.0, 0.0, p, 0.0, b2, 0.0, 0.0])
    u = eq.conserved(w)
    f = glm_mhd_flux(u, gamma=5.0 / 3.0)
    # x momentum row of f1 is ptot = p + B^2/2 (vn = 0, B1 = 0)
    assert abs(f[0][1] - (p + 0.5 * b2 ** 2)) <= 1e-14
    assert abs(f[0][2] - 0.0) <= 1e-14


def test_glm_psi_row_is_ch_times_bn():
    eq = GlmMhdSystem()
    w = np.array([1.0, 0.3, -0.5, 0.1, 2.0, 0.4, -0.7, 0.2, 0.3])
    u = eq.conserved(w)
    f = glm_mhd_flux(u, ch=2.5)
    assert abs(f[0][8] - 2.5 * 0.4) <= 1e-14
    assert abs(f[1][8] - 2.5 * (-0.7)) <= 1e-14


def test_glm_volume_flux_properties():
    rng = np.random.default_rng(11)
    eq = GlmMhdSystem(5.0 / 3.0)
    for _ in range(50):
        wa = np.concatenate((rng.uniform(0.1, 5.0, 1), rng.uniform(-2, 2, 3),
                             rng.uniform(0.1, 5.0, 1), rng.uniform(-1, 1, 4)))
        wb = np.concatenate((rng.uniform(0.1, 5.0, 1), rng.uniform(-2, 2, 3),
                             rng.uniform(0.1, 5.0, 1), rng.uniform(-1, 1, 4)))
        ua, ub = eq.conserved(wa), eq.conserved(wb)
        fab = glm_mhd_volume_flux(ua, ub, ch=1.3)
        fba = glm_mhd_volume_flux(ub, ua, ch=1.3)
        assert np.max(np.abs(fab - fba)) <= 1e-12 * max(1.0, np.max(np.abs(fab)))
        faa = glm_mhd_volume_flux(ua, ua, ch=1.3)
        fex = glm_mhd_flux(ua, ch=1.3)
        assert np.max(np.abs(faa - fex)) <= 1e-12 * max(1.0, np.max(np.abs(fex)))


def test_glm_volume_flux_euler_limit():
    eq = GlmMhdSystem(1.4)
    wa = np.array([1.2, 0.4, -0.3, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0])
    wb = np.array([0.8, -0.1, 0.6, 0.0, 1.5, 0.0, 0.0, 0.0, 0.0])
    ua, ub = eq.conserved(wa), eq.conserved(wb)
    f = glm_mhd_volume_flux(ua, ub, gamma=1.4)
    fe = euler_chandrashekar_flux(ua[[0, 1, 2, 4]], ub[[0, 1, 2, 4]], gamma=1.4)
    assert np.max(np.abs(f[:, [0, 1, 2, 4]] - fe)) <= 1e-13
    assert np.max(np.abs(f[:, [3, 5, 6, 7, 8]])) <= 1e-14


def test_mhd_wavespeed_adds_cleaning_speed():
    eq = GlmMhdSystem()
    w = np.array([1.0, 0.5, 0.0, 0.0, 1.0, 0.3, 0.2, 0.0, 0.0])
    u = eq.conserved(w)
    eq.set_ch(0.0)
    lam0 = float(eq.max_speed(u, u, 1.0, 0.0, eq.params))
    eq.set_ch(2.0)
    lam2 = float(eq.max_speed(u, u, 1.0, 0.0, eq.params))
    assert abs(lam2 - lam0 - 2.0) <= 1e-14


def test_workspace_kernels_match_raw_kernels():
    """flux_w / max_speed_w agree with the raw-state variants."""
    for eq, nvp in ((EulerSystem(1.4), 4), (GlmMhdSystem(5 / 3), 9)):
        rng = np.random.default_rng(13)
        if nvp == 4:
            w = random_admissible_prims(rng, 20)
            u = eq.conserved(w)
        else:
            eq.set_ch(1.7)
            w = np.concatenate((rng.uniform(0.5, 2, (20, 1)),
                                rng.uniform(-1, 1, (20, 3)),
                                rng.uniform(0.5, 2, (20, 1)),
                                rng.uniform(-1, 1, (20, 4))), axis=1)
            u = eq.conserved(w)
        wk = np.empty((20, eq.nw))
        for k in range(20):
            eq.prep_node(u[k], eq.params, wk[k])
        out_w = np.empty(eq.n_vars)
        out_r = np.empty(eq.n_vars)
        for k in range(0, 20, 3):
            for n in ((1.0, 0.0), (0.6, -0.8)):
                eq.flux_w(wk[k], n[0], n[1], eq.params, out_w)
                eq.flux_dot_n(u[k], n[0], n[1], eq.params, out_r)
                assert np.max(np.abs(out_w - out_r)) <= 1e-11 * max(
                    1.0, np.max(np.abs(out_r)))
                lw = eq.max_speed_w(wk[k], wk[(k + 7) % 20], n[0], n[1], eq.params)
                lr = eq.max_speed(u[k], u[(k + 7) % 20], n[0], n[1], eq.params)
                assert abs(lw - lr) <= 1e-11 * max(1.0, lr)


def test_get_system_registry():
    assert get_system("kpp").n_vars == 1
    assert get_system("euler", gamma=1.4).n_vars == 4
    assert get_system("glm_mhd").n_vars == 9
    with pytest.raises(KeyError):
        get_system("navier_stokes")
    with pytest.raises(ValueError):
        get_system("euler", gamma=0.9)
