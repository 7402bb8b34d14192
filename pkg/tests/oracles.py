"""Independent test oracles: exact 1D Euler Riemann solver and helpers.

Kept free of any solver-package numerics beyond numpy; used to certify
wavespeed bounds and limiter roots against ground truth.
"""
import numpy as np


def exact_riemann_speeds(rho_l, v_l, p_l, rho_r, v_r, p_r, gamma):
    """Extreme signal speeds of the exact 1D Riemann solution.

    Newton iteration on the star-region pressure (Toro's scheme), then
    the usual head/shock speed formulas. Returns (s_min, s_max); raises
    on vacuum-generating data.
    """
    g = gamma
    c_l = np.sqrt(g * p_l / rho_l)
    c_r = np.sqrt(g * p_r / rho_r)
    if 2.0 * (c_l + c_r) / (g - 1.0) <= v_r - v_l:
        raise ValueError("vacuum-generating data")

    def f_side(p, rho_k, p_k, c_k):
        if p > p_k:
            a = 2.0 / ((g + 1.0) * rho_k)
            b = (g - 1.0) / (g + 1.0) * p_k
            f = (p - p_k) * np.sqrt(a / (p + b))
            df = np.sqrt(a / (b + p)) * (1.0 - 0.5 * (p - p_k) / (b + p))
        else:
            f = 2.0 * c_k / (g - 1.0) * ((p / p_k) ** ((g - 1.0) / (2 * g)) - 1.0)
            df = 1.0 / (rho_k * c_k) * (p / p_k) ** (-(g + 1.0) / (2 * g))
        return f, df

    # two-rarefaction initial guess, positive floor
    z = (g - 1.0) / (2.0 * g)
    p = ((c_l + c_r - 0.5 * (g - 1.0) * (v_r - v_l))
         / (c_l / p_l ** z + c_r / p_r ** z)) ** (1.0 / z)
    p = max(p, 1e-12 * min(p_l, p_r))
    for _ in range(100):
        fl, dfl = f_side(p, rho_l, p_l, c_l)
        fr, dfr = f_side(p, rho_r, p_r, c_r)
        dp = (fl + fr + (v_r - v_l)) / (dfl + dfr)
        p_new = max(p - dp, 1e-14 * min(p_l, p_r))
        if abs(p_new - p) < 1e-14 * p:
            p = p_new
            break
        p = p_new
    fl, _ = f_side(p, rho_l, p_l, c_l)
    fr, _ = f_side(p, rho_r, p_r, c_r)
    v_star = 0.5 * (v_l + v_r) + 0.5 * (fr - fl)

    if p > p_l:   # left shock
        s_min = v_l - c_l * np.sqrt((g + 1.0) / (2 * g) * p / p_l
                                    + (g - 1.0) / (2 * g))
    else:         # left rarefaction head
        s_min = v_l - c_l
    if p > p_r:   # right shock
        s_max = v_r + c_r * np.sqrt((g + 1.0) / (2 * g) * p / p_r
                                    + (g - 1.0) / (2 * g))
    else:
        s_max = v_r + c_r
    return s_min, s_max


def random_admissible_prims(rng, n, vmax=5.0):
    """(rho, v1, v2, p) tuples in the verification sampling ranges."""
    rho = rng.uniform(0.1, 10.0, n)
    p = rng.uniform(0.1, 10.0, n)
    ang = rng.uniform(0.0, 2.0 * np.pi, n)
    speed = rng.uniform(0.0, vmax, n)
    return np.stack((rho, speed * np.cos(ang), speed * np.sin(ang), p), axis=-1)


def bisect_alpha(gfun, u_fv, fbar, gmin, gamma_relax, tol=1e-12):
    """Reference root for the interface limiting problem.

    Smallest a in [0, 1] with g(u_fv + gamma (1 - a) fbar) >= gmin,
    found by plain bisection from the feasible side.
    """
    def h(a):
        return gfun(u_fv + gamma_relax * (1.0 - a) * fbar) - gmin

    if h(0.0) >= 0.0:
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if h(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    return hi
