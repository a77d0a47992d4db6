import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bsquant.action import turning_points
from bsquant.errors import DomainError
from bsquant.langer import (gauge_assembly, gauge_matrix, g_derivatives, g_inner, g_outer, k_function, langer_map,
                            langer_ode_residual, model_matrix, q_kernel)
from bsquant.problem import coefficient_matrix, figure_one_problem, schrodinger
from bsquant.specfun import ZETA_AT_MINUS_ONE

HARMONIC = schrodinger("x^2/4")
QUARTIC = schrodinger("x^2/2 + x^4/4", window=(-6, 6))
CUBIC = schrodinger("x^2/2 + x^3/10", lambda_max=0.5, window=(-3, 6))
FIG1 = figure_one_problem()


def _away_from_turning(m, xs, margin=0.05):
    xm, xp = turning_points(m.problem, m.lam)
    return xs[(np.abs(xs - xm) > margin) & (np.abs(xs - xp) > margin)]


# -- identity map for the model potential -----------------------------------------


@pytest.mark.parametrize("lam", [0.01, 0.5, 1.0])
def test_harmonic_identity(lam):
    m = langer_map(HARMONIC, lam)
    xs = np.linspace(-9, 9, 37)
    d = m.derivatives(xs)
    assert np.allclose(d[0], xs, atol=1e-10)
    assert np.allclose(d[1], 1.0, atol=1e-9)
    assert np.allclose(d[2], 0.0, atol=1e-7)
    assert np.allclose(d[3], 0.0, atol=1e-6)
    far = xs[xs > 2 * math.sqrt(lam) + 0.1]
    assert np.allclose(g_outer(m, far), far, rtol=1e-10)
    g, gp = g_inner(m, np.array([0.0, 0.3 * math.sqrt(lam)]))
    assert np.allclose(g, [0.0, 0.3 * math.sqrt(lam)], atol=1e-12)
    assert np.allclose(gp, 1.0, rtol=1e-10)
    assert np.allclose(m.big_i(np.array([-1.0, 0.0, 2.0])), 1.0, rtol=1e-12)
    assert np.allclose(m.q_at_x(xs), 0.0, atol=1e-7)


def test_harmonic_gauge_is_trivial():
    m = langer_map(HARMONIC, 0.5)
    ga = gauge_assembly(m, 3.0)
    assert np.allclose(ga.G, np.eye(2), atol=1e-10)
    assert np.allclose(ga.H, 0.0, atol=1e-8)
    assert ga.residual <= 1e-9


# -- turning-point conditions and the ODE --------------------------------------------


@pytest.mark.parametrize("p,lam", [(QUARTIC, 0.05), (QUARTIC, 1.0), (CUBIC, 0.3), (FIG1, 0.7)])
def test_turning_points_map_to_model(p, lam):
    m = langer_map(p, lam)
    xm, xp = turning_points(p, lam)
    beta = 2 * math.sqrt(-m.b)
    assert m.g(xp) == pytest.approx(beta, rel=1e-10)
    assert m.g(xm) == pytest.approx(-beta, rel=1e-10)


@pytest.mark.parametrize("p,lam", [(QUARTIC, 0.02), (QUARTIC, 0.6), (CUBIC, 0.45), (FIG1, 0.55), (FIG1, 0.9)])
def test_langer_ode_residual(p, lam):
    m = langer_map(p, lam)
    lo, hi = p.window
    xs = _away_from_turning(m, np.linspace(0.95 * lo, 0.95 * hi, 401))
    assert np.max(np.abs(langer_ode_residual(m, xs))) <= 1e-8


@pytest.mark.parametrize("p,lam", [(QUARTIC, 0.3), (CUBIC, 0.2), (FIG1, 0.7)])
def test_continuity_across_turning_points(p, lam):
    m = langer_map(p, lam)
    for x0 in turning_points(p, lam):
        h = 1e-9 * max(1.0, abs(x0))
        lo = m.derivatives(np.array([x0 - h]))[:2, 0]
        hi = m.derivatives(np.array([x0 + h]))[:2, 0]
        assert np.allclose(lo, hi, atol=1e-7)
        assert np.all(np.isfinite(m.derivatives(np.array([x0]))))


@pytest.mark.parametrize("lam", [0.5, 0.1, 0.01])
def test_inner_outer_overlap(lam):
    for p in (QUARTIC, CUBIC):
        m = langer_map(p, lam)
        x = 2 * turning_points(p, lam)[1]
        inner = m.g_inner(np.array([x]))[:, 0]
        outer = m.g_outer(np.array([x]))[:, 0]
        assert np.allclose(inner, outer, rtol=1e-8, atol=1e-8)


def test_branch_switch_seam():
    m = langer_map(QUARTIC, 0.01)
    x0 = m.right.x_switch
    a = m.derivatives(np.array([x0 * (1 - 1e-12)]))[:, 0]
    b = m.derivatives(np.array([x0 * (1 + 1e-12)]))[:, 0]
    assert np.allclose(a, b, rtol=1e-8, atol=1e-8)


@pytest.mark.parametrize("p,lam", [(QUARTIC, 0.4), (CUBIC, 0.25), (FIG1, 0.8)])
def test_derivatives_by_central_differences(p, lam):
    m = langer_map(p, lam)
    xp = turning_points(p, lam)[1]
    h = 1e-4
    for x in np.linspace(xp - 0.5, xp + 0.5, 11):
        d = m.derivatives(np.array([x - h, x, x + h]))
        for k in (1, 2, 3):
            fd = (d[k - 1, 2] - d[k - 1, 0]) / (2 * h)
            assert d[k, 1] == pytest.approx(fd, rel=1e-5, abs=1e-6)


def test_g_derivatives_tuple():
    m = langer_map(QUARTIC, 0.5)
    g1, g2, g3 = g_derivatives(m, np.array([0.2, 1.5]))
    d = m.derivatives(np.array([0.2, 1.5]))
    assert np.array_equal(g1, d[1]) and np.array_equal(g2, d[2]) and np.array_equal(g3, d[3])


def test_outer_growth_matches_model_map():
    # g ~ 2 (int_0^x sqrt V)^(1/2) for x away from 0 as lam -> 0
    from scipy.integrate import quad
    x = 1.0
    g0 = 2 * math.sqrt(quad(lambda s: s * math.sqrt(0.5 + s * s / 4), 0, x, epsabs=1e-14)[0])
    lams = np.array([1e-2, 1e-3, 1e-4])
    dev = np.array([abs(langer_map(QUARTIC, l).g(x) / g0 - 1) for l in lams])
    assert np.all(np.diff(dev) < 0)
    assert np.all(dev <= 3 * lams * np.log(1 / lams))


def test_g_second_inner_limit():
    # V = x^2/2 + x^3/10: V''(0) = 1, V'''(0) = 0.6
    want = 2**0.25 * 0.6 / 9
    m = langer_map(CUBIC, 1e-6)
    g2 = m.derivatives(np.array([0.0]))[2, 0]
    assert g2 == pytest.approx(want, rel=1e-3)


def test_monotone_and_inner_bounds():
    eps = 0.05
    lams = [1.0, 0.5, 0.25, 0.1]
    sup2, sup3 = [], []
    for lam in lams:
        m = langer_map(QUARTIC, lam)
        xm = turning_points(QUARTIC, lam)[0]
        xs = np.linspace(-5.5, 5.5, 801)
        assert np.all(m.derivatives(xs)[1] > 0)
        inner = np.linspace(0.5 * xm, 0.5, 201)
        d = m.derivatives(inner)
        assert np.all(d[1] >= 0.5)
        sup2.append(np.max(np.abs(d[2])))
        sup3.append(np.max(np.abs(d[3])))
    assert lams[-1] >= 2 * eps
    assert max(sup2) <= 2 * min(sup2) + 1e-3
    assert max(sup3) <= 2 * min(sup3) + 1e-3


# -- inverse map ---------------------------------------------------------------------


@given(st.floats(min_value=-5.5, max_value=5.5))
def test_inverse_roundtrip(x):
    m = langer_map(QUARTIC, 0.3)
    assert float(m.inverse(m.g(x))) == pytest.approx(x, abs=1e-12)


def test_inverse_out_of_range():
    m = langer_map(QUARTIC, 0.3)
    with pytest.raises(DomainError):
        m.inverse(m.y_range[1] + 1.0)


# -- K ---------------------------------------------------------------------------------


def test_k_examples():
    assert float(k_function(0.0)) == pytest.approx(1.0, abs=1e-10)
    assert float(k_function(10.0)) == pytest.approx(1.0, abs=1e-8)
    assert float(k_function(ZETA_AT_MINUS_ONE + 0.05)) == pytest.approx(1.0, abs=1e-6)


def test_k_identically_one_on_grid():
    xi = np.linspace(ZETA_AT_MINUS_ONE + 0.05, 30, 500)
    assert np.max(np.abs(k_function(xi) - 1)) <= 1e-6


def test_k_domain():
    with pytest.raises(DomainError):
        k_function(ZETA_AT_MINUS_ONE - 0.1)


# -- perturbation kernel Q ------------------------------------------------------------


def test_q_matches_formula():
    m = langer_map(CUBIC, 0.3)
    ys = np.array([-2.0, 0.1, 1.3, 4.0])
    xs = m.inverse(ys)
    d = m.derivatives(xs)
    want = -0.75 * d[2] ** 2 / d[1] ** 4 + 0.5 * d[3] / d[1] ** 3
    assert np.allclose(q_kernel(m, ys), want, rtol=1e-12)


@pytest.mark.parametrize("p", [schrodinger("0.5 - 0.5*sech(x)^2", lambda_max=0.4, window=(-8, 8)),
                               schrodinger("x^2/2 + x^3/10", lambda_max=0.5, window=(-3, 6)),
                               QUARTIC])
def test_q_decay_bound_stable_in_lambda(p):
    eps = 0.05
    consts = []
    for lam in (p.lambda_max, p.lambda_max / 2, 2 * eps):
        m = langer_map(p, lam)
        lo, hi = m.y_range
        ys = np.linspace(0.97 * lo, 0.97 * hi, 401)
        consts.append(np.max((1 + ys**2) * np.abs(m.q(ys))))
    assert max(consts) <= 2 * min(consts)


def test_q_zs_includes_r_correction():
    m = langer_map(FIG1, 0.7)
    xs = np.array([-1.0, 0.4, 2.0])
    d = m.derivatives(xs)
    schr_part = -0.75 * d[2] ** 2 / d[1] ** 4 + 0.5 * d[3] / d[1] ** 3
    assert not np.allclose(m.q_at_x(xs), schr_part)


# -- gauge ---------------------------------------------------------------------------


def _c2_block(m, x, h=1e-4):
    """Order-one and order-two remainders of the conjugated system, by finite differences."""
    ga = gauge_assembly(m, x)
    g1 = m.derivatives(np.array([x]))[1, 0]
    dG = (gauge_matrix(m, x + h) - gauge_matrix(m, x - h)) / (2 * h)
    P = np.linalg.solve(ga.G, dG) / g1
    H = ga.H
    dH = (gauge_assembly(m, x + h).H - gauge_assembly(m, x - h).H) / (2 * h) / g1
    M = model_matrix(ga.y, m.b)
    first = M @ H - H @ M - P
    second = H @ P - P @ H - H @ M @ H - dH
    return ga, P, first, second


@pytest.mark.parametrize("p,lam,xs", [(QUARTIC, 0.4, (-3.0, -0.2, 0.5, 2.5)),
                                      (CUBIC, 0.3, (-1.5, 0.1, 3.0)),
                                      (FIG1, 0.7, (-4.0, -0.3, 0.6, 3.5))])
def test_gauge_assembly(p, lam, xs):
    m = langer_map(p, lam)
    for x in xs:
        ga, P, first, second = _c2_block(m, x)
        assert abs(np.linalg.det(ga.G) - 1) <= 1e-10
        assert np.array_equal(ga.H @ ga.H, np.zeros((2, 2)))
        assert ga.residual <= 1e-8
        assert abs(np.trace(P)) <= 1e-7
        assert np.max(np.abs(first)) <= 1e-6
        q = float(m.q_at_x(np.array([x]))[0])
        assert np.max(np.abs(second - np.array([[0, 0], [q, 0]]))) <= 1e-5 * max(1.0, abs(q))


def test_gauge_conjugation_direct():
    m = langer_map(FIG1, 0.6)
    x = 1.3
    G = gauge_matrix(m, x)
    g = m.derivatives(np.array([x]))[:2, 0]
    conj = np.linalg.inv(G) @ coefficient_matrix(FIG1, x, 0.6) @ G / g[1]
    assert np.allclose(conj, model_matrix(g[0], m.b), atol=1e-8)


def test_gauge_margin():
    m = langer_map(QUARTIC, 0.4)
    with pytest.raises(DomainError):
        gauge_assembly(m, turning_points(QUARTIC, 0.4)[1])
