import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bsquant.action import (action_integral, b_of_lambda, get_well, j_integral, s_coordinate, turning_points,
                            x_of_s)
from bsquant.errors import DomainError
from bsquant.problem import figure_one_problem, schrodinger, zs_reduce
from oracles import action_quad, j_quad

HARMONIC = schrodinger("x^2/4")
STEEP = schrodinger("x^2")
QUARTIC = schrodinger("x^2/2 + x^4/4")
# regression constant, confirmed by the weighted adaptive quadrature oracle
QUARTIC_ACTION_AT_1 = 1.8261996048272748


def quartic_v(x):
    return x * x / 2 + x**4 / 4


# -- turning points -----------------------------------------------------------


def test_turning_points_closed_forms():
    assert turning_points(HARMONIC, 1.0) == pytest.approx((-2.0, 2.0), abs=1e-12)
    assert turning_points(STEEP, 0.25) == pytest.approx((-0.5, 0.5), abs=1e-12)
    xp = math.sqrt(math.sqrt(5) - 1)
    xm_q, xp_q = turning_points(QUARTIC, 1.0)
    assert xp_q == pytest.approx(xp, abs=1e-12)
    assert xm_q == pytest.approx(-xp, abs=1e-12)


@given(st.floats(min_value=1e-4, max_value=1.0))
def test_turning_points_root_residual(lam):
    xm, xp = turning_points(QUARTIC, lam)
    assert xm < 0 < xp
    assert abs(quartic_v(xp) - lam) <= 1e-12
    assert abs(quartic_v(xm) - lam) <= 1e-12


def test_turning_points_bracket_failure():
    p = schrodinger("1 - sech(x)^2", lambda_max=0.9, window=(-6, 6))
    with pytest.raises(DomainError):
        turning_points(p, 1.5)
    with pytest.raises(DomainError):
        turning_points(p, 0.0)


# -- s coordinate ---------------------------------------------------------------


def test_s_coordinate_harmonic():
    xs = np.linspace(-5, 5, 21)
    assert np.allclose(s_coordinate(HARMONIC, xs), xs / 2, rtol=1e-13, atol=1e-15)
    ss = np.linspace(-2, 2, 9)
    assert np.allclose(x_of_s(HARMONIC, ss), 2 * ss, rtol=1e-12, atol=1e-14)
    assert np.allclose(x_of_s(HARMONIC, ss, derivative=1), 2.0, rtol=1e-12)
    assert np.allclose(x_of_s(HARMONIC, ss, derivative=2), 0.0, atol=1e-10)


@pytest.mark.parametrize("p,v2", [(HARMONIC, 0.5), (STEEP, 2.0), (QUARTIC, 1.0)])
def test_x_prime_at_origin(p, v2):
    assert x_of_s(p, 0.0, derivative=1) == pytest.approx(math.sqrt(2 / v2), rel=1e-10)


@given(st.floats(min_value=-3.0, max_value=3.0))
def test_s_roundtrip(x):
    s = s_coordinate(QUARTIC, x)
    assert abs(x_of_s(QUARTIC, s) - x) <= 1e-10 * max(1.0, abs(x))
    assert s * s == pytest.approx(quartic_v(x), rel=1e-12, abs=1e-300)
    assert math.copysign(1.0, s) == math.copysign(1.0, x) or x == 0


def test_x_of_s_derivatives_by_differencing():
    h = 1e-4
    for s in (-1.5, -0.4, 0.0, 0.3, 1.2):
        d = [x_of_s(QUARTIC, s, derivative=k) for k in range(4)]
        for k in (1, 2, 3):
            lo = x_of_s(QUARTIC, s - h, derivative=k - 1)
            hi = x_of_s(QUARTIC, s + h, derivative=k - 1)
            assert d[k] == pytest.approx((hi - lo) / (2 * h), rel=1e-6, abs=1e-7)


def test_x_of_s_implicit_relation():
    # d/ds of s^2 = V(x(s)) gives 2 s = V'(x) x'
    for s in (-1.1, 0.25, 2.0):
        x = x_of_s(QUARTIC, s)
        xp = x_of_s(QUARTIC, s, derivative=1)
        assert (x + x**3) * xp == pytest.approx(2 * s, rel=1e-10)


# -- action ------------------------------------------------------------------


@pytest.mark.parametrize("lam", [1e-4, 0.01, 0.3, 1.0])
def test_action_closed_forms(lam):
    assert action_integral(HARMONIC, lam) == pytest.approx(math.pi * lam, rel=1e-10)
    assert action_integral(STEEP, lam) == pytest.approx(math.pi * lam / 2, rel=1e-10)


def test_action_quartic_regression():
    xp = math.sqrt(math.sqrt(5) - 1)
    assert action_quad(quartic_v, 1.0, -xp, xp) == pytest.approx(QUARTIC_ACTION_AT_1, rel=1e-12)
    assert action_integral(QUARTIC, 1.0) == pytest.approx(QUARTIC_ACTION_AT_1, rel=1e-10)


@given(st.floats(min_value=1e-3, max_value=1.0))
def test_action_against_quadrature(lam):
    xm, xp = turning_points(QUARTIC, lam)
    assert action_integral(QUARTIC, lam) == pytest.approx(action_quad(quartic_v, lam, xm, xp), rel=1e-10)


def test_action_asymmetric_potential():
    v = lambda x: x * x / 2 + x**3 / 10
    p = schrodinger("x^2/2 + x^3/10", lambda_max=0.5, window=(-3, 6))
    for lam in (0.05, 0.2, 0.5):
        xm, xp = turning_points(p, lam)
        assert action_integral(p, lam) == pytest.approx(action_quad(v, lam, xm, xp), rel=1e-10)


def test_action_node_refinement():
    for lam in (0.01, 0.5, 1.0):
        a = action_integral(QUARTIC, lam, nodes=64)
        b = action_integral(QUARTIC, lam, nodes=128)
        assert abs(a - b) <= 1e-10 * abs(b)


# -- b and phi -----------------------------------------------------------------


@pytest.mark.parametrize("lam", [0.01, 0.4, 1.0])
def test_b_and_phi_closed_forms(lam):
    h = b_of_lambda(HARMONIC, lam)
    assert h.b == pytest.approx(-lam, rel=1e-10)
    assert h.phi == pytest.approx(1.0, rel=1e-10)
    s = b_of_lambda(STEEP, lam)
    assert s.b == pytest.approx(-lam / 2, rel=1e-10)
    assert s.phi == pytest.approx(2.0, rel=1e-10)


@given(st.floats(min_value=1e-4, max_value=1.0))
def test_turning_point_data_invariants(lam):
    d = b_of_lambda(QUARTIC, lam)
    assert d.x_minus < 0 < d.x_plus
    assert d.b < 0 and d.phi > 0 and d.action > 0
    assert d.b == -d.action / math.pi
    assert d.phi == pytest.approx(lam / (-d.b), rel=1e-15)


def test_b_strictly_decreasing():
    lams = np.linspace(0.01, 1.0, 40)
    bs = [b_of_lambda(QUARTIC, l).b for l in lams]
    assert np.all(np.diff(bs) < 0)


def test_phi_limit_at_bottom():
    lams = np.array([1e-1, 1e-2, 1e-3, 1e-4])
    phis = np.array([b_of_lambda(QUARTIC, l).phi for l in lams])
    c1, c0 = np.polyfit(lams, phis, 1)
    assert abs(c0 - math.sqrt(2 * 1.0)) <= 1e-3


def test_zs_reduced_b_finite():
    p = figure_one_problem()
    red = zs_reduce(p, 0.3 + 0.4)
    assert red.lam_tilde == pytest.approx(0.3)
    d = b_of_lambda(p, 0.7)
    assert math.isfinite(d.b) and d.b < 0
    xm, xp = red.x_tilde(np.array([d.x_minus, d.x_plus]))
    want = action_quad(lambda s: float(red.potential(np.array([s]))[0]), red.lam_tilde, xm, xp)
    assert d.action == pytest.approx(want, rel=1e-8)


# -- outer action J ------------------------------------------------------------


def test_j_empty_interval():
    assert j_integral(HARMONIC, 2.0, 1.0) == pytest.approx(0.0, abs=1e-14)


def test_j_harmonic_closed_form():
    # int_2^x sqrt(s^2/4 - 1) ds = x sqrt(x^2-4)/4 - ln((x + sqrt(x^2-4))/2)
    for x in (2.5, 4.0, 9.0):
        want = x * math.sqrt(x * x - 4) / 4 - math.log((x + math.sqrt(x * x - 4)) / 2)
        assert j_integral(HARMONIC, x, 1.0) == pytest.approx(want, rel=1e-10)


def test_j_harmonic_large_x_expansion():
    # remainder is 1/(2x^2) + O(x^-4)
    for x in (9.5, 9.9):
        want = x * x / 4 - math.log(x) - 0.5
        assert j_integral(HARMONIC, x, 1.0) == pytest.approx(want + 0.5 / x**2, abs=2 / x**4)


@pytest.mark.parametrize("lam,x", [(0.05, 0.8), (0.5, 2.0), (1.0, 4.0)])
def test_j_against_quadrature(lam, x):
    xp = turning_points(QUARTIC, lam)[1]
    assert j_integral(QUARTIC, x, lam) == pytest.approx(j_quad(quartic_v, lam, xp, x), rel=1e-10)


def test_j_domain():
    with pytest.raises(DomainError):
        j_integral(HARMONIC, 1.0, 1.0)


def test_j_outer_asymptotics():
    # relative deviation from int_0^x sqrt(V) shrinks like lam ln(1/lam)
    x = 1.0
    base = j_quad(quartic_v, 0.0, 0.0, x)
    lams = np.array([1e-2, 3e-3, 1e-3, 3e-4, 1e-4])
    dev = np.array([abs(j_integral(QUARTIC, x, l) / base - 1) for l in lams])
    ratio = dev / (lams * np.log(1 / lams))
    assert ratio.max() <= 2 * ratio.min() + 1e-12
    assert np.all(np.diff(dev) < 0)


def test_mirror_well_matches_left_side():
    p = schrodinger("x^2/2 + x^3/10", lambda_max=0.5, window=(-3, 6))
    lam = 0.3
    xm = turning_points(p, lam)[0]
    left = get_well(p, lam, mirror=True)
    assert left.turning_point() == pytest.approx(-xm, rel=1e-12)


def test_turning_points_below_well_bottom():
    p = schrodinger("0.5 - 0.5*sech(x)^2 + 0.2", lambda_max=0.6, window=(-8, 8))
    with pytest.raises(DomainError):
        turning_points(p, 0.1)
