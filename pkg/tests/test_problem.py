import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.optimize import brentq

from bsquant.errors import DomainError, HypothesisError, ParseError
from bsquant.problem import (coefficient_matrix, det_b, figure_one_problem, parse_potential, quadratic, quartic,
                             schrodinger, sech_well, validate_hypotheses, ZSReduction, zakharov_shabat, zs_reduce)


# -- parser -------------------------------------------------------------------


@pytest.mark.parametrize("expr,x,want", [
    ("x^2/4", 3.0, 2.25),
    ("x**2/4", 3.0, 2.25),
    ("-x^2", 2.0, -4.0),
    ("2^3^2", 0.0, 512.0),
    ("1 - 0.5*sech(x)^2", 0.0, 0.5),
    ("0.2*tanh(x)", 1.0, 0.2 * math.tanh(1.0)),
    ("exp(-x)*cosh(x) + sinh(x)", 0.7, math.exp(-0.7) * math.cosh(0.7) + math.sinh(0.7)),
    ("sqrt(1 + x^2) - log(2 + x)", 1.5, math.sqrt(3.25) - math.log(3.5)),
    ("pi*sin(x) + e*cos(x)", 0.3, math.pi * math.sin(0.3) + math.e * math.cos(0.3)),
    ("3e-1*x", 2.0, 0.6),
])
def test_parse_and_evaluate(expr, x, want):
    assert parse_potential(expr).value(x) == pytest.approx(want, rel=1e-14)


def test_lambda_dependence():
    v = parse_potential("x^2/4 + lambda*x^2")
    assert v.uses_lambda
    assert v.value(2.0, 0.5) == pytest.approx(3.0)
    assert not parse_potential("x^2").uses_lambda
    assert parse_potential("lam*x").value(2.0, 3.0) == pytest.approx(6.0)


@pytest.mark.parametrize("expr,pos", [("x^^2", 3), ("(x", 3), ("foo(x)", 1), ("x + ", 5), ("2 $ x", 3)])
def test_parse_error_positions(expr, pos):
    with pytest.raises(ParseError) as info:
        parse_potential(expr)
    assert info.value.position == pos
    assert f"position {pos}" in str(info.value)


def test_domain_errors_in_evaluation():
    with pytest.raises(DomainError):
        parse_potential("sqrt(x)").value(-1.0)
    with pytest.raises(DomainError):
        parse_potential("log(x)").value(0.0)


EXPRESSIONS = ["x^2/2 + x^4/4", "1 - 0.5*sech(x)^2", "0.2*tanh(x)", "x^2*exp(-x^2/8)", "cosh(x) - 1",
               "sqrt(1 + x^2) - 1", "sin(x)^2 + x^3/7", "log(1 + x^2)"]


@given(st.sampled_from(EXPRESSIONS), st.floats(min_value=-3, max_value=3))
def test_derivatives_match_finite_differences(expr, x):
    v = parse_potential(expr)
    d = v(x, 0.0, order=3)
    h = 1e-4
    for k in (1, 2, 3):
        lo = v(x - h, 0.0, order=3)[k - 1]
        hi = v(x + h, 0.0, order=3)[k - 1]
        assert d[k] == pytest.approx((hi - lo) / (2 * h), rel=1e-6, abs=1e-6)


@given(st.sampled_from(EXPRESSIONS), st.floats(min_value=-3, max_value=3))
def test_symbolic_derivative_agrees_with_jet(expr, x):
    v = parse_potential(expr)
    assert v.derivative().value(x) == pytest.approx(v(x, 0.0, order=1)[1], rel=1e-12, abs=1e-12)


def test_potential_arithmetic():
    a, b = parse_potential("x^2"), parse_potential("sin(x)")
    assert (a + b).value(1.0) == pytest.approx(1 + math.sin(1))
    assert (a - b).value(1.0) == pytest.approx(1 - math.sin(1))
    assert (a * b).value(2.0) == pytest.approx(4 * math.sin(2))
    assert (-a).value(3.0) == -9.0
    assert hash(parse_potential("x^2")) == hash(parse_potential("x^2"))


def test_families():
    assert quadratic(0.25).value(2.0) == pytest.approx(1.0)
    assert quartic(0.5, 0.25).value(2.0) == pytest.approx(2 + 4)
    assert sech_well(0.5, 1.0).value(0.0) == pytest.approx(0.5, abs=1e-15)
    assert sech_well(0.5, 1.0).value(30.0) == pytest.approx(1.0, abs=1e-15)


# -- ProblemSpec and validation -------------------------------------------------


def test_problem_is_immutable():
    p = schrodinger("x^2/4")
    with pytest.raises(dataclasses.FrozenInstanceError):
        p.lambda_max = 2.0


def test_window_must_contain_origin():
    with pytest.raises(DomainError):
        schrodinger("x^2", window=(1.0, 5.0))


def test_validation_harmonic_passes():
    rep = validate_hypotheses(schrodinger("x^2/4"))
    assert rep.passed
    assert "not falsified" in rep.summary()


def test_validation_double_well_fails_flank():
    rep = validate_hypotheses(schrodinger("x^4 - x^2"))
    assert not rep.passed
    names = [c.name for c in rep.failures()]
    assert any("V'(x;lam)>0" in n for n in names)
    flank = [c for c in rep.failures() if "V'(x;lam)>0" in c.name][0]
    assert any(abs(x) < 0.71 for x in flank.locations)


def test_validation_figure_one_passes():
    assert figure_one_problem().hypothesis_report.passed


def test_validation_zs_gap_failure():
    # a strong phase gradient drags r_- above r_+ on the far left
    rep = validate_hypotheses(zakharov_shabat("0.1 + 0*x", "x^2", window=(-5, 5)))
    gap = [c for c in rep.checks if c.name.startswith("gap")][0]
    assert not gap.passed


def test_coefficient_matrix_traceless_and_det():
    for p, lams in ((figure_one_problem(), (0.45, 0.7, 0.95)), (schrodinger("x^2/2+x^4/4"), (0.1, 0.8))):
        for lam in lams:
            for x in np.linspace(-5, 5, 23):
                b = coefficient_matrix(p, x, lam)
                assert abs(np.trace(b)) <= 1e-15
                want = np.linalg.det(b).real
                got = float(det_b(p, np.array([x]), lam)[0])
                assert got == pytest.approx(want, rel=1e-12, abs=1e-14)


def test_zs_factored_determinant_value():
    # A(0) = 1/2, S'(0) = 0.2: det B = (lam - r_+)(lam - r_-)
    p = figure_one_problem()
    r_p, r_m = 0.5 - 0.1, -0.5 - 0.1
    assert float(det_b(p, np.array([0.0]), 0.7)[0]) == pytest.approx((0.7 - r_p) * (0.7 - r_m), rel=1e-14)


def test_reflect_flag_maps_lambda():
    p = figure_one_problem()
    q = zakharov_shabat("1 - 0.5*sech(x)^2", "0.2*tanh(x)", reflect=True)
    for x in (-2.0, 0.3, 1.7):
        assert q.r_plus.value(x) == pytest.approx(-p.r_minus.value(x), rel=1e-14)


# -- reduction of the ZS problem --------------------------------------------------


def test_zs_reduce_free_background():
    # min r_+ = 1 here, so build the reduction directly
    p = zakharov_shabat("1 + 0*x", "0*x", lambda_max=0.5)
    red = ZSReduction(p, 0.5, 0.5 - 1.0, 1.0)
    xs = np.array([-3.0, 0.5, 2.0])
    assert np.allclose(red.x_tilde(xs), xs * math.sqrt(1.5), rtol=1e-13)


def test_zs_reduce_unpacks_and_ranges():
    p = figure_one_problem()
    xt_map, vt, lam_t = zs_reduce(p, 0.8)
    assert lam_t == pytest.approx(0.8 - 0.4, rel=1e-12)
    assert float(vt(np.array([0.0]))[0]) == pytest.approx(0.0, abs=1e-14)
    vals = vt(np.linspace(-10, 10, 41))
    assert vals.min() >= -1e-14 and vals.max() < 0.6
    assert float(xt_map(np.array([0.0]))[0]) == 0.0


def test_zs_reduce_domain():
    p = figure_one_problem()
    with pytest.raises(DomainError):
        zs_reduce(p, 0.3)
    with pytest.raises(DomainError):
        zs_reduce(schrodinger("x^2"), 0.5)


def test_zs_reduce_gap_violation():
    p = zakharov_shabat("0.2 + 0*x", "x^2", lambda_max=0.5, window=(-3, 3))
    # lam - r_-(x) = 0.7 + x turns negative for x < -0.7
    with pytest.raises(HypothesisError):
        zs_reduce(p, 0.5)


@pytest.mark.parametrize("lam", [0.5, 0.75, 0.9])
def test_zs_reduce_preserves_action(lam):
    p = figure_one_problem()
    rp = lambda x: p.r_plus.value(x)
    rm = lambda x: p.r_minus.value(x)
    xp = brentq(lambda x: rp(x) - lam, 0.0, 15.0, xtol=1e-14)
    xm = brentq(lambda x: rp(x) - lam, -15.0, 0.0, xtol=1e-14)
    original, _ = quad(lambda x: math.sqrt(max((lam - rp(x)) * (lam - rm(x)), 0.0)), xm, xp, epsabs=1e-13,
                       limit=200)
    red = zs_reduce(p, lam)
    a, b = red.x_tilde(np.array([xm, xp]))
    reduced, _ = quad(lambda s: math.sqrt(max(red.lam_tilde - float(red.potential(np.array([s]))[0]), 0.0)), a, b,
                      epsabs=1e-11, limit=200)
    assert reduced == pytest.approx(original, rel=1e-8)
