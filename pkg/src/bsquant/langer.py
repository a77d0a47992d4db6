"""Langer transformation y = g(x; lam) onto the Weber model m(y) = y^2/4 + b.

The map is assembled from two half-maps sharing b: the right one acts on the
well itself, the left one on its mirror image, and g(x) = -g_left(-x) for
x < 0. Each half-map uses the inner representation
g = 2 sqrt(-b) t(xi I^(2/3)) near the well and the outer representation
g = 2 sqrt(-b) t((3J/(4|b|))^(2/3)) beyond the switch point. Derivatives are
carried exactly by truncated Taylor arithmetic, so g'' and g''' never come
from finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .action import TurningPointData, Well, b_of_lambda, get_well
from .errors import DomainError, NumericalError
from .jets import Jet
from .problem import ProblemSpec, coefficient_matrix, det_b
from .specfun import ZETA_AT_MINUS_ONE, t_derivs_array, zeta_array

DELTA0 = 0.5
I_NODES = 64
GAUGE_MARGIN = 1e-6

_U, _UW = np.polynomial.legendre.leggauss(I_NODES)
_U = 0.5 * (_U + 1.0)
_UW = 1.5 * _UW * _U**2  # q = u^3, dq = 3u^2 du, half-interval factor folded in


def _t_jet(eta: Jet, order: int) -> Jet:
    """t(eta) for a jet argument (order <= 3)."""
    d = t_derivs_array(eta.value)
    fact = (1.0, 1.0, 2.0, 6.0)
    return eta.compose([d[k] / fact[k] for k in range(order + 1)])


def _t_prime_jet(eta: Jet) -> Jet:
    """t'(eta) for a jet argument of order <= 2."""
    d = t_derivs_array(eta.value)
    return eta.compose([d[1], d[2], 0.5 * d[3]][: eta.order + 1])


class HalfMap:
    """Langer map of one side of the well (x >= 0 of the given Well)."""

    def __init__(self, well: Well, b: float, delta0: float = DELTA0):
        self.well = well
        self.b = b
        self.beta = float(np.sqrt(-b))
        self.sigma = well.sigma
        self.phi = well.lam_tilde / (-b)
        self.x_turn = well.turning_point()
        self.x_switch = max(2.0 * self.x_turn, delta0)

    # -- inner -------------------------------------------------------------
    def xi(self, x) -> np.ndarray:
        s = self.well.s(x)
        return zeta_array(s / self.sigma)[0]

    def i_jet(self, xi) -> Jet:
        """I(xi) with two xi-derivatives, by Gauss-Legendre in u (q = u^3)."""
        xi = np.asarray(xi, dtype=float)
        u2 = _U**2
        eta = Jet(np.stack([xi[..., None] * u2, np.broadcast_to(u2, xi.shape + u2.shape),
                            np.zeros(xi.shape + u2.shape)]))
        s_q = _t_jet(eta, 2) * self.sigma
        xt = self.well.xt_derivs(s_q.value)
        x1 = s_q.compose([xt[0], xt[1], 0.5 * xt[2]])
        return Jet(0.5 * self.phi * np.sum(x1.c * _UW, axis=-1))

    def i_value(self, xi) -> np.ndarray:
        return self.i_jet(xi).value

    def inner_jet(self, x) -> Jet:
        """g and three x-derivatives from the inner representation."""
        x = np.asarray(x, dtype=float)
        sd = self.well.s_derivs(x, 0)
        xi, _ = zeta_array(sd[0] / self.sigma)
        if np.any(~(xi > ZETA_AT_MINUS_ONE)):
            raise DomainError("inner representation requires x beyond the left turning point")
        I = self.i_jet(xi)
        xij = Jet.variable(xi, 2)
        Z = xij * I.power(2.0 / 3.0)
        A = I.power(-1.0 / 3.0)
        T = t_derivs_array(xi)
        tp_xi = xij.compose([T[1], T[2], 0.5 * T[3]])
        g1_xi = _t_prime_jet(Z) * A / tp_xi * np.sqrt(self.phi)
        # xi as a function of x~
        xt, _ = self.well.xt_derivs(sd[0], with_x=True)
        d1 = 1.0 / (self.sigma * T[1] * xt[0])
        dd1 = -(T[2] * xt[0] + self.sigma * T[1] ** 2 * xt[1]) / (self.sigma * (T[1] * xt[0]) ** 2)
        xi_of_xt = Jet(np.stack([xi, d1, 0.5 * d1 * dd1]))
        g1_xt = xi_of_xt.compose(g1_xi.c)
        g0 = 2.0 * self.beta * t_derivs_array(Z.value)[0]
        return self._to_x(g0, g1_xt, x)

    def _to_x(self, g0, g1_xt: Jet, x) -> Jet:
        """Integrate a jet of dg/dx~ once and compose with x~(x)."""
        c = g1_xt.c
        g_xt = [g0, c[0], c[1] / 2.0, c[2] / 3.0]
        w = self.well.w_derivs(x, 2)
        xt_of_x = Jet(np.stack([np.zeros_like(w[0]), w[0], 0.5 * w[1], w[2] / 6.0]))
        return xt_of_x.compose(g_xt)

    # -- outer -------------------------------------------------------------
    def outer_jet(self, x) -> Jet:
        x = np.asarray(x, dtype=float)
        if np.any(x <= self.x_turn):
            raise DomainError("outer representation requires x beyond the turning point")
        J0 = self.well.outer_integral(x)
        f = self.well.sqrt_f_jet(x, 2).c
        J = Jet(np.stack([J0, f[0], f[1] / 2.0, f[2] / 3.0]))
        m = (J * (3.0 / (4.0 * self.beta**2))).power(2.0 / 3.0)
        return _t_jet(m, 3) * (2.0 * self.beta)

    def jet(self, x) -> Jet:
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        out = np.empty((4, flat.size))
        outer = flat >= self.x_switch
        if np.any(outer):
            out[:, outer] = self.outer_jet(flat[outer]).c
        if np.any(~outer):
            out[:, ~outer] = self.inner_jet(flat[~outer]).c
        return Jet(out.reshape((4,) + x.shape))


_SIGNS = np.array([-1.0, 1.0, -1.0, 1.0])


class LangerMap:
    """The Langer transformation of a problem at one value of lambda."""

    def __init__(self, problem: ProblemSpec, lam: float, delta0: float = DELTA0):
        self.problem = problem
        self.lam = float(lam)
        self.tp: TurningPointData = b_of_lambda(problem, self.lam)
        self.b = self.tp.b
        self.phi = self.tp.phi
        self.right = HalfMap(get_well(problem, self.lam, False), self.b, delta0)
        self.left = HalfMap(get_well(problem, self.lam, True), self.b, delta0)
        self._table = None

    # -- evaluation ----------------------------------------------------------
    def derivatives(self, x) -> np.ndarray:
        """Stack [g, g', g'', g'''] at x, branch-selected."""
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        out = np.empty((4, flat.size))
        pos = flat >= 0
        if np.any(pos):
            out[:, pos] = self.right.jet(flat[pos]).derivatives()
        if np.any(~pos):
            out[:, ~pos] = self.left.jet(-flat[~pos]).derivatives() * _SIGNS[:, None]
        return out.reshape((4,) + x.shape)

    def g(self, x):
        return self.derivatives(x)[0]

    def __call__(self, x):
        return self.g(x)

    def xi(self, x):
        """Inner variable zeta(s(x)/sqrt(lam~))."""
        return self.right.xi(x)

    def big_i(self, xi):
        """I(xi; sqrt(lam~)) of the right half-map."""
        return self.right.i_value(xi)

    def g_inner(self, x) -> np.ndarray:
        """[g, g', g'', g'''] from the unreflected inner representation (x > x_-)."""
        return self.right.inner_jet(np.asarray(x, dtype=float)).derivatives()

    def g_outer(self, x) -> np.ndarray:
        """[g, ...] from the outer representation; x > x_+ or x < x_-."""
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        out = np.empty((4, flat.size))
        pos = flat > 0
        if np.any(pos):
            out[:, pos] = self.right.outer_jet(flat[pos]).derivatives()
        if np.any(~pos):
            out[:, ~pos] = self.left.outer_jet(-flat[~pos]).derivatives() * _SIGNS[:, None]
        return out.reshape((4,) + x.shape)

    # -- inverse -------------------------------------------------------------
    def _grid(self):
        if self._table is None:
            lo, hi = self.problem.window
            xs = np.linspace(lo, hi, 801)
            ys = self.g(xs)
            if np.any(np.diff(ys) <= 0):
                raise NumericalError("Langer map is not increasing on the window")
            self._table = (xs, ys)
        return self._table

    @property
    def y_range(self):
        xs, ys = self._grid()
        return float(ys[0]), float(ys[-1])

    def inverse(self, y) -> np.ndarray:
        """x = g^{-1}(y) by safeguarded Newton seeded from a monotone table."""
        y = np.asarray(y, dtype=float)
        xs, ys = self._grid()
        flat = np.atleast_1d(y).ravel()
        if np.any(flat < ys[0]) or np.any(flat > ys[-1]):
            raise DomainError("y outside the mapped range of the window")
        idx = np.clip(np.searchsorted(ys, flat), 1, ys.size - 1)
        a, b = xs[idx - 1], xs[idx]
        x = a + (flat - ys[idx - 1]) * (b - a) / (ys[idx] - ys[idx - 1])
        for _ in range(60):
            d = self.derivatives(x)
            f = d[0] - flat
            a = np.where(f < 0, x, a)
            b = np.where(f > 0, x, b)
            xn = x - f / d[1]
            bad = (xn <= a) | (xn >= b) | ~np.isfinite(xn)
            xn = np.where(bad, 0.5 * (a + b), xn)
            done = np.abs(xn - x) <= 1e-15 * (1.0 + np.abs(x))
            x = xn
            if np.all(done):
                break
        else:
            raise NumericalError("inverse Langer map did not converge")
        return x.reshape(y.shape)

    # -- perturbation kernel -------------------------------------------------
    def q_at_x(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        d = self.derivatives(x)
        g1, g2, g3 = d[1], d[2], d[3]
        q = -0.75 * g2**2 / g1**4 + 0.5 * g3 / g1**3
        if self.problem.is_zs:
            R = self.problem.w2_jet(x, self.lam, 2).derivatives()
            q = q - (-0.75 * R[1] ** 2 / R[0] ** 2 + 0.5 * R[2] / R[0]) / g1**2
        return q

    def q(self, y) -> np.ndarray:
        return self.q_at_x(self.inverse(y))


@lru_cache(maxsize=128)
def langer_map(problem: ProblemSpec, lam: float, delta0: float = DELTA0) -> LangerMap:
    return LangerMap(problem, float(lam), delta0)


def g_outer(m: LangerMap, x):
    return m.g_outer(x)[0]


def g_inner(m: LangerMap, x):
    """(g, g') from the inner representation."""
    d = m.g_inner(x)
    return d[0], d[1]


def g_derivatives(m: LangerMap, x):
    """(g', g'', g''') with the branch chosen by position."""
    d = m.derivatives(x)
    return d[1], d[2], d[3]


def q_kernel(m: LangerMap, y):
    return m.q(y)


def langer_ode_residual(m: LangerMap, x) -> np.ndarray:
    """g'^2 (g^2/4 + b) + det B, scaled by 1 + |det B|."""
    d = m.derivatives(x)
    db = det_b(m.problem, x, m.lam)
    return (d[1] ** 2 * (0.25 * d[0] ** 2 + m.b) + db) / (1.0 + np.abs(db))


# ---------------------------------------------------------------------------
# K(xi)
# ---------------------------------------------------------------------------


def k_function(xi):
    """The universal combination built from t and its derivatives; identically 1."""
    xi = np.asarray(xi, dtype=float)
    if np.any(~(xi > ZETA_AT_MINUS_ONE)):
        raise DomainError("K(xi) requires xi > zeta(-1)")
    t, t1, t2, t3 = t_derivs_array(xi)
    u2 = _U**2
    inner = t_derivs_array(xi[..., None] * u2)
    n = np.sum(_UW * inner[0], axis=-1)
    a = np.sum(_UW * inner[1] * u2, axis=-1)
    return (a / t1 - 3.0 * t * t2 / t1**2
            + (t2 / t1**2 - 2.0 * xi * t3 / t1**2 + 2.0 * xi * t2**2 / t1**3) * n)


# ---------------------------------------------------------------------------
# Gauge transformation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaugeAssembly:
    G: np.ndarray
    H: np.ndarray
    residual: float
    y: float


def model_matrix(y: float, b: float) -> np.ndarray:
    return np.array([[0.0, 1.0], [0.25 * y * y + b, 0.0]])


def gauge_matrix(m: LangerMap, x: float) -> np.ndarray:
    """The constant-rho gauge G(x) (rho = 0 for Schrödinger, rho = +i for Zakharov-Shabat)."""
    d = m.derivatives(np.array([float(x)]))[:, 0]
    g1 = d[1]
    if m.problem.is_zs:
        R = float(m.problem.w2_value(x, m.lam))
        return np.array([[R, 1j * g1], [1j * R, g1]]) / np.sqrt(2.0 * g1 * R)
    return np.diag([g1**-0.5, g1**0.5])


def gauge_assembly(m: LangerMap, x: float, margin: float = GAUGE_MARGIN) -> GaugeAssembly:
    x = float(x)
    db = float(det_b(m.problem, x, m.lam))
    if abs(db) <= margin:
        raise DomainError(f"x = {x:.6g} is within the turning-point margin (|det B| = {abs(db):.3g})")
    d = m.derivatives(np.array([x]))[:, 0]
    g, g1, g2 = d[0], d[1], d[2]
    G = gauge_matrix(m, x)
    if m.problem.is_zs:
        R = m.problem.w2_jet(np.array([x]), m.lam, 1).derivatives()[:, 0]
        p22 = (g2 / g1 - R[1] / R[0]) / (2.0 * g1)
    else:
        p22 = g2 / (2.0 * g1**2)
    H = np.array([[0.0, 0.0], [-p22, 0.0]])
    B = coefficient_matrix(m.problem, x, m.lam)
    conj = np.linalg.solve(G, B @ G) / g1
    residual = float(np.max(np.abs(conj - model_matrix(g, m.b))))
    return GaugeAssembly(G=G, H=H, residual=residual, y=float(g))
