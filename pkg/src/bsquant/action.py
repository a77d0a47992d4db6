"""Turning points, the square-root coordinate s(x) and action integrals.

Both problem kinds are handled through one reduced picture. At fixed lambda a
well is described by s(x)^2 (the potential measured from its minimum), a
positive metric w(x)^2, and the reduced level lam~. The Schrödinger case has
w = 1 and lam~ = lam; the Zakharov-Shabat case has s^2 = r_+ - min r_+,
w^2 = lam - r_- and lam~ = lam - min r_+. In both cases -det B = (s^2 - lam~) w^2,
and integrals of sqrt(+-det B) dx become integrals in s against x~'(s) = w x'(s).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import pi

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, NumericalError
from .jets import Jet, shift_series
from .problem import ProblemSpec

SERIES_ORDER = 14
SERIES_RADIUS = 0.1
ACTION_NODES = 96
_TABLE_POINTS = 2049


@dataclass(frozen=True)
class TurningPointData:
    lam: float
    x_minus: float
    x_plus: float
    b: float
    phi: float
    action: float
    lam_tilde: float

    @property
    def sigma(self) -> float:
        return float(np.sqrt(self.lam_tilde))


def _gl(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


class Well:
    """The reduced single-well picture of a problem at a fixed lambda.

    With ``mirror=True`` the well is reflected, x -> -x, so that left-side
    quantities can be computed with right-side formulas.
    """

    def __init__(self, problem: ProblemSpec, lam: float, mirror: bool = False):
        self.problem = problem
        self.lam = float(lam)
        self.mirror = bool(mirror)
        self.lam_tilde = float(problem.reduced_lambda(self.lam))
        if not self.lam_tilde > 0:
            raise DomainError(f"lambda = {lam:.6g} is at or below the bottom of the well")
        self.sigma = float(np.sqrt(self.lam_tilde))
        self._series = self._s_series()
        self._build_table()

    # -- raw coefficient jets ------------------------------------------------
    def _xarg(self, x, order):
        xj = x if isinstance(x, Jet) else Jet.variable(np.asarray(x, dtype=float), order)
        return -xj if self.mirror else xj

    def s2_jet(self, x, order: int = 3) -> Jet:
        return self.problem.s2_jet(self._xarg(x, order), self.lam, order)

    def w_jet(self, x, order: int = 2) -> Jet:
        return self.problem.w2_jet(self._xarg(x, order), self.lam, order).sqrt()

    def w_derivs(self, x, order: int = 2) -> np.ndarray:
        """[w, w', ...] at x (derivatives in x)."""
        x = np.asarray(x, dtype=float)
        if not self.problem.is_zs:
            out = np.zeros((order + 1,) + x.shape)
            out[0] = 1.0
            return out
        return self.w_jet(x, order).derivatives()

    # -- s(x) ----------------------------------------------------------------
    def _s_series(self) -> np.ndarray:
        """Polynomial coefficients of s(x) = x*sqrt(s^2/x^2) about x = 0."""
        c = self.s2_jet(0.0, SERIES_ORDER + 2).c
        h = c[2:]
        if not h[0] > 0:
            raise DomainError("the well has no positive curvature at x = 0")
        q = Jet(h).sqrt().c
        return np.concatenate([[0.0], q])

    def s_jet(self, x, order: int = 3) -> Jet:
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        out = np.zeros((order + 1, flat.size))
        near = np.abs(flat) <= SERIES_RADIUS
        if np.any(near):
            out[:, near] = shift_series(self._series, flat[near], order).c
        far = ~near
        if np.any(far):
            s2 = self.s2_jet(flat[far], order)
            if np.any(s2.value <= 0):
                raise DomainError("s^2 is not positive away from x = 0")
            out[:, far] = (s2.sqrt() * np.sign(flat[far])).c
        return Jet(out.reshape((order + 1,) + x.shape))

    def s(self, x) -> np.ndarray:
        return self.s_jet(x, 0).value

    def s_derivs(self, x, order: int = 3) -> np.ndarray:
        return self.s_jet(x, order).derivatives()

    # -- inverse -------------------------------------------------------------
    def _build_table(self):
        lo, hi = self.problem.window
        if self.mirror:
            lo, hi = -hi, -lo
        xs = np.linspace(lo, hi, _TABLE_POINTS)
        ss = self.s(xs)
        if np.any(np.diff(ss) < 0) or not ss[0] < 0 < ss[-1]:
            raise DomainError("s(x) is not monotone on the window; the well hypotheses fail")
        self._xs, self._ss = xs, ss

    @property
    def s_range(self):
        return float(self._ss[0]), float(self._ss[-1])

    def x_of_s(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        flat = np.atleast_1d(s).ravel().copy()
        if np.any(flat < self._ss[0]) or np.any(flat > self._ss[-1]):
            raise DomainError("s outside the range attained on the window")
        idx = np.clip(np.searchsorted(self._ss, flat), 1, self._ss.size - 1)
        a, b = self._xs[idx - 1], self._xs[idx]
        sa, sb = self._ss[idx - 1], self._ss[idx]
        x = a + (flat - sa) * (b - a) / (sb - sa)
        for _ in range(50):
            d = self.s_derivs(x, 1)
            f = d[0] - flat
            a = np.where(f < 0, x, a)
            b = np.where(f > 0, x, b)
            step = f / d[1]
            xn = x - step
            bad = (xn <= a) | (xn >= b) | ~np.isfinite(xn)
            xn = np.where(bad, 0.5 * (a + b), xn)
            done = np.abs(xn - x) <= 4e-16 * (1.0 + np.abs(x))
            x = xn
            if np.all(done):
                break
        else:
            raise NumericalError("x_of_s Newton iteration did not converge")
        return x.reshape(s.shape)

    def x_derivs(self, s) -> np.ndarray:
        """[x, x', x'', x'''] as functions of s."""
        x = self.x_of_s(s)
        d = self.s_derivs(x, 3)
        s1, s2, s3 = d[1], d[2], d[3]
        return np.array([x, 1.0 / s1, -s2 / s1**3, (3 * s2**2 - s1 * s3) / s1**5])

    def xt_derivs(self, s, with_x: bool = False):
        """[x~', x~'', x~'''] as functions of s, where dx~ = w dx."""
        xd = self.x_derivs(s)
        x, x1, x2, x3 = xd
        w = self.w_derivs(x, 2)
        out = np.array([
            w[0] * x1,
            w[1] * x1**2 + w[0] * x2,
            w[2] * x1**3 + 3 * w[1] * x1 * x2 + w[0] * x3,
        ])
        return (out, x) if with_x else out

    # -- integrals -----------------------------------------------------------
    def action(self, nodes: int = ACTION_NODES) -> float:
        """int sqrt(-det B) between the turning points, via s = sigma sin(theta)."""
        u, wt = _gl(nodes)
        theta = 0.5 * pi * u
        xt1 = self.xt_derivs(self.sigma * np.sin(theta))[0]
        return float(0.5 * pi * np.sum(wt * self.lam_tilde * np.cos(theta) ** 2 * xt1))

    def sqrt_f_jet(self, x, order: int = 2) -> Jet:
        """Jet of sqrt((s^2 - lam~) w^2) for x beyond the turning point."""
        f = (self.s2_jet(x, order) - self.lam_tilde) * self.problem.w2_jet(self._xarg(x, order), self.lam, order)
        return f.sqrt()

    def _tau_integral(self, tau_x: np.ndarray, nodes: int) -> np.ndarray:
        u, wt = _gl(nodes)
        npan = np.maximum(1, np.ceil(tau_x).astype(int))
        out = np.zeros(tau_x.size)
        for k in np.unique(npan):
            sel = npan == k
            edges = tau_x[sel][:, None] * np.linspace(0, 1, k + 1)[None, :]
            a, b = edges[:, :-1, None], edges[:, 1:, None]
            tau = 0.5 * (a + b) + 0.5 * (b - a) * u
            xt1 = self.xt_derivs(self.sigma * np.cosh(tau))[0]
            out[sel] = np.sum(0.5 * (b - a) * wt * self.lam_tilde * np.sinh(tau) ** 2 * xt1, axis=(1, 2))
        return out

    def outer_integral(self, x, nodes: int = 48) -> np.ndarray:
        """J(x) = int_{x_+}^{x} sqrt(-det B) dx for x >= x_+ on this well's right side.

        Near the turning point s = sigma cosh(tau) removes the square-root
        endpoint. Further out the integrand is smooth in x and is integrated
        there on geometrically graded panels, which stays accurate where s(x)
        saturates.
        """
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        ratio = self.s(flat) / self.sigma
        if np.any(ratio < 1 - 1e-14):
            raise DomainError("outer integral requires x beyond the right turning point")
        cut = min(2.0, 0.5 * (1.0 + self._ss[-1] / self.sigma))
        near = ratio <= cut
        out = np.zeros(flat.size)
        if np.any(near):
            out[near] = self._tau_integral(np.arccosh(np.maximum(ratio[near], 1.0)), nodes)
        if np.any(~near):
            x_c = float(self.x_of_s(cut * self.sigma))
            base = self._tau_integral(np.array([np.arccosh(cut)]), nodes)[0]
            far = flat[~near]
            h0 = min(0.25, x_c - float(self.x_of_s(self.sigma)))
            edges = [x_c]
            h = h0
            while edges[-1] < far.max():
                edges.append(edges[-1] + h)
                h = min(0.25, 1.5 * h)
            edges = np.array(edges)
            u, wt = _gl(24)
            a, b = edges[:-1, None], edges[1:, None]
            vals = self.sqrt_f_jet(0.5 * (a + b) + 0.5 * (b - a) * u, 0).value
            cum = np.concatenate([[0.0], np.cumsum(np.sum(0.5 * (b - a) * wt * vals, axis=1))])
            k = np.clip(np.searchsorted(edges, far, side="right") - 1, 0, edges.size - 2)
            lo = edges[k][:, None]
            pts = 0.5 * (lo + far[:, None]) + 0.5 * (far[:, None] - lo) * u
            part = np.sum(0.5 * (far[:, None] - lo) * wt * self.sqrt_f_jet(pts, 0).value, axis=1)
            out[~near] = base + cum[k] + part
        return out.reshape(x.shape)

    def turning_point(self) -> float:
        """Right turning point of this (possibly mirrored) well."""
        return float(self.x_of_s(self.sigma))


@lru_cache(maxsize=512)
def get_well(problem: ProblemSpec, lam: float, mirror: bool = False) -> Well:
    return Well(problem, lam, mirror)


def turning_points(p: ProblemSpec, lam: float) -> tuple[float, float]:
    """(x_-, x_+) with s^2(x) = lam~ found by Brent on each flank."""
    lt = p.reduced_lambda(lam)
    if not lt > 0:
        raise DomainError("lambda must lie above the bottom of the well")
    lo, hi = p.window

    def f(x):
        return float(p.s2_value(x, lam)) - lt

    if f(0.0) >= 0:
        raise DomainError(f"lambda = {lam:.6g} does not lie above the bottom of the well at x = 0")
    if f(hi) <= 0 or f(lo) <= 0:
        raise DomainError(f"lambda = {lam:.6g} exceeds the potential on the window edge; cannot bracket")
    xp = brentq(f, 0.0, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
    xm = brentq(f, lo, 0.0, xtol=1e-15, rtol=1e-15, maxiter=200)
    return float(xm), float(xp)


def s_coordinate(p: ProblemSpec, x, lam: float = 0.0):
    """s(x) = sgn(x) sqrt(s^2(x))."""
    out = get_well(p, float(lam) if lam > 0 else _probe_lambda(p), False).s(x)
    return out if np.ndim(out) else float(out)


def _probe_lambda(p: ProblemSpec) -> float:
    # s depends on lambda only through energy-dependent V; any admissible value works otherwise
    return p.lambda_min + 1e-3 * max(p.lambda_max - p.lambda_min, 1e-3)


def x_of_s(p: ProblemSpec, s, lam: float = 0.0, derivative: int = 0):
    """Inverse of s_coordinate; ``derivative`` in 0..3 selects x, x', x'', x'''."""
    w = get_well(p, float(lam) if lam > 0 else _probe_lambda(p), False)
    if derivative == 0:
        out = w.x_of_s(s)
    else:
        out = w.x_derivs(np.asarray(s, dtype=float))[derivative]
    return out if np.ndim(out) else float(out)


def action_integral(p: ProblemSpec, lam: float, nodes: int = ACTION_NODES) -> float:
    return get_well(p, float(lam)).action(nodes)


def b_of_lambda(p: ProblemSpec, lam: float) -> TurningPointData:
    lam = float(lam)
    well = get_well(p, lam)
    act = well.action()
    b = -act / pi
    xm, xp = turning_points(p, lam)
    return TurningPointData(lam=lam, x_minus=xm, x_plus=xp, b=b, phi=well.lam_tilde / (-b),
                            action=act, lam_tilde=well.lam_tilde)


def j_integral(p: ProblemSpec, x, lam: float):
    """Outer action J(x) = int_{x_+}^{x} sqrt(-(det B)) for x >= x_+."""
    well = get_well(p, float(lam))
    xp = well.turning_point()
    xa = np.asarray(x, dtype=float)
    if np.any(xa < xp - 1e-12 * max(1.0, abs(xp))):
        raise DomainError("j_integral requires x >= x_+")
    out = well.outer_integral(np.maximum(xa, xp))
    return out if np.ndim(out) else float(out)
