"""Special functions: the Airy-type map zeta(t), its inverse t(zeta),
Airy functions, parabolic cylinder functions U(a,z), V(a,z) and the weight
functions used to measure Volterra remainders.

Every scalar entry point returns a :class:`SpecfunValue` carrying a
heuristic absolute error estimate. Array-valued ``*_array`` variants skip
the wrapping and are what the numerical modules call internally.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial, lgamma, log, pi, sqrt

import numpy as np
from scipy import special
from scipy.integrate import solve_ivp

from .errors import AccuracyLossError, DomainError
from .jets import Jet, revert_series

_EPS = np.finfo(float).eps
SQRT_2_OVER_PI = sqrt(2.0 / pi)


@dataclass(frozen=True)
class SpecfunValue:
    value: float
    abs_err_estimate: float

    def __post_init__(self):
        if not (np.isfinite(self.abs_err_estimate) and self.abs_err_estimate >= 0):
            raise AccuracyLossError("error estimate must be finite and non-negative")

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class PCPair:
    """Values of U, dU/dz, V, dV/dz at a common (a, z)."""

    u: float
    u_z: float
    v: float
    v_z: float

    @property
    def wronskian(self) -> float:
        return self.u * self.v_z - self.v * self.u_z


# ---------------------------------------------------------------------------
# zeta(t) and its inverse
# ---------------------------------------------------------------------------

_GL40_X, _GL40_W = np.polynomial.legendre.leggauss(40)
_GL40_X = 0.5 * (_GL40_X + 1.0)
_GL40_W = 0.5 * _GL40_W

ZETA_AT_MINUS_ONE = -((3.0 * pi / 4.0) ** (2.0 / 3.0))

_NEAR_ONE = 0.5  # |t-1| below which the smooth-integrand quadrature is used


def _three_f(u: np.ndarray) -> np.ndarray:
    # 3 * int_0^1 w^2 sqrt(2 + u w^2) dw; analytic for |u| < 2
    w = _GL40_X
    vals = w**2 * np.sqrt(2.0 + np.multiply.outer(u, w**2))
    return 3.0 * vals @ _GL40_W


def zeta_array(t) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(zeta(t), dzeta/dt)`` for an array ``t > -1``."""
    t = np.asarray(t, dtype=float)
    if np.any(~(t > -1.0)):
        raise DomainError("zeta(t) requires t > -1")
    u = t - 1.0
    z = np.empty_like(t)
    dz = np.empty_like(t)
    near = np.abs(u) <= _NEAR_ONE
    if np.any(near):
        f23 = _three_f(u[near]) ** (2.0 / 3.0)
        z[near] = u[near] * f23
        dz[near] = np.sqrt((t[near] + 1.0) / f23)
    hi = u > _NEAR_ONE
    if np.any(hi):
        th = t[hi]
        s = np.sqrt(th * th - 1.0)
        integral = 0.5 * (th * s - np.arccosh(th))
        z[hi] = (1.5 * integral) ** (2.0 / 3.0)
        dz[hi] = np.sqrt((th * th - 1.0) / z[hi])
    lo = u < -_NEAR_ONE
    if np.any(lo):
        tl = t[lo]
        s = np.sqrt(1.0 - tl * tl)
        integral = 0.5 * (np.arccos(tl) - tl * s)
        z[lo] = -((1.5 * integral) ** (2.0 / 3.0))
        dz[lo] = np.sqrt((tl * tl - 1.0) / z[lo])
    return z, dz


def zeta(t: float) -> SpecfunValue:
    """The Airy-type map: ``(3/2 int_1^t sqrt(s^2-1) ds)^(2/3)``, continued to t > -1."""
    t = float(t)
    if not t > -1.0:
        raise DomainError(f"zeta(t) requires t > -1, got {t}")
    z, _ = zeta_array(np.array([t]))
    return SpecfunValue(float(z[0]), 8 * _EPS * max(abs(float(z[0])), _EPS))


# Taylor series of t(zeta) about zeta = 0, obtained by reverting the series
# of zeta(1+u) = u (3 F(u))^(2/3).
_SERIES_TERMS = 24
_SERIES_RADIUS = 0.2


def _t_series_coefficients(n: int) -> np.ndarray:
    k = np.arange(n + 1)
    f = special.binom(0.5, k) * 2.0 ** (0.5 - k) / (2 * k + 3)
    z_of_u = Jet(3.0 * f).power(2.0 / 3.0)
    coeffs = np.concatenate([[0.0], z_of_u.c[:n]])
    b = revert_series(coeffs)
    b[0] = 1.0
    return b


_T_SERIES = _t_series_coefficients(_SERIES_TERMS)


def _t_series(z: np.ndarray) -> np.ndarray:
    poly = np.polynomial.Polynomial(_T_SERIES)
    out = []
    for _ in range(4):
        out.append(poly(z))
        poly = poly.deriv()
    return np.array(out)


def _t_newton(z: np.ndarray) -> np.ndarray:
    lo = np.full_like(z, -1.0)
    hi = np.maximum(3.0, 2.0 * np.sqrt(4.0 / 3.0) * np.abs(z) ** 0.75 + 3.0)
    t = np.where(z > 1.0, np.sqrt(4.0 / 3.0) * np.abs(z) ** 0.75, 1.0 + z / 2 ** (1 / 3))
    t = np.clip(t, -0.999, hi)
    for _ in range(200):
        f, df = zeta_array(t)
        r = f - z
        lo = np.where(r < 0, t, lo)
        hi = np.where(r > 0, t, hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = r / df
        t_new = t - step
        bad = ~((t_new > lo) & (t_new < hi)) | ~np.isfinite(t_new)
        t_new = np.where(bad, 0.5 * (lo + hi), t_new)
        done = np.abs(t_new - t) <= 4 * _EPS * (1.0 + np.abs(t))
        t = t_new
        if np.all(done | (r == 0)):
            break
    else:  # pragma: no cover - bracketing guarantees convergence
        raise AccuracyLossError("t(zeta) Newton iteration did not converge")
    return t


def t_derivs_array(z) -> np.ndarray:
    """Stack ``[t, t', t'', t''']`` evaluated at an array ``z > zeta(-1)``."""
    z = np.asarray(z, dtype=float)
    if np.any(~(z > ZETA_AT_MINUS_ONE)):
        raise DomainError("t(zeta) requires zeta > zeta(-1)")
    out = np.empty((4,) + z.shape)
    near = np.abs(z) <= _SERIES_RADIUS
    if np.any(near):
        out[:, near] = _t_series(z[near])
    far = ~near
    if np.any(far):
        zf = z[far]
        t = _t_newton(zf)
        _, dz = zeta_array(t)
        p = 1.0 / dz
        # differentiate p^2 (t^2-1) = zeta twice
        p1 = p * (1.0 - 2.0 * t * p**3) / (2.0 * zf)
        p2 = -p * (zf * p1**2 / p**2 + 5.0 * t * p**2 * p1 + p**4) / zf
        out[0, far], out[1, far], out[2, far], out[3, far] = t, p, p1, p2
    return out


def t_of_zeta_array(z) -> np.ndarray:
    return t_derivs_array(z)[0]


def t_of_zeta(z: float, derivative: int = 0) -> SpecfunValue:
    """Inverse of :func:`zeta`, or its ``derivative``-th derivative (0..3)."""
    z = float(z)
    if not z > ZETA_AT_MINUS_ONE:
        raise DomainError(f"t(zeta) requires zeta > {ZETA_AT_MINUS_ONE:.6f}, got {z}")
    if derivative not in (0, 1, 2, 3):
        raise DomainError("derivative order must be 0..3")
    d = t_derivs_array(np.array([z]))[:, 0]
    val = float(d[derivative])
    err = 32 * _EPS * max(abs(val), 1.0) * (1 + derivative)
    return SpecfunValue(val, err)


# ---------------------------------------------------------------------------
# Airy
# ---------------------------------------------------------------------------

_AIRY_INDEX = {"Ai": 0, "Ai'": 1, "Aip": 1, "Bi": 2, "Bi'": 3, "Bip": 3}


def airy(kind: str, x: float) -> SpecfunValue:
    """Ai, Ai', Bi or Bi' at real ``x``."""
    if kind not in _AIRY_INDEX:
        raise DomainError(f"unknown Airy kind {kind!r}")
    x = float(x)
    if not np.isfinite(x):
        raise DomainError("Airy argument must be finite")
    val = float(special.airy(x)[_AIRY_INDEX[kind]])
    return SpecfunValue(val, 64 * _EPS * (abs(val) + 1e-300) * (1.0 + abs(x)))


# ---------------------------------------------------------------------------
# Gamma helpers
# ---------------------------------------------------------------------------


def log_gamma_signed(x: float) -> tuple[float, float]:
    """Return ``(log|Gamma(x)|, sign Gamma(x))``; poles give ``(inf, 0)``."""
    x = float(x)
    if x <= 0 and x.is_integer():
        return float("inf"), 0.0
    return float(special.gammaln(x)), float(special.gammasgn(x))


# ---------------------------------------------------------------------------
# Parabolic cylinder functions
# ---------------------------------------------------------------------------


def _asymptotic_threshold(a: float) -> float:
    return max(12.0, 2.0 * sqrt(max(-a, 0.0)) + 16.0, 2.0 * sqrt(max(a, 0.0)) + 12.0)


def _asym_sum(x: float, z: np.ndarray, sign: float):
    """Sum ``sum_s sign^s (x)_{2s} / (s! (2 z^2)^s)`` and its z-derivative."""
    two_z2 = 2.0 * z * z
    term = np.ones_like(z)
    total = np.ones_like(z)
    dtotal = np.zeros_like(z)
    best = np.full_like(z, np.inf)
    active = np.ones(z.shape, dtype=bool)
    s = 0
    while np.any(active) and s < 2000:
        nxt = term * sign * (x + 2 * s) * (x + 2 * s + 1) / ((s + 1) * two_z2)
        s += 1
        grow = np.abs(nxt) > np.abs(term) * 1.0000001
        grow &= np.abs(term) < 1e-3 * np.abs(total)
        active &= ~grow
        term = np.where(active, nxt, 0.0)
        total = total + term
        dtotal = dtotal + term * (-2.0 * s / z)
        best = np.where(active, np.abs(term), best)
        active &= np.abs(term) > 0.25 * _EPS * np.abs(total)
    return total, dtotal, best / np.abs(total)


def _pcf_asymptotic(a: float, z: np.ndarray):
    """Log-scaled U, V for large z: (lnU, mU, mUz, lnV, mV, mVz, relerr)."""
    su, dsu, eu = _asym_sum(0.5 + a, z, -1.0)
    sv, dsv, ev = _asym_sum(0.5 - a, z, 1.0)
    ln_u = -z * z / 4.0 - (a + 0.5) * np.log(z) + np.log(np.abs(su))
    ln_v = 0.5 * log(2.0 / pi) + z * z / 4.0 + (a - 0.5) * np.log(z) + np.log(np.abs(sv))
    mu = np.sign(su)
    mv = np.sign(sv)
    muz = mu * (-z / 2.0 - (a + 0.5) / z + dsu / su)
    mvz = mv * (z / 2.0 + (a - 0.5) / z + dsv / sv)
    return ln_u, mu, muz, ln_v, mv, mvz, np.maximum(eu, ev)


def _weber_rhs(a):
    def rhs(z, y):
        return np.array([y[1], (a + 0.25 * z * z) * y[0]])

    return rhs


def _integrate_scaled(a: float, z0: float, y0, log0: float, targets: np.ndarray, rtol: float):
    """Integrate Weber's equation from z0 to each target with renormalization.

    Returns mantissas (m, m_z) and log scales so that value = m * exp(log).
    """
    order = np.argsort(np.abs(targets - z0))
    out_m = np.empty((2, targets.size))
    out_l = np.empty(targets.size)
    y = np.asarray(y0, dtype=float)
    scale = log0
    z = z0
    rhs = _weber_rhs(a)
    for idx in order:
        zt = targets[idx]
        # step in chunks so the mantissa stays representable
        while abs(zt - z) > 0:
            direction = np.sign(zt - z)
            seg_len = 2.0 / max(1.0, abs(z) / 4.0, sqrt(abs(a)) / 4.0)
            znext = zt if abs(zt - z) <= seg_len else z + direction * seg_len
            # the state has unit norm, so a tiny absolute floor keeps zero components well posed
            sol = solve_ivp(rhs, (z, znext), y, method="DOP853", rtol=rtol, atol=1e-6 * rtol)
            if not sol.success:  # pragma: no cover
                raise AccuracyLossError(f"Weber integration failed: {sol.message}")
            y = sol.y[:, -1]
            nrm = float(np.hypot(y[0], y[1]))
            y = y / nrm
            scale += log(nrm)
            z = znext
        out_m[:, idx] = y
        out_l[idx] = scale
    return out_m, out_l


def _values_at_zero(a: float):
    """(log scale, mantissas) of U(a,0), U'(a,0), V(a,0), V'(a,0)."""
    lg1, s1 = log_gamma_signed(0.75 + 0.5 * a)
    lg2, s2 = log_gamma_signed(0.25 + 0.5 * a)
    lg3, s3 = log_gamma_signed(0.75 - 0.5 * a)
    lg4, s4 = log_gamma_signed(0.25 - 0.5 * a)
    lsp = 0.5 * log(pi)
    l2 = log(2.0)
    u0 = (lsp - (0.5 * a + 0.25) * l2 - lg1, s1)
    u1 = (lsp - (0.5 * a - 0.25) * l2 - lg2, -s2)
    sin3 = np.sin(pi * (0.75 - 0.5 * a))
    sin4 = np.sin(pi * (0.25 - 0.5 * a))
    v0 = ((0.5 * a + 0.25) * l2 - lg3, s3 * sin3)
    v1 = ((0.5 * a + 0.75) * l2 - lg4, s4 * sin4)
    return u0, u1, v0, v1


def _combine(pair):
    (la, ma), (lb, mb) = pair
    ref = max(la if ma != 0 else -np.inf, lb if mb != 0 else -np.inf)
    if not np.isfinite(ref):
        ref = 0.0
    return ref, np.array([ma * np.exp(la - ref), mb * np.exp(lb - ref)])


def pcf_log_array(a: float, z, rtol: float = 1e-13):
    """Log-scaled parabolic cylinder data for ``z >= 0``.

    Returns a dict of arrays ``lu, mu, muz, lv, mv, mvz, err`` with
    ``U = mu*exp(lu)``, ``U_z = muz*exp(lu)`` and likewise for V.
    """
    a = float(a)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if not np.isfinite(a) or np.any(~np.isfinite(z)):
        raise DomainError("parabolic cylinder arguments must be finite")
    if np.any(z < 0):
        raise DomainError("pcf_log_array requires z >= 0")
    za = _asymptotic_threshold(a)
    res = {k: np.empty(z.shape) for k in ("lu", "mu", "muz", "lv", "mv", "mvz", "err")}
    far = z >= za
    if np.any(far):
        lu, mu, muz, lv, mv, mvz, err = _pcf_asymptotic(a, z[far])
        for k, v in zip(("lu", "mu", "muz", "lv", "mv", "mvz", "err"), (lu, mu, muz, lv, mv, mvz, err)):
            res[k][far] = v
    near = ~far
    if np.any(near):
        zn = z[near]
        # U: recessive at +infinity, so integrate backward from the asymptotic zone
        lu, mu, muz, *_ , erra = _pcf_asymptotic(a, np.array([za]))
        y0 = np.array([mu[0], muz[0]])
        nrm = float(np.hypot(*y0))
        m_u, l_u = _integrate_scaled(a, za, y0 / nrm, float(lu[0]) + log(nrm), zn, rtol)
        # V: dominant at +infinity, so integrate forward from closed-form data at 0
        _, _, v0, v1 = _values_at_zero(a)
        lref, mv0 = _combine((v0, v1))
        nrm = float(np.hypot(*mv0))
        m_v, l_v = _integrate_scaled(a, 0.0, mv0 / nrm, lref + log(nrm), zn, rtol)
        res["lu"][near], res["mu"][near], res["muz"][near] = l_u, m_u[0], m_u[1]
        res["lv"][near], res["mv"][near], res["mvz"][near] = l_v, m_v[0], m_v[1]
        res["err"][near] = 100 * rtol + float(erra[0])
    return res


def pcf_array(a: float, z, rtol: float = 1e-13):
    """Arrays ``(U, U_z, V, V_z)`` at real ``z`` (negative z by connection formulas)."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    r = pcf_log_array(a, np.abs(z), rtol)
    with np.errstate(over="raise", under="ignore"):
        try:
            eu = np.exp(r["lu"])
            ev = np.exp(r["lv"])
        except FloatingPointError as exc:
            raise AccuracyLossError("parabolic cylinder value not representable") from exc
    u, uz = r["mu"] * eu, r["muz"] * eu
    v, vz = r["mv"] * ev, r["mvz"] * ev
    neg = z < 0
    if np.any(neg):
        sa, ca = np.sin(pi * a), np.cos(pi * a)
        rg_p = special.rgamma(0.5 + a)
        rg_m = special.rgamma(0.5 - a)
        un = -sa * u + pi * rg_p * v
        unz = -sa * uz + pi * rg_p * vz
        vn = ca * rg_m * u + sa * v
        vnz = ca * rg_m * uz + sa * vz
        # d/dz of f(-z) flips the derivative sign
        u = np.where(neg, un, u)
        v = np.where(neg, vn, v)
        uz = np.where(neg, -unz, uz)
        vz = np.where(neg, -vnz, vz)
    return u, uz, v, vz, r["err"]


def pcf(a: float, z: float, tol: float = 1e-9) -> PCPair:
    """Parabolic cylinder functions U(a,z), V(a,z) and z-derivatives.

    Accurate regime: ``a`` in [-300, 10] and any ``z`` for which the values
    are representable in double precision. Raises
    :class:`AccuracyLossError` if the internal error estimate exceeds ``tol``.
    """
    u, uz, v, vz, err = pcf_array(a, np.array([float(z)]))
    if err[0] > tol:
        raise AccuracyLossError(f"pcf({a}, {z}) error estimate {err[0]:.2e} > {tol:.1e}")
    return PCPair(float(u[0]), float(uz[0]), float(v[0]), float(vz[0]))


# ---------------------------------------------------------------------------
# Weights
# ---------------------------------------------------------------------------


def log_weight_w(a, z, M: float = 4.0):
    a = np.asarray(a, dtype=float)
    z = np.asarray(z, dtype=float)
    if M <= 0 or np.any(a < -0.5 * M * M) or np.any(a > 0) or np.any(z < 0):
        raise DomainError("weight_w requires -M^2/2 <= a <= 0, z >= 0, M > 0")
    zz = np.maximum(z, M)
    return 2.0 * (zz * zz / 4.0 + a * np.log(zz))


def weight_w(a: float, z: float, M: float = 4.0) -> float:
    """Piecewise weight ``(e^{z^2/4} z^a)^2``, frozen at its z = M value below M."""
    return float(np.exp(log_weight_w(a, z, M)))


def log_weight_y(a, t):
    a = np.asarray(a, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(a >= 0) or np.any(t <= -1):
        raise DomainError("weight_y requires a < 0 and t > -1")
    base = -a + a * np.log(-a)
    tt = np.maximum(t, 1.0)
    zt, _ = zeta_array(np.atleast_1d(tt))
    zt = np.maximum(zt.reshape(tt.shape), 0.0)
    return base - 8.0 * a * zt**1.5 / 3.0


def weight_y(a: float, t: float) -> float:
    """Weight for large negative a in the rescaled variable t = z / sqrt(-4a)."""
    return float(np.exp(log_weight_y(a, t)))
