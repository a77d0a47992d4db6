"""Reference computations that share no code with the package."""

import math

import mpmath as mp
import numpy as np
from scipy.integrate import quad
from scipy.linalg import eigh_tridiagonal

mp.mp.dps = 30


def zeta_closed_form(t):
    """(3/2 int_1^t sqrt(s^2-1) ds)^(2/3), continued below t = 1, in closed form."""
    t = mp.mpf(t)
    if t >= 1:
        inner = (t * mp.sqrt(t * t - 1) - mp.acosh(t)) / 2
        return float(mp.cbrt((1.5 * inner) ** 2))
    inner = (mp.acos(t) - t * mp.sqrt(1 - t * t)) / 2
    return -float(mp.cbrt((1.5 * inner) ** 2))


def pcf_mp(a, z):
    """U, U_z, V, V_z from mpmath."""
    a, z = mp.mpf(a), mp.mpf(z)
    u = mp.pcfu(a, z)
    v = mp.pcfv(a, z)
    uz = mp.diff(lambda s: mp.pcfu(a, s), z)
    vz = mp.diff(lambda s: mp.pcfv(a, s), z)
    return float(u), float(uz), float(v), float(vz)


def fd_levels(V, eps, L, n_points, count):
    """Lowest ``count`` eigenvalues of -eps^2 psi'' + V psi on [-L, L], Dirichlet, second order."""
    x = np.linspace(-L, L, n_points + 2)[1:-1]
    h = x[1] - x[0]
    d = 2 * eps**2 / h**2 + V(x)
    e = np.full(n_points - 1, -eps**2 / h**2)
    return eigh_tridiagonal(d, e, select="i", select_range=(0, count - 1))[0]


def fd_levels_extrapolated(V, eps, L, count, n_points=4096):
    """Richardson extrapolation of two finite-difference grids (h and h/2)."""
    coarse = fd_levels(V, eps, L, n_points, count)
    fine = fd_levels(V, eps, L, 2 * n_points + 1, count)
    return (4 * fine - coarse) / 3


def action_quad(V, lam, x_minus, x_plus):
    """int sqrt(lam - V) dx between the turning points, with the square-root endpoint behaviour as a weight."""

    def smooth(x):
        den = (x - x_minus) * (x_plus - x)
        return math.sqrt(max(lam - V(x), 0.0) / den) if den > 0 else 0.0

    val, _ = quad(smooth, x_minus, x_plus, weight="alg", wvar=(0.5, 0.5), epsabs=1e-15, epsrel=1e-13, limit=400)
    return val


def j_quad(V, lam, x_plus, x):
    """int_{x_+}^x sqrt(V - lam) by adaptive quadrature."""

    def smooth(s):
        return math.sqrt(max(V(s) - lam, 0.0) / (s - x_plus)) if s > x_plus else 0.0

    val, _ = quad(smooth, x_plus, x, weight="alg", wvar=(0.5, 0.0), epsabs=1e-15, epsrel=1e-13, limit=400)
    return val


def pcf_at_zero(a):
    """U, U', V, V' at z = 0 from the gamma-function closed forms (mpmath)."""
    a = mp.mpf(a)
    q, h = mp.mpf(1) / 4, mp.mpf(3) / 4
    u = mp.sqrt(mp.pi) * 2 ** (-a / 2 - q) * mp.rgamma(h + a / 2)
    uz = -mp.sqrt(mp.pi) * 2 ** (-a / 2 + q) * mp.rgamma(q + a / 2)
    v = 2 ** (a / 2 + q) * mp.sin(mp.pi * (h - a / 2)) * mp.rgamma(h - a / 2)
    vz = 2 ** (a / 2 + h) * mp.sin(mp.pi * (q - a / 2)) * mp.rgamma(q - a / 2)
    return u, uz, v, vz
