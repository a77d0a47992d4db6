"""Ground-truth spectra and the perturbed Weber eigencondition.

``direct_spectrum`` shoots the original system from both truncation points
toward x = 0 in Prüfer form. In the real form eps u' = C(x; lam) u
(Schrödinger: u = (psi, eps psi'); Zakharov-Shabat: w = (alpha + i beta,
alpha - i beta)) the angle theta of u obeys

    eps theta' = c21 cos^2 - c12 sin^2 + (c22 - c11) sin cos,

which is bounded and carries only the direction of the solution, so the
exponential growth never has to be represented. The mismatch of the two
angles at x = 0 is decreasing in lam and crosses a multiple of pi exactly
at each eigenvalue, which also yields the level index.

``solve_perturbed_weber`` integrates the Weber equation perturbed by
eps^2 Q(y), written in z = y / sqrt(eps) as u_zz = (a + z^2/4 + eps Q) u,
and reads off v = U0^{-1} u.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp, trapezoid
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .action import b_of_lambda, get_well
from .errors import DomainError, NumericalError
from .langer import LangerMap, langer_map
from .problem import ProblemSpec
from .quantize import DIRECT, SpectrumEntry, SpectrumResult, cos_residual
from .specfun import log_gamma_signed, log_weight_w, log_weight_y, pcf_array, pcf_log_array

SQRT_PI_2 = math.sqrt(math.pi / 2.0)
WRONSKIAN_UV = math.sqrt(2.0 / math.pi)


class TruncationWarning(UserWarning):
    pass


class MissedRootWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ShootingConfig:
    x_left: float | None = None
    x_right: float | None = None
    ode_tol: float = 1e-11
    renormalization: str = "log_derivative"
    scan_step: float = 0.125  # in units of eps
    decay_exponent: float = 30.0
    batch: int = 256
    threads: int = 1

    def __post_init__(self):
        if not self.ode_tol > 0:
            raise DomainError("ode_tol must be positive")
        if self.renormalization not in ("log_derivative", "magnitude_rescale"):
            raise DomainError("renormalization must be log_derivative or magnitude_rescale")
        if not 0 < self.scan_step <= 0.25:
            raise DomainError("scan_step must lie in (0, 1/4] (units of eps)")
        if not self.decay_exponent > 0:
            raise DomainError("decay_exponent must be positive")
        if self.threads < 1:
            raise DomainError("threads must be >= 1")


# ---------------------------------------------------------------------------
# Direct shooting
# ---------------------------------------------------------------------------


def _real_coefficients(p: ProblemSpec, x: float, lams: np.ndarray):
    if p.is_zs:
        a = float(p.amplitude.value(x))
        mu = lams + 0.5 * float(p.s_prime.value(x))
        return a, mu, -mu, -a
    v = p.potential.value(x, lams) if p.potential.uses_lambda else float(p.potential.value(x))
    return 0.0, 1.0, v - lams, 0.0


def _initial_angle(p: ProblemSpec, x: float, lams: np.ndarray, decaying_right: bool) -> np.ndarray:
    c11, c12, c21, c22 = _real_coefficients(p, x, lams)
    det = c11 * c22 - c12 * c21
    if np.any(det >= 0):
        raise DomainError(f"truncation point x = {x:.6g} is not in a classically forbidden zone")
    kappa = np.sqrt(-det)
    z = np.zeros_like(lams)
    # eigenvector rows picked so that one component keeps its sign: atan2 is then continuous in lam
    if decaying_right:
        return np.arctan2(-kappa - c11 + z, c12 + z)
    return np.arctan2(c21 + z, kappa - c22 + z)


def _shoot(p: ProblemSpec, eps: float, lams: np.ndarray, x_from: float, rtol: float) -> np.ndarray:
    theta0 = _initial_angle(p, x_from, lams, decaying_right=x_from > 0)

    def rhs(x, th):
        c11, c12, c21, c22 = _real_coefficients(p, x, lams)
        c, s = np.cos(th), np.sin(th)
        return (c21 * c * c - c12 * s * s + (c22 - c11) * s * c) / eps

    sol = solve_ivp(rhs, (x_from, 0.0), theta0, method="DOP853", rtol=rtol, atol=rtol)
    if not sol.success:
        raise NumericalError(f"shooting integration failed: {sol.message}")
    return sol.y[:, -1]


def _shoot_rescaled(p: ProblemSpec, eps: float, lams: np.ndarray, x_from: float, rtol: float) -> np.ndarray:
    """The same end angle from the linear system, rescaled piecewise and unwrapped on a sampling grid."""
    theta0 = _initial_angle(p, x_from, lams, decaying_right=x_from > 0)
    probe = np.linspace(x_from, 0.0, 257)
    rate = 0.0
    for x in probe:
        c = _real_coefficients(p, float(x), lams)
        rate = max(rate, float(np.max(np.abs(c[0]) + np.abs(c[1]) + np.abs(c[2]) + np.abs(c[3]))))
    rate = 2.0 * rate / eps
    n_lam = lams.size
    # e^50 growth per piece at most, and well under a quarter turn between samples
    n_pieces = max(1, int(math.ceil(abs(x_from) * rate / 50.0)))
    n_samples = max(8, int(math.ceil(abs(x_from) * rate / (0.25 * math.pi * n_pieces))))
    edges = np.linspace(x_from, 0.0, n_pieces + 1)

    def rhs(x, y):
        c11, c12, c21, c22 = _real_coefficients(p, x, lams)
        u, w = y[:n_lam], y[n_lam:]
        return np.concatenate([c11 * u + c12 * w, c21 * u + c22 * w]) / eps

    y = np.concatenate([np.cos(theta0), np.sin(theta0)])
    theta = theta0.copy()
    for x0, x1 in zip(edges[:-1], edges[1:]):
        ts = np.linspace(x0, x1, n_samples + 1)
        sol = solve_ivp(rhs, (x0, x1), y, method="DOP853", t_eval=ts, rtol=rtol, atol=rtol * 1e-3)
        if not sol.success:
            raise NumericalError(f"shooting integration failed: {sol.message}")
        ang = np.unwrap(np.arctan2(sol.y[n_lam:], sol.y[:n_lam]), axis=1)
        theta = theta + (ang[:, -1] - ang[:, 0])
        end = sol.y[:, -1]
        scale = np.hypot(end[:n_lam], end[n_lam:])
        y = end / np.concatenate([scale, scale])
    return theta


def angle_mismatch(p: ProblemSpec, eps: float, lams, cfg: ShootingConfig, x_left: float, x_right: float) -> np.ndarray:
    """theta_-(0) - theta_+(0) for each lam; eigenvalues where this is in pi*Z."""
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    rtol = min(1e-6, cfg.ode_tol * 0.1)
    # chunking depends on batch only, so results do not depend on the thread count
    size = cfg.batch
    chunks = [lams[k:k + size] for k in range(0, lams.size, size)]

    shoot = _shoot if cfg.renormalization == "log_derivative" else _shoot_rescaled

    def one(chunk):
        return shoot(p, eps, chunk, x_left, rtol) - shoot(p, eps, chunk, x_right, rtol)

    if cfg.threads == 1 or len(chunks) == 1:
        return np.concatenate([one(c) for c in chunks])
    with ThreadPoolExecutor(cfg.threads) as pool:
        return np.concatenate(list(pool.map(one, chunks)))


def truncation_points(p: ProblemSpec, eps: float, lam_hi: float, cfg: ShootingConfig) -> tuple[float, float]:
    """Truncation points where the WKB decay exponent at lam_hi reaches cfg.decay_exponent."""
    lo, hi = p.window
    target = cfg.decay_exponent * eps
    pts = []
    for mirror, edge in ((False, hi), (True, -lo)):
        override = cfg.x_right if not mirror else (None if cfg.x_left is None else -cfg.x_left)
        if override is not None:
            pts.append(float(override))
            continue
        if p.reduced_lambda(lam_hi) <= 0:
            start = 0.0
            well = None
        else:
            well = get_well(p, float(lam_hi), mirror)
            start = well.turning_point()
        edge_in = edge * (1 - 1e-9)

        def decay(x):
            if well is None:
                return _forbidden_integral(p, lam_hi, 0.0, x if not mirror else -x) - target
            return float(well.outer_integral(np.array([x]))[0]) - target

        if decay(edge_in) < 0:
            warnings.warn(f"window edge gives decay exponent below {cfg.decay_exponent:g}; truncation may be insufficient",
                          TruncationWarning, stacklevel=3)
            pts.append(edge_in)
        else:
            pts.append(brentq(decay, start * (1 + 1e-12) + 1e-300, edge_in, xtol=1e-10))
    return -pts[1], pts[0]


def _forbidden_integral(p: ProblemSpec, lam: float, x0: float, x1: float) -> float:
    xs = np.linspace(min(x0, x1), max(x0, x1), 401)
    from .problem import det_b
    v = np.sqrt(np.maximum(-det_b(p, xs, lam), 0.0))
    return float(trapezoid(v, xs))


def _eigen_index_offset(p: ProblemSpec, eps, cfg, xl, xr) -> int:
    lo = p.lambda_min + 1e-9 * max(1.0, abs(p.lambda_min)) + 1e-6 * eps
    d0 = float(angle_mismatch(p, eps, [lo], cfg, xl, xr)[0])
    return math.ceil(d0 / math.pi - 1e-9) - 1


def _illinois(fun, a, b, fa, fb, tol, maxiter=80):
    """Vectorized Illinois iteration for sign-bracketed roots."""
    a, b, fa, fb = (np.array(v, dtype=float) for v in (a, b, fa, fb))
    side = np.zeros(a.size, dtype=int)
    for _ in range(maxiter):
        c = (a * fb - b * fa) / (fb - fa)
        c = np.where(np.isfinite(c) & (c > np.minimum(a, b)) & (c < np.maximum(a, b)), c, 0.5 * (a + b))
        fc = fun(c)
        left = np.sign(fc) == np.sign(fa)
        # replace a when fc shares sign with fa
        new_a = np.where(left, c, a)
        new_fa = np.where(left, fc, fa)
        new_b = np.where(left, b, c)
        new_fb = np.where(left, fb, fc)
        new_fb = np.where(left & (side == 1), new_fb * 0.5, new_fb)
        new_fa = np.where(~left & (side == -1), new_fa * 0.5, new_fa)
        side = np.where(left, 1, -1)
        a, fa, b, fb = new_a, new_fa, new_b, new_fb
        if np.all(np.abs(b - a) <= tol) or np.all(fc == 0):
            break
    return np.where(np.abs(fa) < np.abs(fb), a, b)


def direct_spectrum(p: ProblemSpec, eps: float, lam_window=None, cfg: ShootingConfig | None = None,
                    annotate: bool = True) -> SpectrumResult:
    """Eigenvalues in ``lam_window`` by two-sided Prüfer shooting and Wronskian matching at x = 0."""
    cfg = cfg or ShootingConfig()
    if not eps > 0:
        raise DomainError("eps must be positive")
    lo, hi = lam_window if lam_window is not None else (p.lambda_min, p.lambda_max)
    lo, hi = float(lo), float(hi)
    if not hi > lo:
        raise DomainError("empty lambda window")
    xl, xr = truncation_points(p, eps, hi, cfg)
    j0 = _eigen_index_offset(p, eps, cfg, xl, xr)

    def nu(lams):
        return (j0 * math.pi - angle_mismatch(p, eps, lams, cfg, xl, xr)) / math.pi

    step = cfg.scan_step * eps
    n_pts = max(2, int(math.ceil((hi - lo) / step)) + 1)
    grid = np.linspace(lo, hi, n_pts)
    vals = nu(grid)
    if np.any(np.diff(vals) < -1e-6):
        warnings.warn("angle mismatch is not monotone on the scan grid; roots may be missed",
                      MissedRootWarning, stacklevel=2)
    jumps = np.diff(np.floor(vals))
    if np.any(jumps > 1):
        warnings.warn("more than one level between scan points", MissedRootWarning, stacklevel=2)
    ns, a_list, b_list, fa_list, fb_list = [], [], [], [], []
    for k in range(n_pts - 1):
        for n in range(int(math.floor(vals[k])) + 1, int(math.floor(vals[k + 1])) + 1):
            ns.append(n)
            a_list.append(grid[k])
            b_list.append(grid[k + 1])
            fa_list.append(vals[k] - n)
            fb_list.append(vals[k + 1] - n)
    # a level sitting exactly on a grid point
    for k in range(n_pts):
        if vals[k] == math.floor(vals[k]) and int(vals[k]) not in ns:
            ns.append(int(vals[k]))
            a_list.append(grid[k]); b_list.append(grid[k]); fa_list.append(0.0); fb_list.append(0.0)
    if not ns:
        return SpectrumResult(float(eps), ())
    ns_arr = np.array(ns, dtype=float)

    def f(lams):
        return nu(lams) - ns_arr

    roots = _illinois(f, a_list, b_list, fa_list, fb_list, cfg.ode_tol)
    order = np.argsort(roots)
    entries = []
    for i in order:
        lam = float(roots[i])
        n = int(ns[i])
        a_idx, res = math.nan, math.nan
        if annotate and p.reduced_lambda(lam) > 0:
            try:
                a_idx = b_of_lambda(p, lam).b / eps
                res = cos_residual(p, eps, lam)
            except DomainError:
                pass
        entries.append(SpectrumEntry(n, lam, a_idx, res, DIRECT))
    return SpectrumResult(float(eps), tuple(entries))


def eigenvalue_count(p: ProblemSpec, eps: float, lo: float, hi: float, cfg: ShootingConfig | None = None,
                     lam_ref: float | None = None) -> int:
    """Number of eigenvalues in (lo, hi] from the angle mismatch alone."""
    cfg = cfg or ShootingConfig()
    xl, xr = truncation_points(p, eps, lam_ref if lam_ref is not None else hi, cfg)
    d = angle_mismatch(p, eps, [lo, hi], cfg, xl, xr)
    return int(math.floor(d[0] / math.pi) - math.floor(d[1] / math.pi))


# ---------------------------------------------------------------------------
# Perturbed Weber system
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeberSide:
    v_at_0: np.ndarray
    u_at_0: np.ndarray  # (u, u_z) in the z variable, normalized as U0 v
    r1_sup: float
    r2_sup: float
    y_max: float


@dataclass(frozen=True)
class PerturbedWeberSolution:
    eps: float
    b: float
    a: float
    v_plus_at_0: np.ndarray | None
    v_minus_at_0: np.ndarray | None
    r1_sup: float
    r2_sup: float
    wronskian_lhs: float | None
    weight: str = "W"
    sides: dict = field(default_factory=dict, repr=False)


class QTable:
    """Q(y) on the mapped window, as a cubic spline in y."""

    def __init__(self, m: LangerMap, points: int = 1601, shrink: float = 0.98):
        lo, hi = m.problem.window
        xs = np.linspace(lo * shrink, hi * shrink, points)
        d = m.derivatives(xs)
        q = m.q_at_x(xs)
        self.y = d[0]
        self.q = q
        self.spline = CubicSpline(self.y, q)
        self.y_min, self.y_max = float(self.y[0]), float(self.y[-1])

    def __call__(self, y):
        return self.spline(y)


def _weight_log(a: float, z: np.ndarray, M: float):
    if a >= -0.5 * M * M:
        return log_weight_w(min(a, 0.0), z, M), "W"
    return log_weight_y(a, z / math.sqrt(-4.0 * a)), "Y"


def _plus_side(qfun, eps: float, a: float, y_max: float, M: float, rtol: float, n_out: int = 1200) -> WeberSide:
    """Decaying-at-+infinity solution of the perturbed Weber equation, normalized by v -> (1, 0)."""
    se = math.sqrt(eps)
    z_max = y_max / se
    z_turn = 2.0 * math.sqrt(max(-a, 0.0))
    z_sw = min(max(z_turn + 4.0, 6.0), z_max)
    q_end = float(qfun(y_max))
    # tail beyond y_max: Q ~ c / y^2 gives r1 ~ eps Q(y_max)/2
    L0 = math.log1p(0.5 * eps * q_end)
    d0 = -eps * q_end / z_max
    zs_out = np.linspace(0.0, z_max, n_out)
    r1 = np.zeros(n_out)
    r2 = np.zeros(n_out)
    wlog, _ = _weight_log(a, zs_out, M)

    if z_sw < z_max:
        pc0 = pcf_log_array(a, np.array([z_max]))
        rho_u0 = float(pc0["muz"][0] / pc0["mu"][0])

        def rhs(z, y):
            rho, dl = y[0], y[1]
            qq = eps * qfun(se * z)
            return [a + 0.25 * z * z - rho * rho, qq - dl * (dl + 2.0 * rho), dl]

        def jac(z, y):
            rho, dl = y[0], y[1]
            return [[-2 * rho, 0, 0], [-2 * dl, -2 * dl - 2 * rho, 0], [0, 1, 0]]

        far = zs_out >= z_sw
        t_eval = np.concatenate([zs_out[far][::-1], [z_sw]]) if np.any(far) else np.array([z_sw])
        t_eval = np.unique(np.clip(t_eval, z_sw, z_max))[::-1]
        sol = solve_ivp(rhs, (z_max, z_sw), [rho_u0, d0, L0], method="Radau", jac=jac, t_eval=t_eval,
                        rtol=rtol, atol=1e-14)
        if not sol.success:
            raise NumericalError(f"perturbed Weber log-form integration failed: {sol.message}")
        zz = sol.t
        rho_u, dl, L = sol.y
        pc = pcf_log_array(a, zz)
        uv = pc["mu"] * pc["mv"] * np.exp(pc["lu"] + pc["lv"])
        v1m1 = np.expm1(L) - np.exp(L) * dl * uv / WRONSKIAN_UV
        wl, _ = _weight_log(a, zz, M)
        r2_here = np.exp(L + 2 * pc["lu"] + wl) * dl / WRONSKIAN_UV
        idx = np.searchsorted(zs_out, zz)
        ok = (idx < n_out)
        ok &= np.isclose(zs_out[np.minimum(idx, n_out - 1)], zz)
        r1[idx[ok]] = np.abs(v1m1[ok])
        r2[idx[ok]] = np.abs(r2_here[ok])
        # data at the switch point
        u_sw = float(pc["mu"][-1]) * math.exp(float(pc["lu"][-1]) + float(L[-1]))
        uz_sw = u_sw * (float(pc["muz"][-1] / pc["mu"][-1]) + float(dl[-1]))
    else:
        u, uz, *_ = pcf_array(a, np.array([z_sw]))
        u_sw = float(u[0]) * math.exp(L0)
        uz_sw = float(uz[0]) * math.exp(L0) + u_sw * d0

    near_mask = zs_out < z_sw
    z_near = np.concatenate([[z_sw], zs_out[near_mask][::-1]])
    z_near = np.unique(z_near)[::-1]

    def lin(z, y):
        return [y[1], (a + 0.25 * z * z + eps * qfun(se * z)) * y[0]]

    sol = solve_ivp(lin, (z_sw, 0.0), [u_sw, uz_sw], method="DOP853", t_eval=z_near, rtol=rtol, atol=1e-300)
    if not sol.success:
        raise NumericalError(f"perturbed Weber linear integration failed: {sol.message}")
    zz = sol.t
    uu, uuz = sol.y
    U, Uz, V, Vz, _ = pcf_array(a, zz)
    v1 = (uu * Vz - uuz * V) / WRONSKIAN_UV
    v2 = (U * uuz - Uz * uu) / WRONSKIAN_UV
    wl, _ = _weight_log(a, zz, M)
    idx = np.searchsorted(zs_out, zz)
    ok = (idx < n_out) & np.isclose(zs_out[np.minimum(idx, n_out - 1)], zz)
    r1[idx[ok]] = np.abs(v1[ok] - 1.0)
    r2[idx[ok]] = np.abs(v2[ok] * np.exp(wl[ok]))
    return WeberSide(v_at_0=np.array([v1[-1], v2[-1]]), u_at_0=np.array([uu[-1], uuz[-1]]),
                     r1_sup=float(r1.max()), r2_sup=float(r2.max()), y_max=y_max)


def _zero_coefficients(a: float):
    """sqrt(pi/2)/Gamma(1/2 - a) times 2 U U_z, U V_z + U_z V and 2 V V_z at z = 0."""
    lg, sg = log_gamma_signed(0.5 - a)
    base = 0.5 * math.log(math.pi / 2.0) - lg
    U, Uz, V, Vz, _ = pcf_array(a, np.array([0.0]))
    U, Uz, V, Vz = float(U[0]), float(Uz[0]), float(V[0]), float(Vz[0])
    scale = sg * math.exp(base)
    return 2 * U * Uz * scale, (U * Vz + Uz * V) * scale, 2 * V * Vz * scale


def solve_perturbed_weber(m: LangerMap, eps: float, side: str = "both", y_max: float | None = None,
                          M: float = 4.0, rtol: float = 1e-11, qtable: QTable | None = None) -> PerturbedWeberSolution:
    """Solutions of the perturbed Weber system decaying at +infinity and/or -infinity."""
    if side not in ("plus", "minus", "both"):
        raise DomainError("side must be plus, minus or both")
    if not eps > 0:
        raise DomainError("eps must be positive")
    qt = qtable or _qtable(m)
    a = m.b / eps
    ym = min(-qt.y_min, qt.y_max) if y_max is None else float(y_max)
    if ym > qt.y_max or -ym < qt.y_min:
        raise DomainError("y_max exceeds the mapped window")
    sides = {}
    if side in ("plus", "both"):
        sides["plus"] = _plus_side(qt, eps, a, ym, M, rtol)
    if side in ("minus", "both"):
        sides["minus"] = _plus_side(lambda y: qt(-y), eps, a, ym, M, rtol)
    wl = None
    if "plus" in sides and "minus" in sides:
        wl = _normalized_wronskian(a, sides["plus"].v_at_0, sides["minus"].v_at_0)
    _, wname = _weight_log(a, np.array([0.0]), M)
    return PerturbedWeberSolution(
        eps=float(eps), b=m.b, a=a,
        v_plus_at_0=sides["plus"].v_at_0 if "plus" in sides else None,
        v_minus_at_0=sides["minus"].v_at_0 if "minus" in sides else None,
        r1_sup=max(s.r1_sup for s in sides.values()),
        r2_sup=max(s.r2_sup for s in sides.values()),
        wronskian_lhs=wl, weight=wname, sides=sides)


def _normalized_wronskian(a: float, vp: np.ndarray, vm: np.ndarray) -> float:
    """sqrt(pi/2) W[u+, u-](0) / (eps^{1/2} v1+ v1- Gamma(1/2 - a)) from v+-(0)."""
    cuu, cuv, cvv = _zero_coefficients(a)
    num = cuu * vp[0] * vm[0] + cuv * (vp[0] * vm[1] + vp[1] * vm[0]) + cvv * vp[1] * vm[1]
    return float(-num / (vp[0] * vm[0]))


_QCACHE: dict = {}


def _qtable(m: LangerMap) -> QTable:
    key = id(m)
    hit = _QCACHE.get(key)
    if hit is None or hit[0] is not m:
        if len(_QCACHE) > 64:
            _QCACHE.clear()
        hit = (m, QTable(m))
        _QCACHE[key] = hit
    return hit[1]


def wronskian_eigencondition(m, eps: float, lam: float | None = None) -> float:
    """Normalized Wronskian of the two decaying perturbed-Weber solutions; cos(-pi a) + O(eps)."""
    if isinstance(m, ProblemSpec):
        if lam is None:
            raise DomainError("lam is required when passing a problem")
        m = langer_map(m, float(lam))
    elif lam is not None and abs(float(lam) - m.lam) > 0:
        m = langer_map(m.problem, float(lam))
    return solve_perturbed_weber(m, eps, "both").wronskian_lhs
