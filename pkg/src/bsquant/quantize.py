"""Bohr-Sommerfeld levels and the quantization-rule residual."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .action import Well, b_of_lambda
from .errors import DomainError
from .problem import ProblemSpec

BOHR_SOMMERFELD = "bohr_sommerfeld"
DIRECT = "direct"


@dataclass(frozen=True)
class SpectrumEntry:
    n: int
    lam: float
    a: float
    cos_residual: float
    source: str


@dataclass(frozen=True)
class SpectrumResult:
    eps: float
    entries: tuple = field(default_factory=tuple)

    def __post_init__(self):
        lams = [e.lam for e in self.entries]
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise ValueError("spectrum entries must be strictly increasing")

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([e.lam for e in self.entries])

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def _action(p: ProblemSpec, lam: float, exact_sum: bool = False) -> float:
    w = Well(p, lam)
    if not exact_sum:
        return w.action()
    u, wt = np.polynomial.legendre.leggauss(96)
    theta = 0.5 * math.pi * u
    xt1 = w.xt_derivs(w.sigma * np.sin(theta))[0]
    terms = 0.5 * math.pi * wt * w.lam_tilde * np.cos(theta) ** 2 * xt1
    return math.fsum(terms.tolist())


def cos_residual(p: ProblemSpec, eps: float, lam: float) -> float:
    """cos(action(lam)/eps); accumulation is exact-summed for large phases."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    act = _action(p, float(lam), exact_sum=True)
    phase = act / eps
    # reduce against pi*(n + 1/2) so that the residual near a level is formed without cancellation
    k = math.floor(phase / math.pi)
    r = phase - k * math.pi
    return float((-1) ** (k % 2) * math.cos(r))


def low_lying_index(p: ProblemSpec, eps: float, lam: float) -> float:
    """a = b(lam)/eps."""
    return b_of_lambda(p, float(lam)).b / eps


def bs_eigenvalues(p: ProblemSpec, eps: float, lam_max: float | None = None) -> SpectrumResult:
    """All levels with action(lam) = pi eps (n + 1/2) and lam <= lam_max."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    lam_max = p.lambda_max if lam_max is None else float(lam_max)
    lo = p.lambda_min
    if not lam_max > lo:
        return SpectrumResult(eps, ())
    top = _action(p, lam_max)
    n_max = int(math.floor(top / (math.pi * eps) - 0.5))
    if n_max < 0:
        return SpectrumResult(eps, ())
    # coarse monotone table for brackets
    grid = lo + (lam_max - lo) * np.linspace(0.0, 1.0, 65)[1:] ** 2
    acts = np.array([_action(p, float(l)) for l in grid[:-1]] + [top])
    if np.any(np.diff(acts) <= 0):
        raise DomainError("action is not increasing in lambda on the requested window")
    grid = np.concatenate([[lo], grid])
    acts = np.concatenate([[0.0], acts])
    entries = []
    for n in range(n_max + 1):
        target = math.pi * eps * (n + 0.5)
        k = int(np.searchsorted(acts, target))
        a, b = float(grid[k - 1]), float(grid[k])
        if a == lo:
            a = lo + 1e-300 if lo == 0 else math.nextafter(lo, math.inf)
            a = max(a, lo + 1e-16 * max(1.0, abs(lo)))
        lam = brentq(lambda l: _action(p, l) - target, a, b, xtol=1e-13 * eps, rtol=4 * np.finfo(float).eps,
                     maxiter=200)
        tp = b_of_lambda(p, lam)
        entries.append(SpectrumEntry(n, float(lam), tp.b / eps, cos_residual(p, eps, lam), BOHR_SOMMERFELD))
    return SpectrumResult(float(eps), tuple(entries))
