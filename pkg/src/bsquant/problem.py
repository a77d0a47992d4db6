"""Spectral problem definitions.

Potentials are written in a small expression language over ``x`` (and the
spectral parameter ``lam`` for energy-dependent wells), parsed to a tree and
evaluated with truncated Taylor arithmetic so that derivatives to any order
come for free. A :class:`ProblemSpec` wraps either a Schrödinger potential
V(x; lam) or a Zakharov-Shabat pair (A, S) and knows its coefficient matrix,
Riemann invariants and reduction to Schrödinger form.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from math import e as _E, pi as _PI

import numpy as np

from .errors import DomainError, HypothesisError, ParseError
from .jets import Jet

# ---------------------------------------------------------------------------
# Expression language
# ---------------------------------------------------------------------------

FUNCTIONS = ("sech", "tanh", "exp", "cosh", "sinh", "sin", "cos", "sqrt", "log")
_CONSTANTS = {"pi": _PI, "e": _E}
_VARIABLES = {"x": "x", "lam": "lam", "lambda": "lam"}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^(),]))"
)


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos == len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos + 1)
        kind = m.lastgroup
        start = m.start(kind)
        value = m.group(kind)
        if kind == "op" and value == "**":
            value = "^"
        tokens.append((kind, value, start + 1))
        pos = m.end()
    tokens.append(("end", "", len(text) + 1))
    return tokens


class _Parser:
    """Recursive descent; ``^`` binds tighter than unary minus and is right-associative."""

    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, v, pos = self.take()
        if v != value:
            found = "end of input" if kind == "end" else repr(v)
            raise ParseError(f"expected {value!r}, found {found}", pos)

    def parse(self):
        tree = self.expr()
        kind, v, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {v!r}", pos)
        return tree

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = ("bin", op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = ("bin", op, node, self.unary())
        return node

    def unary(self):
        kind, v, _ = self.peek()
        if kind == "op" and v in ("+", "-"):
            self.take()
            inner = self.unary()
            return ("neg", inner) if v == "-" else inner
        return self.power()

    def power(self):
        base = self.primary()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return ("bin", "^", base, self.unary())
        return base

    def primary(self):
        kind, v, pos = self.take()
        if kind == "num":
            return ("num", float(v))
        if kind == "name":
            if v in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return ("call", v, arg)
            if v in _VARIABLES:
                return ("var", _VARIABLES[v])
            if v in _CONSTANTS:
                return ("num", _CONSTANTS[v])
            raise ParseError(f"unknown identifier {v!r}", pos)
        if kind == "op" and v == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(v)
        raise ParseError(f"expected a number, variable or '(' but found {found}", pos)


def _num(v: float):
    return ("num", float(v))


def _is_num(node, value=None) -> bool:
    return node[0] == "num" and (value is None or node[1] == value)


def _mk(op, a, b):
    """Build a binary node with light constant folding."""
    if _is_num(a) and _is_num(b):
        x, y = a[1], b[1]
        return _num({"+": x + y, "-": x - y, "*": x * y, "/": x / y if y else np.inf, "^": x**y}[op])
    if op == "+":
        if _is_num(a, 0.0):
            return b
        if _is_num(b, 0.0):
            return a
    if op == "-":
        if _is_num(b, 0.0):
            return a
        if _is_num(a, 0.0):
            return ("neg", b)
    if op == "*":
        if _is_num(a, 0.0) or _is_num(b, 0.0):
            return _num(0.0)
        if _is_num(a, 1.0):
            return b
        if _is_num(b, 1.0):
            return a
    if op == "/" and _is_num(b, 1.0):
        return a
    if op == "^" and _is_num(b, 1.0):
        return a
    return ("bin", op, a, b)


def _neg(a):
    if _is_num(a):
        return _num(-a[1])
    return ("neg", a)


def _depends(node, var: str) -> bool:
    tag = node[0]
    if tag == "num":
        return False
    if tag == "var":
        return node[1] == var
    if tag == "neg":
        return _depends(node[1], var)
    if tag == "call":
        return _depends(node[2], var)
    return _depends(node[2], var) or _depends(node[3], var)


def _diff(node, var: str = "x"):
    """Symbolic derivative of an expression tree."""
    tag = node[0]
    if tag == "num":
        return _num(0.0)
    if tag == "var":
        return _num(1.0 if node[1] == var else 0.0)
    if tag == "neg":
        return _neg(_diff(node[1], var))
    if tag == "call":
        f, u = node[1], node[2]
        du = _diff(u, var)
        if _is_num(du, 0.0):
            return _num(0.0)
        outer = {
            "sech": lambda: _neg(_mk("*", node, ("call", "tanh", u))),
            "tanh": lambda: _mk("-", _num(1.0), _mk("^", ("call", "tanh", u), _num(2.0))),
            "exp": lambda: node,
            "cosh": lambda: ("call", "sinh", u),
            "sinh": lambda: ("call", "cosh", u),
            "sin": lambda: ("call", "cos", u),
            "cos": lambda: _neg(("call", "sin", u)),
            "sqrt": lambda: _mk("/", _num(0.5), node),
            "log": lambda: _mk("/", _num(1.0), u),
        }[f]()
        return _mk("*", outer, du)
    op, a, b = node[1], node[2], node[3]
    da, db = _diff(a, var), _diff(b, var)
    if op in ("+", "-"):
        return _mk(op, da, db)
    if op == "*":
        return _mk("+", _mk("*", da, b), _mk("*", a, db))
    if op == "/":
        return _mk("/", _mk("-", _mk("*", da, b), _mk("*", a, db)), _mk("^", b, _num(2.0)))
    # power
    if not _depends(b, var):
        if _is_num(da, 0.0):
            return _num(0.0)
        return _mk("*", _mk("*", b, _mk("^", a, _mk("-", b, _num(1.0)))), da)
    # general a^b = exp(b log a)
    return _mk("*", node, _mk("+", _mk("*", db, ("call", "log", a)), _mk("/", _mk("*", b, da), a)))


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _unparse(node, parent: int = 0) -> str:
    tag = node[0]
    if tag == "num":
        v = node[1]
        s = repr(float(v))
        if s.endswith(".0"):
            s = s[:-2]
        return f"({s})" if v < 0 else s
    if tag == "var":
        return node[1]
    if tag == "neg":
        s = "-" + _unparse(node[1], 3)
        return f"({s})" if parent >= 3 else s
    if tag == "call":
        return f"{node[1]}({_unparse(node[2])})"
    op = node[1]
    p = _PREC[op]
    if op == "^":
        s = f"{_unparse(node[2], p + 1)}^{_unparse(node[3], p)}"
    else:
        s = f"{_unparse(node[2], p)}{op}{_unparse(node[3], p + 1)}"
    return f"({s})" if p < parent else s


_FLOAT_FUNCS = {
    "sech": lambda v: 1.0 / np.cosh(v),
    "tanh": np.tanh,
    "exp": np.exp,
    "cosh": np.cosh,
    "sinh": np.sinh,
    "sin": np.sin,
    "cos": np.cos,
    "sqrt": None,
    "log": None,
}


def _eval_float(node, x, lam):
    tag = node[0]
    if tag == "num":
        return node[1]
    if tag == "var":
        return x if node[1] == "x" else lam
    if tag == "neg":
        return -_eval_float(node[1], x, lam)
    if tag == "call":
        u = _eval_float(node[2], x, lam)
        if node[1] == "sqrt":
            if np.any(np.asarray(u) < 0):
                raise DomainError("sqrt of a negative number during evaluation")
            return np.sqrt(u)
        if node[1] == "log":
            if np.any(np.asarray(u) <= 0):
                raise DomainError("log of a non-positive number during evaluation")
            return np.log(u)
        return _FLOAT_FUNCS[node[1]](u)
    op = node[1]
    a = _eval_float(node[2], x, lam)
    b = _eval_float(node[3], x, lam)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return a / b
    if _is_num(node[3]) and float(node[3][1]).is_integer():
        return a ** int(node[3][1])
    return np.power(a, b)


def _eval_jet(node, xj: Jet, lam):
    tag = node[0]
    if tag == "num":
        return node[1]
    if tag == "var":
        return xj if node[1] == "x" else lam
    if tag == "neg":
        v = _eval_jet(node[1], xj, lam)
        return -v
    if tag == "call":
        u = _eval_jet(node[2], xj, lam)
        if not isinstance(u, Jet):
            u = Jet.constant(u, xj.order, xj.c.shape[1:])
        return getattr(u, node[1])()
    op = node[1]
    a = _eval_jet(node[2], xj, lam)
    b = _eval_jet(node[3], xj, lam)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if not isinstance(a, Jet) and not isinstance(b, Jet):
            return a / b
        if not isinstance(a, Jet):
            return b.reciprocal() * a
        return a / b
    if not isinstance(a, Jet):
        if not isinstance(b, Jet):
            return np.power(a, b)
        return b.__rpow__(a)
    return a ** b


class PotentialFn:
    """A scalar coefficient function of ``x`` (optionally also of ``lam``).

    ``fn(x, lam, order)`` returns the stacked derivatives ``[f, f', ...]``;
    :meth:`jet` accepts a :class:`Jet` for ``x`` to compose with an inner
    series.
    """

    def __init__(self, tree, source: str | None = None):
        self.tree = tree
        self.source = source if source is not None else _unparse(tree)
        self.uses_lambda = _depends(tree, "lam")

    def __repr__(self) -> str:
        return f"PotentialFn({self.source!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, PotentialFn) and self.tree == other.tree

    def __hash__(self) -> int:
        return hash(self.source)

    def value(self, x, lam=0.0):
        x = np.asarray(x, dtype=float)
        out = _eval_float(self.tree, x, lam)
        return np.broadcast_to(np.asarray(out, dtype=float), np.broadcast_shapes(x.shape, np.shape(lam))).copy()

    def jet(self, x, lam=0.0, order: int = 3) -> Jet:
        xj = x if isinstance(x, Jet) else Jet.variable(x, order)
        out = _eval_jet(self.tree, xj, lam)
        if not isinstance(out, Jet):
            shape = np.broadcast_shapes(xj.c.shape[1:], np.shape(out))
            out = Jet.constant(out, xj.order, shape)
        elif out.c.shape[1:] != xj.c.shape[1:]:
            shape = np.broadcast_shapes(xj.c.shape[1:], out.c.shape[1:])
            out = Jet(np.broadcast_to(out.c, (out.c.shape[0],) + shape).copy())
        return out

    def __call__(self, x, lam=0.0, order: int = 3) -> np.ndarray:
        return self.jet(np.asarray(x, dtype=float), lam, order).derivatives()

    def derivative(self) -> "PotentialFn":
        return PotentialFn(_diff(self.tree, "x"))

    # algebra for assembling derived coefficients
    def _wrap(self, other):
        return other.tree if isinstance(other, PotentialFn) else _num(other)

    def __add__(self, other):
        return PotentialFn(_mk("+", self.tree, self._wrap(other)))

    def __radd__(self, other):
        return PotentialFn(_mk("+", self._wrap(other), self.tree))

    def __sub__(self, other):
        return PotentialFn(_mk("-", self.tree, self._wrap(other)))

    def __rsub__(self, other):
        return PotentialFn(_mk("-", self._wrap(other), self.tree))

    def __mul__(self, other):
        return PotentialFn(_mk("*", self.tree, self._wrap(other)))

    __rmul__ = __mul__

    def __neg__(self):
        return PotentialFn(_neg(self.tree))


def parse_potential(expr: str) -> PotentialFn:
    """Parse an expression such as ``"1 - 0.5*sech(x)^2"``.

    Raises :class:`ParseError` with the 1-based column of the problem.
    """
    if not isinstance(expr, str):
        raise ParseError("expression must be a string", 1)
    if not expr.strip():
        raise ParseError("empty expression", 1)
    return PotentialFn(_Parser(expr).parse(), expr.strip())


# Built-in families
def quadratic(c: float = 0.25) -> PotentialFn:
    return parse_potential(f"{float(c)!r}*x^2")


def quartic(c2: float = 0.5, c4: float = 0.25) -> PotentialFn:
    return parse_potential(f"{float(c2)!r}*x^2 + {float(c4)!r}*x^4")


def sech_well(depth: float = 0.5, level: float = 1.0) -> PotentialFn:
    return parse_potential(f"{float(level)!r} - {float(depth)!r}*sech(x)^2")


# ---------------------------------------------------------------------------
# Problems
# ---------------------------------------------------------------------------

SCHRODINGER = "schrodinger"
ZAKHAROV_SHABAT = "zakharov_shabat"


@dataclass(frozen=True)
class HypothesisCheck:
    name: str
    passed: bool
    detail: str = ""
    locations: tuple = ()


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def summary(self) -> str:
        lines = []
        for c in self.checks:
            status = "not falsified" if c.passed else "FALSIFIED"
            line = f"{c.name}: {status}"
            if c.detail:
                line += f" ({c.detail})"
            if c.locations:
                locs = ", ".join(f"{v:.6g}" for v in c.locations[:5])
                line += f" at x = {locs}"
            lines.append(line)
        return "\n".join(lines)


@dataclass(frozen=True)
class ProblemSpec:
    """Immutable description of one spectral problem.

    For ``kind == "schrodinger"`` only ``potential`` is used. For the
    Zakharov-Shabat system ``amplitude`` (A) and ``phase`` (S) define
    ``r_pm = -S'/2 +- A``; with ``reflect=True`` the substitution
    S' -> -S' is applied, mapping the spectrum through lambda -> -lambda.
    """

    kind: str
    potential: PotentialFn | None = None
    amplitude: PotentialFn | None = None
    phase: PotentialFn | None = None
    lambda_max: float = 1.0
    window: tuple = (-10.0, 10.0)
    grid_points: int = 4096
    reflect: bool = False
    hypothesis_report: ValidationReport = field(init=False, compare=False, repr=False)
    _r_plus: PotentialFn | None = field(init=False, compare=False, repr=False)
    _r_minus: PotentialFn | None = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in (SCHRODINGER, ZAKHAROV_SHABAT):
            raise DomainError(f"unknown problem kind {self.kind!r}")
        if self.window[0] >= 0 or self.window[1] <= 0:
            raise DomainError("window must contain x = 0 in its interior")
        if self.grid_points < 16:
            raise DomainError("grid_points must be at least 16")
        rp = rm = None
        if self.kind == SCHRODINGER:
            if self.potential is None:
                raise DomainError("Schrödinger problem needs a potential")
        else:
            if self.amplitude is None or self.phase is None:
                raise DomainError("Zakharov-Shabat problem needs amplitude and phase")
            ds = self.phase.derivative()
            if self.reflect:
                ds = -ds
            rp = self.amplitude - ds * 0.5
            rm = -self.amplitude - ds * 0.5
        object.__setattr__(self, "_r_plus", rp)
        object.__setattr__(self, "_r_minus", rm)
        object.__setattr__(self, "hypothesis_report", validate_hypotheses(self))

    # -- basic quantities ---------------------------------------------------
    @property
    def is_zs(self) -> bool:
        return self.kind == ZAKHAROV_SHABAT

    @property
    def r_plus(self) -> PotentialFn:
        return self._r_plus

    @property
    def r_minus(self) -> PotentialFn:
        return self._r_minus

    @property
    def s_prime(self) -> PotentialFn:
        ds = self.phase.derivative()
        return -ds if self.reflect else ds

    @property
    def lambda_min(self) -> float:
        """Bottom of the well: 0 for Schrödinger, min r_+ for Zakharov-Shabat."""
        if self.is_zs:
            return float(self.r_plus.value(0.0))
        return 0.0

    def reduced_lambda(self, lam):
        return lam - self.lambda_min

    def s2_jet(self, x, lam, order: int = 3) -> Jet:
        """Jet of the well function s^2: V(x; lam), or r_+(x) - min r_+."""
        if self.is_zs:
            return self.r_plus.jet(x, lam, order) - self.lambda_min
        return self.potential.jet(x, lam, order)

    def w2_jet(self, x, lam, order: int = 3) -> Jet:
        """Jet of the metric factor R_+ = lam - r_-(x) (1 for Schrödinger)."""
        if self.is_zs:
            return -self.r_minus.jet(x, lam, order) + lam
        xj = x if isinstance(x, Jet) else Jet.variable(x, order)
        return Jet.constant(1.0, xj.order, xj.c.shape[1:])

    def s2_value(self, x, lam):
        if self.is_zs:
            return self.r_plus.value(x, lam) - self.lambda_min
        return self.potential.value(x, lam)

    def w2_value(self, x, lam):
        if self.is_zs:
            return lam - self.r_minus.value(x, lam)
        return np.ones(np.broadcast_shapes(np.shape(x), np.shape(lam)))

    def minus_det_jet(self, x, lam, order: int = 3) -> Jet:
        """Jet of -det B(x; lam) = (s^2 - lam~) R_+."""
        return (self.s2_jet(x, lam, order) - self.reduced_lambda(lam)) * self.w2_jet(x, lam, order)


def schrodinger(potential, lambda_max: float = 1.0, window=(-10.0, 10.0), grid_points: int = 4096) -> ProblemSpec:
    if isinstance(potential, str):
        potential = parse_potential(potential)
    return ProblemSpec(SCHRODINGER, potential=potential, lambda_max=float(lambda_max),
                       window=tuple(window), grid_points=grid_points)


def zakharov_shabat(amplitude, phase, lambda_max: float = 0.9, window=(-20.0, 20.0),
                    grid_points: int = 4096, reflect: bool = False) -> ProblemSpec:
    if isinstance(amplitude, str):
        amplitude = parse_potential(amplitude)
    if isinstance(phase, str):
        phase = parse_potential(phase)
    return ProblemSpec(ZAKHAROV_SHABAT, amplitude=amplitude, phase=phase, lambda_max=float(lambda_max),
                       window=tuple(window), grid_points=grid_points, reflect=reflect)


def figure_one_problem(lambda_max: float = 0.9, window=(-20.0, 20.0)) -> ProblemSpec:
    """The Zakharov-Shabat data A = 1 - sech^2(x)/2, S = tanh(x)/5."""
    return zakharov_shabat("1 - 0.5*sech(x)^2", "0.2*tanh(x)", lambda_max, window)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def coefficient_matrix(p: ProblemSpec, x: float, lam: float) -> np.ndarray:
    """The 2x2 traceless matrix B(x; lam) of eps w' = B w."""
    x = float(x)
    if p.is_zs:
        a = float(p.amplitude.value(x))
        mu = lam + 0.5 * float(p.s_prime.value(x))
        return np.array([[-1j * mu, a], [a, 1j * mu]])
    v = float(p.potential.value(x, lam))
    return np.array([[0.0, 1.0], [v - lam, 0.0]])


def det_b(p: ProblemSpec, x, lam):
    """det B(x; lam) from the factored form: lam - V, or (lam - r_+)(lam - r_-)."""
    if p.is_zs:
        return (lam - p.r_plus.value(x)) * (lam - p.r_minus.value(x))
    return lam - p.potential.value(x, lam)


@dataclass(frozen=True)
class ZSReduction:
    """Schrödinger form of a Zakharov-Shabat problem at fixed lambda.

    ``x_tilde(x) = int_0^x sqrt(lam - r_-)``; the reduced potential is
    ``V~(x~) = r_+(x) - min r_+`` and the reduced eigenvalue parameter is
    ``lam~ = lam - min r_+``.
    """

    problem: ProblemSpec
    lam: float
    lam_tilde: float
    r_min: float

    def __iter__(self):
        # unpacks as (x~ map, V~, lam~)
        return iter((self.x_tilde, self.potential, self.lam_tilde))

    def metric(self, x):
        return np.sqrt(self.problem.w2_value(x, self.lam))

    def x_tilde(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        nodes, weights = np.polynomial.legendre.leggauss(96)
        flat = x.reshape(-1)
        # integrate on [0, x] split into unit-length panels
        out = np.zeros_like(flat)
        for i, xv in enumerate(flat):
            npan = max(1, int(np.ceil(abs(xv))))
            edges = np.linspace(0.0, xv, npan + 1)
            a, b = edges[:-1, None], edges[1:, None]
            pts = 0.5 * (a + b) + 0.5 * (b - a) * nodes
            out[i] = np.sum(0.5 * (b - a) * weights * self.metric(pts))
        return out.reshape(x.shape)

    def x_of_x_tilde(self, xt) -> np.ndarray:
        xt = np.asarray(xt, dtype=float)
        w0 = self.metric(0.0)
        x = xt / w0
        for _ in range(60):
            step = (self.x_tilde(x) - xt) / self.metric(x)
            x = x - step
            if np.all(np.abs(step) <= 1e-14 * (1 + np.abs(x))):
                break
        return x

    def potential(self, xt) -> np.ndarray:
        x = self.x_of_x_tilde(xt)
        return self.problem.r_plus.value(x) - self.r_min

    def potential_derivatives(self, x) -> np.ndarray:
        """[V~, dV~/dx~, d2V~/dx~2, d3V~/dx~3] at original coordinates x."""
        p = self.problem
        s2 = p.s2_jet(x, self.lam, 3).derivatives()
        w = p.w2_jet(x, self.lam, 3).sqrt().derivatives()
        d1 = s2[1] / w[0]
        d2 = (s2[2] - d1 * w[1]) / w[0] ** 2
        # derivative of d2 w.r.t. x, then divide by w
        dd1 = (s2[2] * w[0] - s2[1] * w[1]) / w[0] ** 2
        dd2 = ((s2[3] - dd1 * w[1] - d1 * w[2]) * w[0] ** 2 - (s2[2] - d1 * w[1]) * 2 * w[0] * w[1]) / w[0] ** 4
        return np.array([s2[0], d1, d2, dd2 / w[0]])


def zs_reduce(p: ProblemSpec, lam: float) -> ZSReduction:
    """Reduce a Zakharov-Shabat problem to Schrödinger form at ``lam``."""
    if not p.is_zs:
        raise DomainError("zs_reduce applies to Zakharov-Shabat problems only")
    r_min = p.lambda_min
    if not r_min < lam < 1.0:
        raise DomainError(f"zs_reduce requires min r_+ = {r_min:.6g} < lam < 1")
    xs = np.linspace(p.window[0], p.window[1], p.grid_points)
    gap = lam - p.r_minus.value(xs)
    if np.any(gap <= 0):
        bad = xs[gap <= 0]
        raise HypothesisError(f"lam - r_-(x) <= 0 at x = {bad[0]:.6g}")
    return ZSReduction(p, float(lam), float(lam - r_min), r_min)


# ---------------------------------------------------------------------------
# Hypothesis validation
# ---------------------------------------------------------------------------


def _tail_fit(xs, vals):
    """Fit log f = log C + p log|x| on a tail; returns (p, C)."""
    mask = vals > 0
    if mask.sum() < 4:
        return float("nan"), float("nan")
    lx = np.log(np.abs(xs[mask]))
    lv = np.log(vals[mask])
    p, logc = np.polyfit(lx, lv, 1)
    return float(p), float(np.exp(logc))


def _flank_check(name: str, xs, deriv) -> HypothesisCheck:
    sign = np.sign(xs)
    nz = xs != 0
    bad = nz & ~(sign * deriv > 0)
    return HypothesisCheck(name, not np.any(bad), "" if not np.any(bad) else f"{int(bad.sum())} grid points",
                           tuple(float(v) for v in xs[bad][:8]))


def validate_hypotheses(p: ProblemSpec) -> ValidationReport:
    """Grid-based falsification tests of the well hypotheses.

    A passing check means the hypothesis was not falsified on the sampled
    grid, not that it has been proved.
    """
    xs = np.linspace(p.window[0], p.window[1], p.grid_points)
    checks = []
    scale = max(abs(p.window[0]), abs(p.window[1]))
    if p.kind == SCHRODINGER:
        for lam in sorted({0.0, p.lambda_max}):
            tag = f" [lam={lam:g}]" if p.potential.uses_lambda else ""
            d0 = p.potential(np.array([0.0]), lam, 2)[:, 0]
            checks.append(HypothesisCheck("V(0;lam)=0" + tag, abs(d0[0]) <= 1e-12, f"V(0)={d0[0]:.3g}"))
            checks.append(HypothesisCheck("V'(0;lam)=0" + tag, abs(d0[1]) <= 1e-10, f"V'(0)={d0[1]:.3g}"))
            checks.append(HypothesisCheck("V''(0;lam)>0" + tag, d0[2] > 0, f"V''(0)={d0[2]:.6g}"))
            d = p.potential(xs, lam, 1)
            checks.append(_flank_check("+-V'(x;lam)>0 for +-x>0" + tag, xs, d[1]))
            if not p.potential.uses_lambda:
                break
        vals = p.potential.value(xs, 0.0)
        n_tail = max(8, p.grid_points // 10)
        for side, sl in (("+", slice(-n_tail, None)), ("-", slice(0, n_tail))):
            pe, ce = _tail_fit(xs[sl], vals[sl])
            ok = np.isfinite(pe) and pe >= -0.05 and ce > 0
            checks.append(HypothesisCheck(f"growth V ~ V{side}|x|^p{side} with p{side}>=0", bool(ok),
                                          f"p{side}={pe:.3g}, V{side}={ce:.3g}"))
        edge = min(vals[0], vals[-1])
        checks.append(HypothesisCheck("turning points inside window", bool(p.lambda_max < edge),
                                      f"lambda_max={p.lambda_max:g}, min edge V={edge:.6g}"))
    else:
        rp = p.r_plus(xs, 0.0, 1)
        rm = p.r_minus.value(xs)
        gap = float(rp[0].min() - rm.max())
        checks.append(HypothesisCheck("gap max r_- < min r_+", gap > 0, f"min r_+ - max r_- = {gap:.6g}",
                                      tuple(float(v) for v in xs[rm >= rp[0].min()][:8])))
        bounds = bool(rp[0].max() <= 1 + 1e-12 and rm.min() >= -1 - 1e-12)
        checks.append(HypothesisCheck("-1 <= r_- and r_+ <= 1", bounds,
                                      f"max r_+={rp[0].max():.6g}, min r_-={rm.min():.6g}"))
        lim = bool(abs(rp[0][0] - 1) < 1e-3 and abs(rp[0][-1] - 1) < 1e-3
                   and abs(rm[0] + 1) < 1e-3 and abs(rm[-1] + 1) < 1e-3)
        checks.append(HypothesisCheck("r_+- -> +-1 at window edges", lim,
                                      f"r_+ edges=({rp[0][0]:.6g},{rp[0][-1]:.6g})"))
        d0 = p.r_plus(np.array([0.0]), 0.0, 2)[:, 0]
        checks.append(HypothesisCheck("r_+'(0)=0", abs(d0[1]) <= 1e-10, f"r_+'(0)={d0[1]:.3g}"))
        checks.append(HypothesisCheck("r_+''(0)>0", d0[2] > 0, f"r_+''(0)={d0[2]:.6g}"))
        checks.append(_flank_check("+-r_+'(x)>0 for +-x>0", xs, rp[1]))
        lm = p.lambda_max
        checks.append(HypothesisCheck("min r_+ < lambda_max < 1", bool(p.lambda_min < lm < 1.0),
                                      f"lambda_max={lm:g}"))
        edge = min(rp[0][0], rp[0][-1])
        checks.append(HypothesisCheck("turning points inside window", bool(lm < edge),
                                      f"min edge r_+={edge:.6g}"))
    del scale
    return ValidationReport(tuple(checks))
