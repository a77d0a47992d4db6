"""Command-line front end.

Configuration files are INI documents (read with :mod:`configparser`)::

    [meta]
    config_version = 1

    [problem]
    kind = schrodinger            ; or zakharov_shabat
    potential = x^2/2 + x^4/4     ; or: family = quartic / params = 0.5, 0.25
    amplitude = 1 - 0.5*sech(x)^2 ; zakharov_shabat only
    phase = 0.2*tanh(x)           ; zakharov_shabat only
    reflect = false
    lambda_min =                  ; empty -> bottom of the well
    lambda_max = 1
    window = -10, 10

    [numerics]
    eps = 0.1, 0.05
    ode_tol = 1e-11
    scan_step = 0.125
    decay_exponent = 30
    grid_points = 4096
    langer_lambda =
    langer_points = 41
    weber_lambda =
    weight_m = 4

    [output]
    format = csv
    path = -
    digits = 17
"""

from __future__ import annotations

import argparse
import configparser
import io
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import __version__
from .errors import (AccuracyLossError, BsquantError, ConfigError, DomainError, HypothesisError, NumericalError,
                     ParseError)
from .problem import (SCHRODINGER, ZAKHAROV_SHABAT, ProblemSpec, parse_potential, quadratic, quartic, schrodinger,
                      sech_well, zakharov_shabat)

CONFIG_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_HYPOTHESIS, EXIT_NUMERICAL = 0, 1, 2, 3
THREADS_ENV = "BSQUANT_THREADS"

_FAMILIES = {"quadratic": quadratic, "quartic": quartic, "sech_well": sech_well}


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


def _floats(text: str, name: str) -> tuple:
    try:
        return tuple(float(t) for t in text.replace(";", ",").split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"{name}: expected a comma-separated list of numbers, got {text!r}") from None


def _opt_float(text: str | None, name: str):
    if text is None or not str(text).strip():
        return None
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{name}: expected a number, got {text!r}") from None


def _fmt_opt(v) -> str:
    return "" if v is None else repr(v)


@dataclass(frozen=True)
class ProblemSection:
    kind: str = SCHRODINGER
    potential: str | None = "x^2/4"
    family: str | None = None
    params: tuple = ()
    amplitude: str | None = None
    phase: str | None = None
    reflect: bool = False
    lambda_min: float | None = None
    lambda_max: float = 1.0
    window: tuple = (-10.0, 10.0)

    def __post_init__(self):
        # the default expression only applies to plain Schrödinger problems
        if self.kind == ZAKHAROV_SHABAT or self.family is not None:
            object.__setattr__(self, "potential", None)
        object.__setattr__(self, "params", tuple(float(v) for v in self.params))
        object.__setattr__(self, "window", tuple(float(v) for v in self.window))


@dataclass(frozen=True)
class NumericsSection:
    eps: tuple = (0.1,)
    ode_tol: float = 1e-11
    scan_step: float = 0.125
    decay_exponent: float = 30.0
    grid_points: int = 4096
    langer_lambda: float | None = None
    langer_points: int = 41
    weber_lambda: float | None = None
    weight_m: float = 4.0


@dataclass(frozen=True)
class OutputSection:
    format: str = "csv"
    path: str = "-"
    digits: int = 17


@dataclass(frozen=True)
class RunConfig:
    problem: ProblemSection = field(default_factory=ProblemSection)
    numerics: NumericsSection = field(default_factory=NumericsSection)
    output: OutputSection = field(default_factory=OutputSection)

    def __post_init__(self):
        validate_config(self)

    # -- serialization -----------------------------------------------------

    def to_ini(self) -> str:
        pr, nu, ou = self.problem, self.numerics, self.output
        lines = [f"# bsquant run configuration (bsquant {__version__})", "[meta]", f"config_version = {CONFIG_VERSION}",
                 "", "[problem]", f"kind = {pr.kind}"]
        if pr.family is not None:
            lines += [f"family = {pr.family}", "params = " + ", ".join(repr(v) for v in pr.params)]
        elif pr.potential is not None and pr.kind == SCHRODINGER:
            lines.append(f"potential = {pr.potential}")
        if pr.kind == ZAKHAROV_SHABAT:
            lines += [f"amplitude = {pr.amplitude}", f"phase = {pr.phase}"]
        lines += [f"reflect = {str(pr.reflect).lower()}", f"lambda_min = {_fmt_opt(pr.lambda_min)}",
                  f"lambda_max = {pr.lambda_max!r}", f"window = {pr.window[0]!r}, {pr.window[1]!r}", "",
                  "[numerics]", "eps = " + ", ".join(repr(e) for e in nu.eps), f"ode_tol = {nu.ode_tol!r}",
                  f"scan_step = {nu.scan_step!r}", f"decay_exponent = {nu.decay_exponent!r}",
                  f"grid_points = {nu.grid_points}", f"langer_lambda = {_fmt_opt(nu.langer_lambda)}",
                  f"langer_points = {nu.langer_points}", f"weber_lambda = {_fmt_opt(nu.weber_lambda)}",
                  f"weight_m = {nu.weight_m!r}", "", "[output]", f"format = {ou.format}", f"path = {ou.path}",
                  f"digits = {ou.digits}", ""]
        return "\n".join(lines)

    @classmethod
    def from_ini(cls, text: str) -> "RunConfig":
        cp = configparser.ConfigParser(inline_comment_prefixes=(";",), interpolation=None)
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"config syntax: {exc}") from None
        known = {"meta", "problem", "numerics", "output"}
        for sec in cp.sections():
            if sec not in known:
                raise ConfigError(f"unknown section [{sec}]")
        if cp.has_section("meta"):
            ver = cp.get("meta", "config_version", fallback=str(CONFIG_VERSION)).strip()
            if ver != str(CONFIG_VERSION):
                raise ConfigError(f"meta.config_version: unsupported version {ver!r} (expected {CONFIG_VERSION})")
        sections = {}
        for name, klass in (("problem", ProblemSection), ("numerics", NumericsSection), ("output", OutputSection)):
            names = {f.name: f for f in fields(klass)}
            kw = {}
            if cp.has_section(name):
                for key, raw in cp.items(name):
                    if key not in names:
                        raise ConfigError(f"{name}.{key}: unknown key")
                    kw[key] = _convert(name, key, raw)
            sections[name] = klass(**kw)
        return cls(**sections)

    def with_overrides(self, eps=None, lambda_max=None, fmt=None, out=None) -> "RunConfig":
        cfg = self
        if eps is not None:
            cfg = replace(cfg, numerics=replace(cfg.numerics, eps=eps))
        if lambda_max is not None:
            cfg = replace(cfg, problem=replace(cfg.problem, lambda_max=lambda_max))
        if fmt is not None:
            cfg = replace(cfg, output=replace(cfg.output, format=fmt))
        if out is not None:
            cfg = replace(cfg, output=replace(cfg.output, path=out))
        return cfg


_INT_KEYS = {"grid_points", "langer_points", "digits"}
_OPT_FLOAT_KEYS = {"lambda_min", "langer_lambda", "weber_lambda"}
_FLOAT_KEYS = {"lambda_max", "ode_tol", "scan_step", "decay_exponent", "weight_m"}


def _convert(section: str, key: str, raw: str):
    name = f"{section}.{key}"
    raw = raw.strip()
    if key in ("eps", "params", "window"):
        return _floats(raw, name)
    if key in _INT_KEYS:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{name}: expected an integer, got {raw!r}") from None
    if key in _OPT_FLOAT_KEYS:
        return _opt_float(raw, name)
    if key in _FLOAT_KEYS:
        v = _opt_float(raw, name)
        if v is None:
            raise ConfigError(f"{name}: value required")
        return v
    if key == "reflect":
        low = raw.lower()
        if low not in ("true", "false", "yes", "no", "1", "0"):
            raise ConfigError(f"{name}: expected true or false, got {raw!r}")
        return low in ("true", "yes", "1")
    if key in ("potential", "family", "amplitude", "phase"):
        return raw or None
    return raw


def validate_config(cfg: RunConfig) -> None:
    pr, nu, ou = cfg.problem, cfg.numerics, cfg.output
    if pr.kind not in (SCHRODINGER, ZAKHAROV_SHABAT):
        raise ConfigError(f"problem.kind: expected schrodinger or zakharov_shabat, got {pr.kind!r}")
    if pr.kind == SCHRODINGER and pr.potential is None and pr.family is None:
        raise ConfigError("problem.potential: required for schrodinger problems (or give problem.family)")
    if pr.family is not None and pr.family not in _FAMILIES:
        raise ConfigError(f"problem.family: unknown family {pr.family!r}; choose from {', '.join(_FAMILIES)}")
    if pr.kind == ZAKHAROV_SHABAT and (pr.amplitude is None or pr.phase is None):
        raise ConfigError("problem.amplitude/problem.phase: both required for zakharov_shabat problems")
    if len(pr.window) != 2 or not pr.window[0] < 0 < pr.window[1]:
        raise ConfigError("problem.window: expected two numbers lo < 0 < hi")
    if not math.isfinite(pr.lambda_max):
        raise ConfigError("problem.lambda_max: must be finite")
    if not nu.eps:
        raise ConfigError("numerics.eps: list must be nonempty")
    for e in nu.eps:
        if not 0 < e < 1:
            raise ConfigError(f"numerics.eps: every value must lie in (0, 1), got {e!r}")
    for key in ("ode_tol", "scan_step", "decay_exponent", "weight_m"):
        if not getattr(nu, key) > 0:
            raise ConfigError(f"numerics.{key}: must be > 0")
    if nu.scan_step > 0.25:
        raise ConfigError("numerics.scan_step: must not exceed 0.25 (units of eps)")
    if nu.grid_points < 16 or nu.langer_points < 2:
        raise ConfigError("numerics.grid_points/langer_points: too small")
    if ou.format not in ("csv", "json"):
        raise ConfigError(f"output.format: expected csv or json, got {ou.format!r}")
    if not 1 <= ou.digits <= 17:
        raise ConfigError("output.digits: must lie in [1, 17]")


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None
    return RunConfig.from_ini(text)


def build_problem(cfg: RunConfig) -> ProblemSpec:
    pr, nu = cfg.problem, cfg.numerics
    if pr.kind == ZAKHAROV_SHABAT:
        return zakharov_shabat(pr.amplitude, pr.phase, pr.lambda_max, pr.window, nu.grid_points, pr.reflect)
    if pr.family is not None:
        try:
            pot = _FAMILIES[pr.family](*pr.params)
        except TypeError:
            raise ConfigError(f"problem.params: wrong number of parameters for family {pr.family!r}") from None
    else:
        pot = parse_potential(pr.potential)
    return schrodinger(pot, pr.lambda_max, pr.window, nu.grid_points)


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


@dataclass
class Table:
    name: str
    columns: list
    rows: list = field(default_factory=list)


def _cell(v, digits: int) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.{digits}g}"
    return str(v)


def render(table: Table, fmt: str, digits: int) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(",".join(table.columns) + "\n")
        for row in table.rows:
            buf.write(",".join(_cell(v, digits) for v in row) + "\n")
        return buf.getvalue()

    def js(v):
        if isinstance(v, (float, np.floating)):
            v = float(v)
            return float(f"{v:.{digits}g}") if math.isfinite(v) else None
        if isinstance(v, (np.integer,)):
            return int(v)
        if isinstance(v, np.bool_):
            return bool(v)
        return v

    doc = {"table": table.name, "version": __version__, "columns": table.columns,
           "rows": [[js(v) for v in row] for row in table.rows]}
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

SPECTRUM_COLUMNS = ["eps", "n", "lambda", "a", "cos_residual", "source"]
COMPARE_COLUMNS = ["eps", "n", "lambda_direct", "lambda_bs", "error", "error_over_eps2", "cos_residual", "a"]
LANGER_COLUMNS = ["lambda", "x", "y", "g_prime", "g_second", "g_third", "q", "ode_residual"]
SPECFUN_COLUMNS = ["check", "parameter", "residual", "threshold", "passed"]
WEBER_COLUMNS = ["eps", "lambda", "a", "weight", "r1_sup", "r2_sup", "v1_plus", "v2_plus", "v1_minus", "v2_minus",
                 "wronskian", "cos_pi_a", "residual"]


def _shooting(cfg: RunConfig, threads: int):
    from .reference import ShootingConfig
    nu = cfg.numerics
    return ShootingConfig(ode_tol=nu.ode_tol, scan_step=nu.scan_step, decay_exponent=nu.decay_exponent,
                          threads=threads)


def _lam_window(cfg: RunConfig, p: ProblemSpec):
    lo = cfg.problem.lambda_min if cfg.problem.lambda_min is not None else p.lambda_min
    return lo, p.lambda_max


def cmd_quantize(cfg, p, threads) -> Table:
    from .quantize import bs_eigenvalues
    t = Table("quantize", SPECTRUM_COLUMNS)
    for eps in cfg.numerics.eps:
        for e in bs_eigenvalues(p, eps, p.lambda_max):
            t.rows.append([eps, e.n, e.lam, e.a, e.cos_residual, e.source])
    return t


def cmd_spectrum_direct(cfg, p, threads) -> Table:
    from .reference import direct_spectrum
    t = Table("spectrum-direct", SPECTRUM_COLUMNS)
    sc = _shooting(cfg, threads)
    for eps in cfg.numerics.eps:
        for e in direct_spectrum(p, eps, _lam_window(cfg, p), sc):
            t.rows.append([eps, e.n, e.lam, e.a, e.cos_residual, e.source])
    return t


def cmd_compare(cfg, p, threads) -> Table:
    from .quantize import bs_eigenvalues
    from .reference import direct_spectrum
    t = Table("compare", COMPARE_COLUMNS)
    sc = _shooting(cfg, threads)
    for eps in cfg.numerics.eps:
        bs = {e.n: e for e in bs_eigenvalues(p, eps, p.lambda_max)}
        for e in direct_spectrum(p, eps, _lam_window(cfg, p), sc):
            ref = bs.get(e.n)
            if ref is None:
                continue
            err = e.lam - ref.lam
            t.rows.append([eps, e.n, e.lam, ref.lam, err, err / eps**2, e.cos_residual, e.a])
    return t


def cmd_langer_table(cfg, p, threads) -> Table:
    from .langer import langer_map, langer_ode_residual
    nu = cfg.numerics
    lam = nu.langer_lambda
    if lam is None:
        lam = p.lambda_min + 0.5 * (p.lambda_max - p.lambda_min)
    m = langer_map(p, lam)
    lo, hi = p.window
    xs = np.linspace(0.9 * lo, 0.9 * hi, nu.langer_points)
    d = m.derivatives(xs)
    q = m.q_at_x(xs)
    res = langer_ode_residual(m, xs)
    t = Table("langer-table", LANGER_COLUMNS)
    for k, x in enumerate(xs):
        t.rows.append([lam, x, d[0][k], d[1][k], d[2][k], d[3][k], q[k], res[k]])
    return t


def specfun_checks() -> Table:
    """Invariant residuals of the special-function layer."""
    from scipy import special

    from .langer import k_function
    from .specfun import ZETA_AT_MINUS_ONE, pcf_array, t_derivs_array, zeta_array

    t = Table("specfun-check", SPECFUN_COLUMNS)
    zs = np.linspace(0.0, 30.0, 61)
    for a in (-100.0, -40.0, -10.0, -3.3, -1.0, -0.5, -0.1):
        u, uz, v, vz, _ = pcf_array(a, zs)
        # scale-free Wronskian check: U V_z - U_z V against sqrt(2/pi)
        w = u * vz - uz * v
        res = float(np.max(np.abs(w / math.sqrt(2 / math.pi) - 1.0)))
        t.rows.append(["pcf_wronskian", a, res, 1e-10, res <= 1e-10])
    c = math.sqrt(2 / math.pi)
    for a in (-40.0, -12.5, -3.0, -0.7, -0.1):
        u, uz, v, vz, _ = pcf_array(a, np.array([0.0]))
        u, uz, v, vz = float(u[0]), float(uz[0]), float(v[0]), float(vz[0])
        gam = special.gamma(0.5 - a)
        cos_a, sin_a = math.cos(-math.pi * a), math.sin(-math.pi * a)
        for name, res in (("pcf_2UUz_0", abs(2 * u * uz / (c * gam) + cos_a)),
                          ("pcf_2VVz_0", abs(2 * v * vz * gam / c - cos_a)),
                          ("pcf_UVz_UzV_0", abs((u * vz + uz * v) / c - sin_a))):
            t.rows.append([name, a, res, 1e-10, res <= 1e-10])
    tt = np.concatenate([np.linspace(-0.999, 0.99, 200), np.linspace(1.01, 40.0, 200)])
    z, dz = zeta_array(tt)
    back = t_derivs_array(z)
    res = float(np.max(np.abs(back[0] - tt) / (1 + np.abs(tt))))
    t.rows.append(["zeta_t_roundtrip", float("nan"), res, 1e-9, res <= 1e-9])
    zz = np.linspace(ZETA_AT_MINUS_ONE + 0.05, 40.0, 400)
    td = t_derivs_array(zz)
    # (dt/dz)^2 (t^2 - 1) = z
    res = float(np.max(np.abs(td[1] ** 2 * (td[0] ** 2 - 1) - zz) / (1 + np.abs(zz))))
    t.rows.append(["t_zeta_ode", float("nan"), res, 1e-9, res <= 1e-9])
    xi = np.linspace(ZETA_AT_MINUS_ONE + 0.1, 50.0, 500)
    res = float(np.max(np.abs(k_function(xi) - 1.0)))
    t.rows.append(["k_constant", float("nan"), res, 1e-6, res <= 1e-6])
    return t


def cmd_specfun_check(cfg, p, threads) -> Table:
    return specfun_checks()


def cmd_weber_perturbed(cfg, p, threads) -> Table:
    from .langer import langer_map
    from .reference import solve_perturbed_weber
    nu = cfg.numerics
    lam = nu.weber_lambda
    if lam is None:
        lam = p.lambda_min + 0.8 * (p.lambda_max - p.lambda_min)
    m = langer_map(p, lam)
    t = Table("weber-perturbed", WEBER_COLUMNS)
    for eps in nu.eps:
        s = solve_perturbed_weber(m, eps, "both", M=nu.weight_m)
        c = math.cos(-math.pi * s.a)
        t.rows.append([eps, lam, s.a, s.weight, s.r1_sup, s.r2_sup, s.v_plus_at_0[0], s.v_plus_at_0[1],
                       s.v_minus_at_0[0], s.v_minus_at_0[1], s.wronskian_lhs, c, s.wronskian_lhs - c])
    return t


COMMANDS = {
    "quantize": (cmd_quantize, "Bohr-Sommerfeld spectrum table"),
    "spectrum-direct": (cmd_spectrum_direct, "eigenvalues from direct shooting"),
    "compare": (cmd_compare, "direct versus Bohr-Sommerfeld levels"),
    "langer-table": (cmd_langer_table, "Langer map samples, Q kernel and ODE residual"),
    "specfun-check": (cmd_specfun_check, "special-function invariant residuals"),
    "weber-perturbed": (cmd_weber_perturbed, "perturbed Weber remainders and Wronskian residuals"),
}


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _eps_list(text: str) -> tuple:
    try:
        return _floats(text, "--eps")
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI run configuration")
    common.add_argument("--eps", type=_eps_list, metavar="LIST", help="comma-separated eps values")
    common.add_argument("--lambda-max", type=float, metavar="X", help="upper end of the lambda window")
    common.add_argument("--out", metavar="PATH", help="output file ('-' for stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="output format")
    common.add_argument("--force", action="store_true", help="run even if hypothesis checks fail")
    common.add_argument("--dump-config", action="store_true", help="print the effective configuration and exit")
    common.add_argument("--threads", type=int, metavar="N",
                        help=f"worker threads for lambda sweeps (default ${THREADS_ENV} or 1)")
    parser = _Parser(prog="bsquant", description="Bohr-Sommerfeld quantization with Langer/Weber diagnostics")
    parser.add_argument("--version", action="version", version=f"bsquant {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def _threads(arg) -> int:
    if arg is not None:
        n = arg
    else:
        env = os.environ.get(THREADS_ENV, "").strip()
        if not env:
            return 1
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV}: expected an integer, got {env!r}") from None
    if n < 1:
        raise ConfigError("--threads: must be >= 1")
    return n


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # usage errors, --help and --version
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    try:
        cfg = load_config(args.config).with_overrides(args.eps, args.lambda_max, args.format, args.out)
        threads = _threads(args.threads)
    except (ConfigError, ParseError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.dump_config:
        sys.stdout.write(cfg.to_ini())
        return EXIT_OK
    try:
        p = build_problem(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ParseError as exc:
        print(f"config error: potential expression: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HypothesisError as exc:
        print(f"hypothesis violation: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (DomainError, BsquantError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report = p.hypothesis_report
    needs_report = args.command != "specfun-check"
    if needs_report and not report.passed:
        failing = "; ".join(f"{c.name}: {c.detail}" for c in report.failures())
        if not args.force:
            print(f"hypothesis violation: {failing}", file=sys.stderr)
            return EXIT_HYPOTHESIS
        print(f"warning: proceeding despite failed hypotheses: {failing}", file=sys.stderr)
    func = COMMANDS[args.command][0]
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            table = func(cfg, p, threads)
    except HypothesisError as exc:
        print(f"hypothesis violation: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (NumericalError, AccuracyLossError, DomainError, FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    text = render(table, cfg.output.format, cfg.output.digits)
    if cfg.output.path in ("-", ""):
        sys.stdout.write(text)
    else:
        try:
            with open(cfg.output.path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"config error: output.path: {exc.strerror}", file=sys.stderr)
            return EXIT_CONFIG
    if args.command == "specfun-check" and not all(r[-1] for r in table.rows):
        bad = ", ".join(f"{r[0]}({_cell(r[1], 6)})" for r in table.rows if not r[-1])
        print(f"numerical failure: invariant residuals above threshold: {bad}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
