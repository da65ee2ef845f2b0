"""Weyl-class and Zipoy-Voorhees models: potentials, reduced Hamiltonian, 4D metric.

Internal convention: ``H = g^{ij} p_i p_j`` (no factor 1/2).  In the Weyl
chart with ``R = x`` the metric is

    g = e^{2U} (e^{-2 gamma} (dx^2 + dy^2) + x^2 dphi^2) - e^{-2U} dt^2,

so ``T = e^{2 gamma - 2U} (p_x^2 + p_y^2)``, ``V^{phiphi} = x^-2 e^{-2U}`` and
``V^{tt} = -e^{2U}``.  The exponentials are the auxiliary generators ``E2U``
and ``E2G`` with chain-rule derivatives.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from pathlib import Path
from typing import Mapping

import mpmath
import sympy

from .expr.core import AUXILIARY, COORDINATE, PARAMETER, normalize, parse, to_text
from .expr.field import FracElement, RationalField, closure, numeric_definition
from .expr.zero import ZV_DOMAIN, Domain, ZeroVerdict, equivalent_zero
from .momenta import MomentaPoly

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

x, y = sympy.symbols("x y")
DELTA = sympy.Symbol("delta")

WEYL_DOMAIN = Domain({"x": (Fraction(1, 2), Fraction(4)), "y": (Fraction(-2), Fraction(2))})


class Convention(str, enum.Enum):
    """How the p_x^2 ... p_t^2 coefficients of H are read from the Omega/V lists."""

    INVERSE_METRIC = "inverse_metric"  # p_x^2/(2 Omega_1) + ... = g^{ij} p_i p_j
    OMEGA_LITERAL = "omega_literal"  # Omega_1 p_x^2 + Omega_2 p_y^2 + V^phi p_phi^2 + V^t p_t^2
    METRIC = "metric"  # g_ij p_i p_j (2 Omega_1 p_x^2 + ...)


class ModelRejected(ValueError):
    def __init__(self, message: str, verdict: ZeroVerdict | None = None):
        super().__init__(message)
        self.verdict = verdict


@dataclass
class ReducedModel:
    """Diagonal reduced Hamiltonian ``t_xx p_x^2 + t_yy p_y^2 + V^phiphi p_phi^2 + V^tt p_t^2``.

    ``perp_weight`` scales the rotated gradient ``grad_perp f = w (-f_y, f_x)``.
    """

    name: str
    field: RationalField
    domain: Domain
    t_xx: FracElement
    t_yy: FracElement
    V_phiphi: FracElement
    V_tt: FracElement
    perp_weight: FracElement
    metric4d: list | None = None
    info: dict = dc_field(default_factory=dict)
    extras: dict = dc_field(default_factory=dict)

    @property
    def V_tphi(self) -> FracElement:
        return self.field.zero()

    @property
    def T(self) -> MomentaPoly:
        return MomentaPoly(self.field, {(2, 0, 0, 0): self.t_xx, (0, 2, 0, 0): self.t_yy})

    @property
    def V(self) -> MomentaPoly:
        return MomentaPoly(self.field, {(0, 0, 2, 0): self.V_phiphi, (0, 0, 0, 2): self.V_tt})

    @property
    def H(self) -> MomentaPoly:
        return self.T + self.V

    def momentum(self, which: str) -> MomentaPoly:
        return MomentaPoly.momentum(self.field, which)

    def describe(self) -> dict:
        return {"name": self.name, **{k: v for k, v in sorted(self.info.items())}}


@dataclass
class WeylModel(ReducedModel):
    U_expr: sympy.Expr | None = None
    gamma_expr: sympy.Expr | None = None
    U: FracElement | None = None
    U_x: FracElement | None = None
    U_y: FracElement | None = None
    gamma_x: FracElement | None = None
    gamma_y: FracElement | None = None
    ernst_verdict: ZeroVerdict | None = None
    gamma_verdicts: tuple = ()


# -- Ernst relations ---------------------------------------------------------------


def ernst_residual(U) -> sympy.Expr:
    """``x (U_xx + U_yy) + U_x`` (vanishes for solutions with R = x)."""
    U = parse(U) if isinstance(U, str) else sympy.sympify(U)
    return normalize(x * (sympy.diff(U, x, 2) + sympy.diff(U, y, 2)) + sympy.diff(U, x))


def gamma_gradient(U) -> tuple[sympy.Expr, sympy.Expr]:
    """``(gamma_x, gamma_y) = (-x U_x^2 + x U_y^2, -2 x U_x U_y)``."""
    U = parse(U) if isinstance(U, str) else sympy.sympify(U)
    Ux, Uy = sympy.diff(U, x), sympy.diff(U, y)
    return normalize(-x * Ux ** 2 + x * Uy ** 2), normalize(-2 * x * Ux * Uy)


def _path_integral_gamma(gx: sympy.Expr, gy: sympy.Expr, base: tuple[Fraction, Fraction], names):
    """Numeric exp(2 gamma) from a basepoint along x then y."""
    syms = sorted(gx.free_symbols | gy.free_symbols | {x, y}, key=lambda s: s.name)
    fx = sympy.lambdify(syms, gx, "mpmath")
    fy = sympy.lambdify(syms, gy, "mpmath")
    x0, y0 = (mpmath.mpf(b.numerator) / b.denominator for b in base)

    def value(point, precision):
        vals = {k: (mpmath.mpf(v.numerator) / v.denominator if isinstance(v, Fraction) else mpmath.mpf(v))
                for k, v in point.items()}

        def args(xx, yy):
            return [xx if s.name == "x" else yy if s.name == "y" else vals[s.name] for s in syms]

        X, Y = vals["x"], vals["y"]
        g = mpmath.quad(lambda s: fx(*args(s, y0)), [x0, X]) + mpmath.quad(lambda t: fy(*args(X, t)), [y0, Y])
        return mpmath.exp(2 * g)

    return numeric_definition(value, names)


def weyl_from_U(
    U,
    gamma=None,
    domain: Domain | None = None,
    *,
    name: str = "weyl",
    n_samples: int = 100,
    precision: int = 40,
    seed=0,
    validate: bool = True,
) -> WeylModel:
    """Weyl model in the chart R = x from a potential ``U(x, y)`` (and optional gamma).

    The Ernst residual must pass the zero test on ``domain``; a supplied gamma
    must reproduce the gradient formulas.  Violations raise :class:`ModelRejected`.
    """
    U_expr = parse(U) if isinstance(U, str) else sympy.sympify(U)
    g_expr = None if gamma is None else (parse(gamma) if isinstance(gamma, str) else sympy.sympify(gamma))
    domain = domain or WEYL_DOMAIN
    params = sorted({s.name for s in U_expr.free_symbols | (g_expr.free_symbols if g_expr is not None else set())}
                    - {"x", "y"})
    specs = [("x", COORDINATE), ("y", COORDINATE)] + [(p, PARAMETER) for p in params]
    exprs = [U_expr] + ([g_expr] if g_expr is not None else [])
    F0, elems = closure(exprs, specs)
    Uf = elems[0]
    Ux, Uy = F0.d(Uf, "x"), F0.d(Uf, "y")
    ernst = None
    if validate:
        res = x * (sympy.diff(U_expr, x, 2) + sympy.diff(U_expr, y, 2)) + sympy.diff(U_expr, x)
        ernst = equivalent_zero(res, domain, n_samples, precision=precision, seed=f"{seed}/ernst")
        if not ernst.is_zero:
            raise ModelRejected(f"potential {to_text(U_expr)} violates the Ernst equation ({ernst.status})", ernst)
    gx = -F0["x"] * Ux ** 2 + F0["x"] * Uy ** 2
    gy = -2 * F0["x"] * Ux * Uy
    gverdicts = ()
    if g_expr is not None and validate:
        gf = elems[1]
        vs = []
        for var, target in (("x", gx), ("y", gy)):
            v = equivalent_zero(F0.d(gf, var) - target, domain, n_samples, precision=precision,
                                seed=f"{seed}/gamma_{var}", field=F0)
            vs.append(v)
            if not v.is_zero:
                raise ModelRejected(f"gamma does not match the Ernst gradient in {var} ({v.status})", v)
        gverdicts = tuple(vs)
    if g_expr is not None:
        gdef = sympy.exp(2 * g_expr)
    else:
        gx_e, gy_e = gamma_gradient(U_expr)
        lo_x, hi_x = domain.interval("x")
        lo_y, hi_y = domain.interval("y")
        gdef = _path_integral_gamma(gx_e, gy_e, ((lo_x + hi_x) / 2, (lo_y + hi_y) / 2), ["x", "y"] + params)
    F = F0.extend(
        [("E2U", AUXILIARY), ("E2G", AUXILIARY)],
        rules={
            "E2U": {"x": lambda K: 2 * K.convert(Ux) * K["E2U"], "y": lambda K: 2 * K.convert(Uy) * K["E2U"]},
            "E2G": {"x": lambda K: 2 * K.convert(gx) * K["E2G"], "y": lambda K: 2 * K.convert(gy) * K["E2G"]},
        },
        definitions={"E2U": sympy.exp(2 * U_expr), "E2G": gdef},
    )
    E, G, X = F["E2U"], F["E2G"], F["x"]
    t = G / E
    metric = _diag(F, [E / G, E / G, X ** 2 * E, -1 / E])
    return WeylModel(
        name=name,
        field=F,
        domain=domain,
        t_xx=t,
        t_yy=t,
        V_phiphi=1 / (X ** 2 * E),
        V_tt=-E,
        perp_weight=E / G,
        metric4d=metric,
        info={"chart": "weyl", "U": to_text(U_expr), "gamma": to_text(g_expr) if g_expr is not None else None},
        U_expr=U_expr,
        gamma_expr=g_expr,
        U=F.convert(Uf),
        U_x=F.convert(Ux),
        U_y=F.convert(Uy),
        gamma_x=F.convert(gx),
        gamma_y=F.convert(gy),
        ernst_verdict=ernst,
        gamma_verdicts=gverdicts,
    )


def _diag(F: RationalField, entries) -> list:
    return [[entries[i] if i == j else F.zero() for j in range(4)] for i in range(4)]


# -- Zipoy-Voorhees -----------------------------------------------------------------


def _delta_value(delta):
    if isinstance(delta, sympy.Symbol):
        return delta
    if isinstance(delta, str):
        if delta.strip() in ("delta", "δ"):
            return DELTA
        delta = Fraction(delta)
    if isinstance(delta, (int, Fraction)):
        delta = sympy.Rational(Fraction(delta).numerator, Fraction(delta).denominator)
    delta = sympy.nsimplify(delta)
    if delta.is_Number and delta < 0:
        raise ValueError("delta must be non-negative")
    return delta


def zv_metric_exprs(delta) -> dict[str, sympy.Expr]:
    """Metric components and the Omega/V list of the Zipoy-Voorhees metric."""
    d = _delta_value(delta)
    P = ((x + 1) / (x - 1)) ** d
    Q = ((x ** 2 - 1) / (x ** 2 - y ** 2)) ** (d ** 2)
    g_xx = P * Q * (x ** 2 - y ** 2) / (x ** 2 - 1)
    g_yy = P * Q * (x ** 2 - y ** 2) / (1 - y ** 2)
    g_pp = P * (x ** 2 - 1) * (1 - y ** 2)
    g_tt = -1 / P
    return {
        "g_xx": g_xx, "g_yy": g_yy, "g_phiphi": g_pp, "g_tt": g_tt,
        "Omega1": g_xx / 2, "Omega2": g_yy / 2,
        "Vphi": 1 / (P * (x ** 2 - 1) * (1 - y ** 2)), "Vt": -P,
    }


def zipoy_voorhees(delta, convention: Convention | str = Convention.INVERSE_METRIC,
                   domain: Domain | None = None, extra: Mapping[str, sympy.Expr] | None = None) -> ReducedModel:
    """ZV model in prolate spheroidal coordinates (x > 1, |y| < 1).

    ``delta`` may be a rational (``"5/2"``) or the symbol ``delta``.  The
    Hamiltonian coefficients follow ``convention``; the default reproduces
    ``g^{ij} p_i p_j``.  The rotated-gradient weight is 1 (it only rescales the
    free function alpha of the cubic ansatz).  Expressions in ``extra`` are
    closed together with the model and stored in ``model.extras``; their free
    symbols other than x, y, delta become parameters.
    """
    convention = Convention(convention)
    d = _delta_value(delta)
    ex = zv_metric_exprs(d)
    names = ["g_xx", "g_yy", "g_phiphi", "g_tt", "Omega1", "Omega2", "Vphi", "Vt"]
    specs = [("x", COORDINATE), ("y", COORDINATE)]
    if not d.is_Number:
        specs.append(("delta", PARAMETER))
    extra = dict(extra or {})
    params = sorted({s.name for v in extra.values() for s in sympy.sympify(v).free_symbols} - {"x", "y", "delta"})
    specs += [(p, PARAMETER) for p in params]
    F, el = closure([ex[n] for n in names] + list(extra.values()), specs)
    e = dict(zip(names, el))
    extras = dict(zip(extra, el[len(names):]))
    if convention is Convention.INVERSE_METRIC:
        coeffs = [1 / (2 * e["Omega1"]), 1 / (2 * e["Omega2"]), e["Vphi"], e["Vt"]]
    elif convention is Convention.OMEGA_LITERAL:
        coeffs = [e["Omega1"], e["Omega2"], e["Vphi"], e["Vt"]]
    else:
        coeffs = [e["g_xx"], e["g_yy"], e["g_phiphi"], e["g_tt"]]
    dom = domain or ZV_DOMAIN
    return ReducedModel(
        name=f"zv(delta={d})",
        field=F,
        domain=dom,
        t_xx=coeffs[0],
        t_yy=coeffs[1],
        V_phiphi=coeffs[2],
        V_tt=coeffs[3],
        perp_weight=F.one(),
        metric4d=_diag(F, [e["g_xx"], e["g_yy"], e["g_phiphi"], e["g_tt"]]),
        info={"chart": "prolate_spheroidal", "delta": str(d), "convention": convention.value,
              "omega_reading": "Omega1 = g_xx/2, Omega2 = g_yy/2"},
        extras=extras,
    )


def schwarzschild_in_zv_chart(mass=1) -> dict[str, sympy.Expr]:
    """Schwarzschild metric pulled back by r = m (x + 1), cos(theta) = y."""
    m = sympy.sympify(mass)
    r_, th = sympy.symbols("r theta", positive=True)
    f = 1 - 2 * m / r_
    g = {"rr": 1 / f, "thth": r_ ** 2, "phph": r_ ** 2 * sympy.sin(th) ** 2, "tt": -f}
    r_of = m * (x + 1)
    th_of = sympy.acos(y)
    drdx = sympy.diff(r_of, x)
    dthdy = sympy.diff(th_of, y)
    sub = {r_: r_of, th: th_of}
    return {
        "g_xx": normalize(g["rr"].subs(sub) * drdx ** 2),
        "g_yy": normalize(g["thth"].subs(sub) * dthdy ** 2),
        "g_phiphi": normalize(g["phph"].subs(sub)),
        "g_tt": normalize(g["tt"].subs(sub)),
    }


# -- model files ----------------------------------------------------------------------


def domain_from_table(table: Mapping | None, base: Domain) -> Domain:
    if not table:
        return base
    iv = {k: (Fraction(str(v[0])), Fraction(str(v[1]))) for k, v in table.items()}
    return base.with_intervals(**iv)


def load_model_file(path: str | Path, **kwargs) -> ReducedModel:
    """Read a TOML model definition (``type = "zv"`` or ``type = "weyl"``)."""
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    return model_from_mapping(data, name=Path(path).stem, **kwargs)


def model_from_mapping(data: Mapping, name: str = "model", **kwargs) -> ReducedModel:
    kind = data.get("type")
    if kind == "zv":
        if "delta" not in data:
            raise ValueError("zv model needs a delta entry")
        dom = domain_from_table(data.get("domain"), ZV_DOMAIN)
        return zipoy_voorhees(str(data["delta"]), data.get("convention", "inverse_metric"), dom)
    if kind == "weyl":
        if "U" not in data:
            raise ValueError("weyl model needs a U entry")
        dom = domain_from_table(data.get("domain"), WEYL_DOMAIN)
        return weyl_from_U(data["U"], data.get("gamma"), dom, name=data.get("name", name), **kwargs)
    raise ValueError(f"unknown model type {kind!r}; expected 'zv' or 'weyl'")


__all__ = [
    "Convention", "ModelRejected", "ReducedModel", "WeylModel", "ernst_residual", "gamma_gradient",
    "weyl_from_U", "zipoy_voorhees", "zv_metric_exprs", "schwarzschild_in_zv_chart", "load_model_file",
    "model_from_mapping", "WEYL_DOMAIN", "DELTA",
]
