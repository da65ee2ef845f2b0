"""Jet-space layer: U and its derivatives as independent indeterminates.

Jet variables are named ``U_`` followed by the differentiation letters, e.g.
``U_xxy``.  Only normal forms with at most one ``y`` exist; ``U_yy`` is
rewritten through the Ernst relation ``U_yy = -U_xx - U_x/x`` on the fly.
``E2U`` and ``E2G`` stand for e^{2U} and e^{2 gamma}; their partials use the
gamma gradient, so gamma itself never appears.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import comb, factorial

import sympy

from .analysis import OddCubicAnsatz, necessary_criterion
from .expr.core import AUXILIARY, COORDINATE, JET, MissingDerivativeRule, to_text
from .expr.field import FracElement, RationalField
from .expr.zero import Domain, ZeroVerdict, equivalent_zero
from .models import ReducedModel
from .momenta import MomentaPoly, poisson


class JetOrderExceeded(MissingDerivativeRule):
    """A total derivative would produce a jet variable above the order cap."""

    def __init__(self, term: str, var: str, cap: int):
        KeyError.__init__(self, f"d/d{var} of {term} exceeds the jet order cap {cap}")
        self.term, self.var, self.cap = term, var, cap

    def __str__(self):
        return self.args[0]


def jet_name(m: int, n: int) -> str:
    return "U_" + "x" * m + "y" * n


def jet_names(order: int = 4) -> list[str]:
    """Normal-form jet variables up to ``order``, graded then x-heavy first."""
    out = []
    for k in range(1, order + 1):
        out.append(jet_name(k, 0))
        out.append(jet_name(k - 1, 1))
    return out


JET_DOMAIN = Domain({"x": (Fraction(1, 2), Fraction(4))})


def jet_field(order: int = 4, extra_specs=()) -> RationalField:
    """Field in x, the jet variables up to ``order``, E2U and E2G, with total-derivative rules."""
    if order < 2:
        raise ValueError("jet order cap must be at least 2")
    names = jet_names(order)
    specs = [("x", COORDINATE)] + [(n, JET) for n in names] + [("E2U", AUXILIARY), ("E2G", AUXILIARY)]
    specs += list(extra_specs)

    def overflow(term, var):
        def rule(F):
            raise JetOrderExceeded(term, var, order)
        return rule

    rules: dict = {}
    for k in range(1, order + 1):
        for m, n in ((k, 0), (k - 1, 1)):
            name = jet_name(m, n)
            r = {}
            r["x"] = (lambda F, m=m, n=n: F[jet_name(m + 1, n)]) if k < order else overflow(name, "x")
            if n == 0:
                r["y"] = (lambda F, m=m: F[jet_name(m, 1)]) if k < order else overflow(name, "y")
            elif m + 2 <= order:
                r["y"] = lambda F, m=m: _dx_power_of_Uyy(F, m)
            else:
                r["y"] = overflow(name, "y")
            rules[name] = r
    rules["E2U"] = {"x": lambda F: 2 * F["U_x"] * F["E2U"], "y": lambda F: 2 * F["U_y"] * F["E2U"]}
    rules["E2G"] = {"x": lambda F: 2 * gamma_x(F) * F["E2G"], "y": lambda F: 2 * gamma_y(F) * F["E2G"]}
    return RationalField(specs, rules, coordinates=("x",))


def _dx_power_of_Uyy(F: RationalField, m: int) -> FracElement:
    """d^m/dx^m of U_yy = -U_xx - U_x / x, as a jet expression."""
    X = F["x"]
    out = -F[jet_name(m + 2, 0)]
    for k in range(m + 1):
        dk_inv_x = (-1) ** k * factorial(k) / X ** (k + 1)
        out -= comb(m, k) * dk_inv_x * F[jet_name(m - k + 1, 0)]
    return out


def gamma_x(F: RationalField) -> FracElement:
    return -F["x"] * F["U_x"] ** 2 + F["x"] * F["U_y"] ** 2


def gamma_y(F: RationalField) -> FracElement:
    return -2 * F["x"] * F["U_x"] * F["U_y"]


def total_dx(F: RationalField, e: FracElement) -> FracElement:
    return F.d(e, "x")


def total_dy(F: RationalField, e: FracElement) -> FracElement:
    """Total y-derivative; x is the only explicit coordinate, so this is pure chain rule."""
    out = F.zero()
    for n in F.generators_of(e):
        if n == "x":
            continue
        r = F.rule(n, "y")
        if r is None:
            if F.kinds[n] in (JET, AUXILIARY):
                raise MissingDerivativeRule(sympy.Symbol(n), "y")
            continue
        out += F.partial(e, n) * r
    return out


class _JetField(RationalField):
    """RationalField whose ``d(., "y")`` is the jet total derivative."""

    def d(self, f, var):
        if var == "y":
            return total_dy(self, f)
        return super().d(f, var)

    def extend(self, specs=(), rules=None, definitions=None, atoms=None):
        base = super().extend(specs, rules, definitions, atoms)
        out = _JetField.__new__(_JetField)
        out.__dict__.update(base.__dict__)
        return out


def _as_jet_field(F: RationalField) -> _JetField:
    out = _JetField.__new__(_JetField)
    out.__dict__.update(F.__dict__)
    return out


def jet_model(order: int = 4) -> ReducedModel:
    """Generic Weyl model over the jet field: t = e^{2gamma-2U}, V^pp = 1/(x^2 e^{2U}), V^tt = -e^{2U}."""
    F = _as_jet_field(jet_field(order))
    E, G, X = F["E2U"], F["E2G"], F["x"]
    return ReducedModel(
        name=f"weyl-jet(order={order})",
        field=F,
        domain=JET_DOMAIN,
        t_xx=G / E,
        t_yy=G / E,
        V_phiphi=1 / (X ** 2 * E),
        V_tt=-E,
        perp_weight=E / G,
        info={"chart": "weyl-jet", "order": order},
    )


# -- key block -----------------------------------------------------------------------------


KEY_MONOMIALS = ((4, 0, 0, 0), (3, 1, 0, 0), (2, 2, 0, 0), (1, 3, 0, 0), (0, 4, 0, 0))
KEY_NAMES = ("K40", "K31", "K22", "K13", "K04")


class ExponentialsDoNotCancel(RuntimeError):
    pass


def keyblock_equations(model: ReducedModel, ansatz: OddCubicAnsatz) -> dict[str, FracElement]:
    """Coefficients of p_x^4 .. p_y^4 in {T, I^3}, divided by alpha and by e^{2gamma-2U}.

    Both divisions are checked: the result must be free of alpha, E2U and E2G.
    """
    F = ansatz.field
    T = MomentaPoly(F, {(2, 0, 0, 0): F.convert(model.t_xx), (0, 2, 0, 0): F.convert(model.t_yy)})
    I3 = MomentaPoly(F, {(3, 0, 0, 0): ansatz.a["a0"], (2, 1, 0, 0): ansatz.a["a1"],
                         (1, 2, 0, 0): ansatz.a["a2"], (0, 3, 0, 0): ansatz.a["a3"]})
    br = poisson(T, I3)
    scale = F["al"] * F["E2G"] / F["E2U"]
    out = {}
    for name, m in zip(KEY_NAMES, KEY_MONOMIALS):
        c = br.coefficient(m) / scale
        bad = [n for n in ("al", "E2U", "E2G") if F.depends_on(c, n)]
        if bad:
            raise ExponentialsDoNotCancel(f"{name} still depends on {bad}")
        out[name] = c
    return out


# -- elimination ---------------------------------------------------------------------------


@dataclass
class EliminationStep:
    name: str
    variable: str
    solution: FracElement
    pivot: FracElement
    pivot_factors: list
    verdict: ZeroVerdict
    guard_factors: list
    seconds: float

    def to_json(self) -> dict:
        return {
            "step": self.name,
            "eliminated": self.variable,
            "pivot": to_text(sympy.factor(self.pivot.as_expr())),
            "pivot_verdict": self.verdict.status,
            "guard_factors": self.guard_factors,
            "substitution_terms": len(self.solution.numer.terms()) + len(self.solution.denom.terms()),
            "seconds": round(self.seconds, 3),
        }


class PivotVanishes(RuntimeError):
    def __init__(self, step: str, verdict: ZeroVerdict):
        super().__init__(f"pivot of step {step} is {verdict.status}; take the side-branch path")
        self.verdict = verdict


ADMISSIBLE_BASE = ("x", "U_y", "E2U", "E2G")


def _factor_frac(f: FracElement) -> tuple[sympy.Expr, list[tuple[sympy.Expr, int]]]:
    """Content and irreducible factors of a fraction; denominator factors get negative exponents."""
    cn, fn = sympy.factor_list(f.numer.as_expr())
    cd, fd = sympy.factor_list(f.denom.as_expr())
    return cn / cd, [(b, e) for b, e in fn] + [(b, -e) for b, e in fd]


def _factor_texts(f: FracElement) -> list[tuple[sympy.Expr, int]]:
    return _factor_frac(f)[1]


def _plain(e: sympy.Expr) -> sympy.Expr:
    return sympy.sympify(e).xreplace({s: sympy.Symbol(s.name) for s in sympy.sympify(e).free_symbols})


def _is_admissible(b: sympy.Expr, admissible: list[sympy.Expr]) -> bool:
    if b.is_Number:
        return True
    b = _plain(b)
    return any(sympy.expand(b - _plain(a)) == 0 or sympy.expand(b + _plain(a)) == 0 for a in admissible)


def eliminate(F: RationalField, eq: FracElement, var: str, domain: Domain, *, name: str = "",
              admissible=(), n_samples: int = 30, seed=0) -> EliminationStep:
    """Solve ``eq = 0`` for the jet variable ``var``.

    Pivot factors that are not in ``admissible`` (x, U_y, the exponentials and
    any guards already recorded) are reported as new guard factors: the step
    is only valid where they do not vanish.
    """
    t0 = time.perf_counter()
    sol, piv = F.solve_affine(eq, var)
    v = equivalent_zero(piv, domain, n_samples, seed=f"{seed}/pivot/{name}", field=F)
    if not v.is_nonzero:
        raise PivotVanishes(name or var, v)
    adm = [sympy.Symbol(n) for n in ADMISSIBLE_BASE] + list(admissible)
    factors = _factor_texts(piv)
    guards = [to_text(b) for b, _ in factors if not _is_admissible(b, adm)]
    return EliminationStep(name, var, sol, piv, [to_text(b) for b, _ in factors], v, guards,
                           time.perf_counter() - t0)


# chain recorded in the source derivation: (step name, equation, eliminated variable)
CHAIN = (
    ("d/dx K31", "K31", "x", "U_xxxy"),
    ("d/dx K22", "K22", "x", "U_xxxx"),
    ("d/dx criterion", "C", "x", "U_xxy"),
    ("d/dx K40", "K40", "x", "U_xxx"),
    ("K40", "K40", None, "U_xx"),
    ("criterion", "C", None, "U_xy"),
)


def final_product_target(F: RationalField) -> FracElement:
    """x U_x^2 (1 + 2x U_x)(1 + x U_x)^2 (x U_x^2 + U_x + x U_y^2)^3."""
    X, Ux, Uy = F["x"], F["U_x"], F["U_y"]
    return X * Ux ** 2 * (1 + 2 * X * Ux) * (1 + X * Ux) ** 2 * (X * Ux ** 2 + Ux + X * Uy ** 2) ** 3


def chain_guard(F: RationalField) -> FracElement:
    X, Ux, Uy = F["x"], F["U_x"], F["U_y"]
    return (1 + 2 * X * Ux) * (X * Ux ** 2 - 3 * X * Uy ** 2 + Ux)


@dataclass
class FactorComparison:
    """``lhs = R * rhs`` with every factor of R admissible, plus a sampled Zero check."""

    ratio_factors: list
    inadmissible: list
    verdict: ZeroVerdict

    @property
    def ok(self) -> bool:
        return not self.inadmissible and self.verdict.is_zero

    def to_json(self) -> dict:
        return {"ratio_factors": self.ratio_factors, "inadmissible": self.inadmissible,
                "difference": self.verdict.to_json(), "ok": self.ok}


def compare_up_to_factor(F: RationalField, lhs: FracElement, rhs: FracElement, domain: Domain,
                         admissible=(), n_samples: int = 100, seed=0) -> FactorComparison:
    """Equality up to a product of admissible non-vanishing factors.

    The ratio is factored; a scalar ratio is the special case with no factors.
    The difference ``lhs - R rhs`` is then zero-tested as an independent check.
    """
    R = lhs / rhs
    adm = [sympy.Symbol(n) for n in ADMISSIBLE_BASE] + [sympy.sympify(a) for a in admissible]
    c, fl = _factor_frac(R)
    factors = [f"({to_text(b)})^{e}" for b, e in fl]
    bad = [to_text(b) for b, _ in fl if not _is_admissible(b, adm)]
    v = equivalent_zero(lhs - R * rhs, domain, n_samples, seed=f"{seed}/compare", field=F)
    return FactorComparison([to_text(c)] + factors, bad, v)


# -- specialisations for U_x = U_x(x) ----------------------------------------------------------------


def x_only_display(F: RationalField, reading: str = "U_x") -> FracElement:
    """The degree-4 polynomial in U_y displayed for the p_x^3 p_y component when U_x = U_x(x).

    One token of the display is unreadable; ``reading`` picks the restored
    middle coefficient: ``"U_x"`` -> 156 x^2 U_x (1 + x U_x) U_y^2,
    ``"none"`` -> 156 x^2 (1 + x U_x) U_y^2.
    """
    X, Ux, Uy, Uxx = F["x"], F["U_x"], F["U_y"], F["U_xx"]
    mid = 156 * X ** 2 * (1 + X * Ux) * Uy ** 2
    if reading == "U_x":
        mid = mid * Ux
    elif reading != "none":
        raise ValueError("reading must be 'U_x' or 'none'")
    return (10 * X ** 3 * Uy ** 4 + mid + 36 * X ** 2 * Ux * Uxx - 126 * X ** 3 * Ux ** 4 - 126 * X * Ux ** 2
            + 18 * X * Uxx - 18 * Ux - 252 * X ** 2 * Ux ** 3)


def substitute_all(F: RationalField, f: FracElement, subs) -> FracElement:
    for name, value in subs:
        f = F.substitute(f, name, F.convert(value))
    return f


def reduce_mod_square(F: RationalField, f: FracElement, name: str, square: FracElement) -> FracElement:
    """Reduce ``f`` modulo ``name^2 = square`` (odd powers keep one factor of ``name``)."""
    g = F[name]

    def red(P):
        i = F._index[name]
        out = F.zero()
        for mon, c in P.terms():
            k = mon[i]
            m2 = list(mon)
            m2[i] = 0
            out += F.K(P.ring({tuple(m2): c})) * square ** (k // 2) * g ** (k % 2)
        return out

    return red(f.numer) / red(f.denom)


# -- pipeline ----------------------------------------------------------------------------------


@dataclass
class Lemma8Result:
    trace: list
    final: FracElement
    final_comparison: FactorComparison
    branches: list
    checks: dict
    keyblock: dict
    criterion: FracElement
    field: RationalField
    seconds: float
    extra: dict = dc_field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "lemma8_trace": [s.to_json() for s in self.trace],
            "final_expression": to_text(sympy.factor(self.final.as_expr())),
            "final_vs_target": self.final_comparison.to_json(),
            "branches": self.branches,
            "checks": self.checks,
            **self.extra,
        }


def _branch_ledger() -> list[dict]:
    return [
        {"case": "U_x = 0", "origin": "factor U_x^2 of the final identity",
         "resolution": "U_x depends on x only, so U_y is constant and then zero; contradicts U_y != 0"},
        {"case": "U_x = -1/x", "origin": "factor (1 + x U_x)^2 of the final identity",
         "resolution": "U_x depends on x only; U_y = 0; contradiction"},
        {"case": "U_x = -1/(2x)", "origin": "factor (1 + 2x U_x) of the target product and of the chain guard",
         "resolution": "U_x depends on x only; the p_x^3 p_y component forces c = 0; contradiction"},
        {"case": "U_y^2 = -U_x (1 + x U_x) / x", "origin": "factor (x U_x^2 + U_x + x U_y^2)^3",
         "resolution": "ODE dU_y/dx = -4x U_y^3, f1 = (2y + c)^2, flat parametrisation: reducible"},
    ]


def _side_branches(guards: list[str]) -> list[dict]:
    return [
        {"case": "guard: x U_x^2 - 3x U_y^2 + U_x = 0", "origin": "pivot guard of the U_xxy elimination",
         "resolution": "U_y^2 = U_x(1 + x U_x)/(3x); the second relation U_y^2 = 3U_x(1 + x U_x)/x is taken "
                       "as stated (not re-derived); both hold only for U_x in {0, -1/x}",
         "guard_factors_seen": guards},
    ]


def lemma8_pipeline(order: int = 4, *, n_samples: int = 60, seed=0) -> Lemma8Result:
    """Prolongation and elimination chain on the generic jet model.

    Solves the cubic ansatz, forms the key block and the criterion, runs the
    recorded elimination order and compares the y-derivative of the p_x^4
    component with the target product.
    """
    t0 = time.perf_counter()
    model = jet_model(order)
    crit, cv, ans = necessary_criterion(model, n_samples=30, seed=f"{seed}/alpha")
    F = ans.field
    for n, e in (("A", ans.A), ("B", ans.B)):
        high = [g for g in F.generators_of(e) if g.startswith("U_") and len(g) - 2 > 2]
        if high:
            raise AssertionError(f"{n} contains jet variables above second order: {high}")
    K = keyblock_equations(model, ans)
    eqs = dict(K)
    eqs["C"] = crit
    dom = model.domain
    subs: list = []
    trace: list[EliminationStep] = []
    admissible: list = []
    for name, eq_name, dvar, var in CHAIN:
        eq = eqs[eq_name]
        if dvar == "x":
            eq = F.d(eq, "x")
        eq = substitute_all(F, eq, subs)
        step = eliminate(F, eq, var, dom, name=name, admissible=admissible, n_samples=30, seed=seed)
        admissible += [sympy.sympify(g.replace("^", "**")) for g in step.guard_factors]
        trace.append(step)
        subs.append((var, step.solution))
    final = substitute_all(F, F.d(K["K40"], "y"), subs)
    guard_exprs = [sympy.factor_list(chain_guard(F).as_expr())[1][i][0] for i in range(2)]
    cmp = compare_up_to_factor(F, final, F.convert(final_product_target(F)), dom,
                               admissible=admissible + guard_exprs, n_samples=n_samples, seed=seed)
    guards = sorted({g for s in trace for g in s.guard_factors})
    checks = x_only_checks(F, K, dom, n_samples=n_samples, seed=seed)
    checks["fourth_case"] = fourth_case_checks(F, K["K40"], crit, dom, subs[:4], n_samples=n_samples, seed=seed)
    checks["flat_branch"] = flat_branch_checks(n_samples=n_samples, seed=seed)
    checks["commuting_total_derivatives"] = commuting_check(F, dom, seed=seed)
    return Lemma8Result(trace, final, cmp, _branch_ledger(), checks, K, crit, F,
                        time.perf_counter() - t0, {"side_branches": _side_branches(guards)})


def x_only_checks(F: RationalField, K: dict, dom: Domain, *, n_samples: int = 60, seed=0) -> dict:
    """Specialisations of the key block for U_x = U_x(x) (so U_y = c, U_xy = U_xxy = 0)."""
    out: dict = {}
    c = ("U_y", F["U_y"])
    zero_mixed = [("U_xy", F.zero()), ("U_xxy", F.zero())]
    k31 = substitute_all(F, K["K31"], zero_mixed)
    for reading in ("U_x", "none"):
        cmp = compare_up_to_factor(F, k31, x_only_display(F, reading), dom, n_samples=n_samples,
                                   seed=f"{seed}/l6/{reading}")
        out[f"K31_vs_display[{reading}]"] = cmp.to_json()
    X, Ux = F["x"], F["U_x"]
    ernst_xx = [("U_xx", -Ux / X)]
    k40 = substitute_all(F, K["K40"], zero_mixed + ernst_xx)
    target = 6 * Ux * (1 + X * Ux) * (1 + 2 * X * Ux)
    out["K40_U(x)_vs_6Ux(1+xUx)(1+2xUx)"] = compare_up_to_factor(
        F, k40, target, dom, n_samples=n_samples, seed=f"{seed}/l6/k40").to_json()
    half = [("U_xx", 1 / (2 * X ** 2)), ("U_x", -1 / (2 * X))]
    k31h = substitute_all(F, k31, half)
    ch = c[1]
    target = ch ** 2 * (9 - 312 * X ** 2 * ch ** 2 + 80 * X ** 4 * ch ** 4) / (8 * X)
    out["K31_at_Ux=-1/(2x)"] = compare_up_to_factor(F, k31h, target, dom, n_samples=n_samples,
                                                    seed=f"{seed}/l6/half").to_json()
    for label, sub in (("0", [("U_xx", F.zero()), ("U_x", F.zero())]),
                       ("-1/x", [("U_xx", 1 / X ** 2), ("U_x", -1 / X)])):
        e = substitute_all(F, k31, sub)
        entry = {"computed": to_text(sympy.factor(e.as_expr()))}
        for power in (4, 6):
            cmpp = compare_up_to_factor(F, e, 10 * X ** 3 * ch ** power, dom, n_samples=n_samples,
                                        seed=f"{seed}/l6/{label}/{power}")
            entry[f"vs_10x^3c^{power}"] = {"ratio_factors": cmpp.ratio_factors, "ok": cmpp.ok}
        out[f"K31_at_Ux={label}"] = entry
    return out


def fourth_case_checks(F: RationalField, K40: FracElement, crit: FracElement, dom: Domain, subs=(), *,
                       n_samples: int = 60, seed=0) -> dict:
    """On U_y^2 = -U_x(1 + x U_x)/x: solve K40 for U_xx, the criterion for U_xy, then
    test dU_y/dx + 4x U_y^3 and compatibility of the two expressions.

    ``subs`` are the third- and fourth-order eliminations of the main chain.
    Identities are reduced modulo the relation, so U_y is sampled freely.
    """
    X, Ux, Uy = F["x"], F["U_x"], F["U_y"]
    r = -Ux * (1 + X * Ux) / X
    k40 = reduce_mod_square(F, substitute_all(F, K40, subs), "U_y", r)
    uxx, _ = F.solve_affine(F.K(k40.numer), "U_xx")
    c = reduce_mod_square(F, F.substitute(substitute_all(F, crit, subs), "U_xx", uxx), "U_y", r)
    uxy, _ = F.solve_affine(F.K(c.numer), "U_xy")
    dom4 = dom
    ode = reduce_mod_square(F, uxy + 4 * X * Uy ** 3, "U_y", r)
    v_ode = equivalent_zero(ode, dom4, n_samples, seed=f"{seed}/ode", field=F)
    # d/dx (U_y^2) computed from r must equal 2 U_y U_xy
    dr = F.partial(r, "x") + F.partial(r, "U_x") * uxx
    compat = reduce_mod_square(F, 2 * Uy * uxy - dr, "U_y", r)
    v_comp = equivalent_zero(compat, dom4, n_samples, seed=f"{seed}/compat", field=F)
    return {
        "U_xx": to_text(sympy.factor(uxx.as_expr())),
        "U_xy": to_text(sympy.factor(reduce_mod_square(F, uxy, "U_y", r).as_expr())),
        "ode_dUy/dx+4xUy^3": v_ode.to_json(),
        "U_xx_U_xy_compatible": v_comp.to_json(),
    }


def commuting_check(F: RationalField, dom: Domain, n_samples: int = 30, seed=0) -> dict:
    """d_y d_x = d_x d_y on low-order jets and on the gamma gradient (modulo Ernst)."""
    out = {}
    for n in ("U_x", "U_y", "U_xy", "E2G"):
        e = F[n]
        v = equivalent_zero(F.d(F.d(e, "x"), "y") - F.d(F.d(e, "y"), "x"), dom, n_samples,
                            seed=f"{seed}/comm/{n}", field=F)
        out[n] = v.status
    v = equivalent_zero(F.d(gamma_x(F), "y") - F.d(gamma_y(F), "x"), dom, n_samples, seed=f"{seed}/comm/gamma",
                        field=F)
    out["gamma_x_y-gamma_y_x"] = v.status
    return out


# -- flat branch -------------------------------------------------------------------------------


X_, Y_, C_, C2_, K_ = sympy.symbols("x y c c2 k")
S_ = sympy.sqrt(4 * X_ ** 2 + 4 * Y_ ** 2 + 4 * C_ * Y_ + C_ ** 2)


def flat_U(c=C_, c2=C2_) -> sympy.Expr:
    s = S_.subs(C_, c)
    return sympy.log(2 * Y_ + c + s) / 2 - sympy.log(X_) + c2


def flat_gamma(c=C_, c2=C2_, k=K_) -> sympy.Expr:
    """gamma with e^{2gamma} = 2k S e^{2U}."""
    return sympy.log(2 * k * S_.subs(C_, c)) / 2 + flat_U(c, c2)


FLAT_DOMAIN = Domain({"x": (Fraction(1, 2), Fraction(4)), "y": (Fraction(-2), Fraction(2)),
                      "c": (Fraction(-1), Fraction(1)), "c2": (Fraction(-1), Fraction(1)),
                      "k": (Fraction(1, 2), Fraction(2))})


def flat_branch_solution(c=C_, c2=C2_, *, n_samples: int = 100, seed=0, validate: bool = True):
    """Weyl model of the flat parametrisation; Ernst and gamma checks run on construction."""
    from .models import weyl_from_U

    dom = FLAT_DOMAIN
    return weyl_from_U(flat_U(c, c2), flat_gamma(c, c2), dom, name="flat-branch", n_samples=n_samples,
                       seed=seed, validate=validate)


def _sympy_zero(e: sympy.Expr, dom: Domain, n_samples: int, seed) -> ZeroVerdict:
    return equivalent_zero(e, dom, n_samples, seed=seed)


def flat_branch_checks(n_samples: int = 60, seed=0) -> dict:
    """Closed-form identities of the flat branch, each as an independent sampled test."""
    f1 = (2 * Y_ + C_) ** 2
    sq = sympy.sqrt(f1)
    pos = FLAT_DOMAIN.with_intervals(y=(Fraction(1, 2), Fraction(2)))  # 2y + c > 0
    neg = FLAT_DOMAIN.with_intervals(y=(Fraction(-2), Fraction(-1, 2)))  # 2y + c < 0
    U = flat_U()
    Ux, Uy = sympy.diff(U, X_), sympy.diff(U, Y_)
    out = {
        "f1_y-4sqrt(f1)[2y+c>0]": _sympy_zero(sympy.diff(f1, Y_) - 4 * sq, pos, n_samples, f"{seed}/f1-").status,
        "f1_y+4sqrt(f1)[2y+c<0]": _sympy_zero(sympy.diff(f1, Y_) + 4 * sq, neg, n_samples, f"{seed}/f1+").status,
        "U_y=1/sqrt(4x^2+f1)": _sympy_zero(Uy - 1 / sympy.sqrt(4 * X_ ** 2 + f1), FLAT_DOMAIN, n_samples,
                                           f"{seed}/uy").status,
        "U_y=1/sqrt(4x^2-f1)": _sympy_zero(Uy - 1 / sympy.sqrt(4 * X_ ** 2 - f1),
                                           FLAT_DOMAIN.with_intervals(y=(Fraction(-1, 5), Fraction(1, 5)),
                                                                      c=(Fraction(-1, 5), Fraction(1, 5))),
                                           n_samples, f"{seed}/uy-minus").status,
        "ode_dUy/dx+4xUy^3": _sympy_zero(sympy.diff(Uy, X_) + 4 * X_ * Uy ** 3, FLAT_DOMAIN, n_samples,
                                         f"{seed}/ode").status,
        "fourth_case_relation": _sympy_zero(Uy ** 2 + Ux * (1 + X_ * Ux) / X_, FLAT_DOMAIN, n_samples,
                                            f"{seed}/rel").status,
    }
    branches = [(-4 * X_ ** 2 - f1 + s * sympy.sqrt(4 * X_ ** 2 * f1 + f1 ** 2)) / (2 * X_ * (4 * X_ ** 2 + f1))
                for s in (1, -1)]
    out["U_x_branch"] = [_sympy_zero(Ux - b, FLAT_DOMAIN.with_intervals(**{"y": (Fraction(1, 2), Fraction(2))}),
                                     n_samples, f"{seed}/ux{i}").status for i, b in enumerate(branches)]
    f2x = -4 * X_ / ((2 * Y_ + C_ + S_) * S_)
    out["ernst[(f2)_x=-1/x]"] = _ernst_of(sympy.log(2 * Y_ + C_ + S_) / 2 - sympy.log(X_))
    # the second candidate for (f2)_x is not a function of x alone
    out["d/dy[(f2)_x alternative]"] = _sympy_zero(sympy.diff(f2x, Y_), FLAT_DOMAIN, n_samples,
                                                  f"{seed}/f2").status
    return out


def _ernst_of(U: sympy.Expr) -> str:
    r = sympy.diff(U, X_, 2) + sympy.diff(U, Y_, 2) + sympy.diff(U, X_) / X_
    return _sympy_zero(r, FLAT_DOMAIN, 30, "ernst").status


def specialize(F: RationalField, f: FracElement, U: sympy.Expr, gamma: sympy.Expr | None = None) -> sympy.Expr:
    """Replace jet variables by the derivatives of a concrete potential."""
    e = f.as_expr()
    sub = {}
    for s in e.free_symbols:
        n = s.name
        if n == "x":
            sub[s] = X_
        elif n.startswith("U_"):
            letters = n[2:]
            sub[s] = sympy.diff(U, X_, letters.count("x"), Y_, letters.count("y"))
        elif n == "E2U":
            sub[s] = sympy.exp(2 * U)
        elif n == "E2G":
            if gamma is None:
                raise ValueError("E2G needs gamma")
            sub[s] = sympy.exp(2 * gamma)
    return e.xreplace(sub)


def keyblock_on_potential(res: Lemma8Result, U: sympy.Expr, dom: Domain, n_samples: int = 30, seed=0) -> dict:
    """Zero verdicts of the key-block components and the criterion on a concrete U."""
    out = {}
    for n, e in list(res.keyblock.items()) + [("criterion", res.criterion)]:
        out[n] = equivalent_zero(specialize(res.field, e, U), dom, n_samples, seed=f"{seed}/{n}").status
    return out


__all__ = [
    "jet_name", "jet_names", "jet_field", "jet_model", "total_dx", "total_dy", "JetOrderExceeded",
    "keyblock_equations", "eliminate", "EliminationStep", "PivotVanishes", "compare_up_to_factor",
    "lemma8_pipeline", "Lemma8Result", "x_only_display", "final_product_target", "chain_guard",
    "flat_branch_solution", "flat_U", "flat_gamma", "flat_branch_checks", "fourth_case_checks",
    "reduce_mod_square", "specialize", "keyblock_on_potential", "gamma_x", "gamma_y", "FLAT_DOMAIN",
    "ExponentialsDoNotCancel", "KEY_NAMES", "CHAIN",
]
