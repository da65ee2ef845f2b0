"""Decision pipeline for odd cubic integrals and the quadratic-integral checks.

Stages, all working in the model's RationalField:

1. gradient matrix of (V^phiphi, V^tt) and its generic rank,
2. bottom block: b^aa = alpha_a grad_perp V^aa and the relation
   (alpha_2 - alpha_1) nu = 0 forcing a single alpha in rank 2,
3. middle block: six linear equations for the cubic coefficients a0..a3,
   whose two compatibility relations give alpha_x = A alpha, alpha_y = B alpha,
4. the necessary criterion A_y - B_x.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

import sympy

from . import __version__
from .expr.core import AUXILIARY, to_text
from .expr.field import FracElement, RationalField
from .expr.linsolve import LinearSolution, solve_linear
from .expr.zero import INCONCLUSIVE, NONZERO, ZERO, Domain, ZeroVerdict, equivalent_zero
from .models import Convention, ReducedModel, _delta_value, zipoy_voorhees
from .momenta import MomentaPoly, poisson

ALPHA = ("al", "al_x", "al_y")
CUBIC = ("a0", "a1", "a2", "a3")
CUBIC_MONOMIALS = {"a0": (3, 0, 0, 0), "a1": (2, 1, 0, 0), "a2": (1, 2, 0, 0), "a3": (0, 3, 0, 0)}


class RankTooLow(ValueError):
    """The rank-2 pipeline was requested for a model whose gradient matrix has rank < 2."""


# -- gradient matrix -------------------------------------------------------------------


@dataclass
class GradientMatrix:
    dV_phiphi: tuple
    dV_tt: tuple
    dV_tphi: tuple
    det: FracElement


def gradient_matrix(model: ReducedModel) -> GradientMatrix:
    F = model.field
    dpp = (F.d(model.V_phiphi, "x"), F.d(model.V_phiphi, "y"))
    dtt = (F.d(model.V_tt, "x"), F.d(model.V_tt, "y"))
    return GradientMatrix(dpp, dtt, (F.zero(), F.zero()), dpp[0] * dtt[1] - dpp[1] * dtt[0])


@dataclass
class RankVerdict:
    value: int | None
    det: ZeroVerdict
    columns: dict
    flat_flag: bool
    incomplete: bool

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "det_witness": self.det.witness.to_json() if self.det.witness else None,
            "det_verdict": self.det.to_json(),
            "columns": {k: v.to_json() for k, v in self.columns.items()},
            "flat_flag": self.flat_flag,
        }


def rank_M(model: ReducedModel, n_samples: int = 200, *, precision: int = 40, seed=0, tol=None) -> RankVerdict:
    """Generic rank of the gradient matrix on the model domain.

    ``flat_flag`` is raised when dV^tt vanishes identically (constant e^{2U}).
    """
    M = gradient_matrix(model)
    F, dom = model.field, model.domain
    dv = equivalent_zero(M.det, dom, n_samples, tol, precision=precision, seed=f"{seed}/det", field=F)
    cols = {}
    for name, vec in (("V_phiphi", M.dV_phiphi), ("V_tt", M.dV_tt)):
        for comp, f in zip("xy", vec):
            cols[f"d{name}/d{comp}"] = equivalent_zero(f, dom, n_samples, tol, precision=precision,
                                                       seed=f"{seed}/{name}/{comp}", field=F)
    verdicts = [dv] + list(cols.values())
    incomplete = any(v.status == INCONCLUSIVE for v in verdicts)
    if dv.is_nonzero:
        value = 2
    elif any(v.is_nonzero for v in cols.values()):
        value = 1 if dv.is_zero else None
    elif all(v.is_zero for v in cols.values()):
        value = 0 if dv.is_zero else None
    else:
        value = None
    flat = cols["dV_tt/dx"].is_zero and cols["dV_tt/dy"].is_zero
    return RankVerdict(value, dv, cols, flat, incomplete)


def nabla_perp(model: ReducedModel, f: FracElement) -> tuple[FracElement, FracElement]:
    """Rotated gradient ``w (-f_y, f_x)`` with the model's weight ``w``."""
    F = model.field
    w = model.perp_weight
    return (-w * F.d(f, "y"), w * F.d(f, "x"))


def dot(u, v):
    return u[0] * v[0] + u[1] * v[1]


# -- bottom and middle blocks -------------------------------------------------------------


@dataclass
class OddCubicAnsatz:
    """State of the rank-2 pipeline for one model."""

    field: RationalField
    nu: FracElement
    sin_psi_numerator: FracElement
    nu_verdict: ZeroVerdict
    scalar_relations: list
    b_phiphi: tuple
    b_tt: tuple
    a: dict = dc_field(default_factory=dict)
    A: FracElement | None = None
    B: FracElement | None = None
    equations: list = dc_field(default_factory=list)
    solve: LinearSolution | None = None
    alpha_solve: LinearSolution | None = None
    consistency: list = dc_field(default_factory=list)
    mixed_relation: FracElement | None = None


def _alpha_field(model: ReducedModel) -> RationalField:
    F = model.field
    if "al" in F:
        return F
    return F.extend(
        [("al", AUXILIARY), ("al_x", AUXILIARY), ("al_y", AUXILIARY), ("al2", AUXILIARY),
         ("a0", AUXILIARY), ("a1", AUXILIARY), ("a2", AUXILIARY), ("a3", AUXILIARY)],
        rules={"al": {"x": lambda K: K["al_x"], "y": lambda K: K["al_y"]}},
    )


def solve_odd_bottom_block(model: ReducedModel, n_samples: int = 100, *, precision: int = 40, seed=0,
                           require_rank2: bool = True) -> OddCubicAnsatz:
    """Bottom block {V, I^1} = 0 solved by b^aa = alpha grad_perp V^aa.

    With separate functions alpha_1, alpha_2 the mixed relation equals
    (alpha_1 - alpha_2) nu with nu = <grad V^tt, grad_perp V^phiphi>; in rank 2
    nu is non-zero and a single alpha remains.
    """
    F = _alpha_field(model)
    conv = F.convert
    Vp, Vt, w = conv(model.V_phiphi), conv(model.V_tt), conv(model.perp_weight)
    gp = (F.d(Vp, "x"), F.d(Vp, "y"))
    gt = (F.d(Vt, "x"), F.d(Vt, "y"))
    perp_p = (-w * gp[1], w * gp[0])
    perp_t = (-w * gt[1], w * gt[0])
    nu = dot(gt, perp_p)
    nv = equivalent_zero(nu, model.domain, n_samples, precision=precision, seed=f"{seed}/nu", field=F)
    if require_rank2 and not nv.is_nonzero:
        raise RankTooLow(f"nu is {nv.status}: gradients are parallel, use the rank-1 path")
    a1, a2 = F["al"], F["al2"]
    b_pp = (a1 * perp_p[0], a1 * perp_p[1])
    b_tt = (a2 * perp_t[0], a2 * perp_t[1])
    relations = [dot(gp, b_pp), dot(gt, b_tt), dot(gp, b_tt) + dot(gt, b_pp)]
    single = [F.substitute(r, "al2", a1) for r in relations]
    out = OddCubicAnsatz(F, nu, gp[0] * gt[1] - gp[1] * gt[0], nv, [], (a1 * perp_p[0], a1 * perp_p[1]),
                         (a1 * perp_t[0], a1 * perp_t[1]))
    for i, r in enumerate(single):
        out.scalar_relations.append(
            equivalent_zero(r, model.domain, max(30, n_samples // 2), precision=precision,
                            seed=f"{seed}/scalar/{i}", field=F))
    out.mixed_relation = relations[2]
    return out


EQUATION_ORDER = (("phiphi", (2, 0)), ("tt", (2, 0)), ("phiphi", (0, 2)), ("tt", (0, 2)),
                  ("phiphi", (1, 1)), ("tt", (1, 1)))
UNKNOWN_ORDER = ("a0", "a1", "a3", "a2")


def middle_block_equations(model: ReducedModel, ansatz: OddCubicAnsatz) -> list[FracElement]:
    """Coefficients of {T, I^1} + {V, I^3} in the order of ``EQUATION_ORDER``."""
    F = ansatz.field
    conv = F.convert
    T = MomentaPoly(F, {(2, 0, 0, 0): conv(model.t_xx), (0, 2, 0, 0): conv(model.t_yy)})
    V = MomentaPoly(F, {(0, 0, 2, 0): conv(model.V_phiphi), (0, 0, 0, 2): conv(model.V_tt)})
    I3 = MomentaPoly(F, {m: F[n] for n, m in CUBIC_MONOMIALS.items()})
    I1 = MomentaPoly(F, {(1, 0, 2, 0): ansatz.b_phiphi[0], (0, 1, 2, 0): ansatz.b_phiphi[1],
                         (1, 0, 0, 2): ansatz.b_tt[0], (0, 1, 0, 2): ansatz.b_tt[1]})
    block = poisson(T, I1) + poisson(V, I3)
    eqs = []
    for which, (i, j) in EQUATION_ORDER:
        m = (i, j, 2, 0) if which == "phiphi" else (i, j, 0, 2)
        eqs.append(block.coefficient(m))
    return eqs


def solve_cubic_leading(model: ReducedModel, ansatz: OddCubicAnsatz | None = None, n_samples: int = 30, *,
                        precision: int = 40, seed=0) -> OddCubicAnsatz:
    """Solve the middle block for a0..a3 and read off A and B.

    The four equations carrying a0 and a3 are pivoted first; the duplicated
    expressions for a1 and a2 leave two residual relations, linear in
    (alpha, alpha_x, alpha_y), which are solved for alpha_x and alpha_y.
    """
    ansatz = ansatz or solve_odd_bottom_block(model, precision=precision, seed=seed)
    F = ansatz.field
    eqs = middle_block_equations(model, ansatz)
    sol = solve_linear(eqs, list(UNKNOWN_ORDER), model.domain, field=F, n_samples=n_samples,
                       precision=precision, seed=f"{seed}/cubic", free=ALPHA)
    if len(sol.residuals) != 2 or len(sol.solution) != 4:
        raise RuntimeError(f"unexpected middle-block structure: {len(sol.solution)} solved, "
                           f"{len(sol.residuals)} residuals")
    asol = solve_linear(sol.residuals, ["al_x", "al_y"], model.domain, field=F, n_samples=n_samples,
                        precision=precision, seed=f"{seed}/alpha", free=("al",))
    al = F["al"]
    A = asol.solution["al_x"] / al
    B = asol.solution["al_y"] / al
    for name, e in (("A", A), ("B", B)):
        if F.depends_on(e, "al") or F.depends_on(e, "al_x") or F.depends_on(e, "al_y"):
            raise RuntimeError(f"{name} is not independent of alpha")
    G = F.with_rules({"al": {"x": A * al, "y": B * al}})
    a = {}
    for n in CUBIC:
        e = G.substitute(G.convert(sol.solution[n]), "al_x", A * al)
        a[n] = G.substitute(e, "al_y", B * al)
    ansatz.field = G
    ansatz.a, ansatz.A, ansatz.B = a, G.convert(A), G.convert(B)
    ansatz.equations, ansatz.solve, ansatz.alpha_solve = eqs, sol, asol
    # re-substitution of a0..a3 into all six equations, with alpha_x = A alpha, alpha_y = B alpha
    for i, eq in enumerate(eqs):
        r = G.convert(eq)
        for n in CUBIC:
            r = G.substitute(r, n, a[n])
        r = G.substitute(G.substitute(r, "al_x", A * al), "al_y", B * al)
        ansatz.consistency.append(r)
    return ansatz


def necessary_criterion(model: ReducedModel, ansatz: OddCubicAnsatz | None = None, n_samples: int = 200, *,
                        precision: int = 40, seed=0, tol=None) -> tuple[FracElement, ZeroVerdict, OddCubicAnsatz]:
    """``A_y - B_x`` and its zero verdict on the model domain."""
    if ansatz is None or ansatz.A is None:
        ansatz = solve_cubic_leading(model, ansatz, precision=precision, seed=seed)
    G = ansatz.field
    crit = G.d(ansatz.A, "y") - G.d(ansatz.B, "x")
    v = equivalent_zero(crit, model.domain, n_samples, tol, precision=precision, seed=f"{seed}/criterion", field=G)
    return crit, v, ansatz


# -- Killing residuals and quadratic integrals -------------------------------------------------


@dataclass
class KillingResidual:
    status: str
    coefficients: dict
    bracket: MomentaPoly

    @property
    def witness(self):
        for v in self.coefficients.values():
            if v.is_nonzero:
                return v.witness
        return None

    def to_json(self) -> dict:
        return {"status": self.status,
                "coefficients": {" ".join(map(str, m)): v.to_json() for m, v in self.coefficients.items()}}


def _combine(verdicts) -> str:
    verdicts = list(verdicts)
    if any(v.is_nonzero for v in verdicts):
        return NONZERO
    if all(v.is_zero for v in verdicts):
        return ZERO
    return INCONCLUSIVE


def killing_residual(H: MomentaPoly, I: MomentaPoly, domain: Domain, n_samples: int = 100, *,
                     precision: int = 40, seed=0, tol=None) -> KillingResidual:
    """Zero test of every coefficient of {H, I}; Zero means I is an integral."""
    br = poisson(H, I)
    verdicts = {}
    for m, c in br.terms.items():
        verdicts[m] = equivalent_zero(c, domain, n_samples, tol, precision=precision, seed=f"{seed}/{m}",
                                      field=H.field)
    return KillingResidual(_combine(verdicts.values()) if verdicts else ZERO, verdicts, br)


def quadratic_equations(model: ReducedModel, F: MomentaPoly) -> list[MomentaPoly]:
    """The four determining residuals for an even quadratic ``F = I^2 + I^0``.

    ``{T, I^2}``, ``{V^pp, I^2} + {T, I^0_pp}``, ``{V^tp, I^2} + {T, I^0_tp}``,
    ``{V^tt, I^2} + {T, I^0_tt}``.
    """
    K = F.field
    conv = K.convert
    T = MomentaPoly(K, {(2, 0, 0, 0): conv(model.t_xx), (0, 2, 0, 0): conv(model.t_yy)})
    I2 = MomentaPoly(K, {m: c for m, c in F.terms.items() if m[0] + m[1] == 2})
    rest = {m: c for m, c in F.terms.items() if m[0] + m[1] != 2}
    if any(m[0] + m[1] != 0 or m[2] + m[3] != 2 for m in rest) or any(sum(m) != 2 for m in F.terms):
        raise ValueError("F must be an even quadratic in the momenta")

    def scalar(c):
        return MomentaPoly.scalar(K, c)

    b_pp, b_tp, b_tt = (rest.get(m, K.zero()) for m in ((0, 0, 2, 0), (0, 0, 1, 1), (0, 0, 0, 2)))
    return [
        poisson(T, I2),
        poisson(scalar(conv(model.V_phiphi)), I2) + poisson(T, scalar(b_pp)),
        poisson(scalar(conv(model.V_tphi)), I2) + poisson(T, scalar(b_tp)),
        poisson(scalar(conv(model.V_tt)), I2) + poisson(T, scalar(b_tt)),
    ]


def quadratic_verdicts(model: ReducedModel, F: MomentaPoly, n_samples: int = 100, *, precision: int = 40,
                       seed=0, tol=None) -> list[str]:
    out = []
    for i, R in enumerate(quadratic_equations(model, F)):
        vs = [equivalent_zero(c, model.domain, n_samples, tol, precision=precision, seed=f"{seed}/q{i}/{m}",
                              field=F.field) for m, c in R.terms.items()]
        out.append(_combine(vs) if vs else ZERO)
    return out


def carter_candidate(model: ReducedModel) -> MomentaPoly:
    """``(1 - y^2) p_y^2 + p_phi^2 / (1 - y^2)`` in the model field."""
    K = model.field
    s = 1 - K["y"] ** 2
    return MomentaPoly(K, {(0, 2, 0, 0): s, (0, 0, 2, 0): 1 / s})


# -- ZV quadratic family ---------------------------------------------------------------------


@dataclass
class QuadraticFamily:
    delta: str
    sign_reading: str
    a: dict
    b: dict
    identity_verdict: ZeroVerdict | None
    a1_is_zero: bool
    conventions: dict
    succeeded: list
    membership: dict
    notes: list

    def to_json(self) -> dict:
        return {
            "delta": self.delta,
            "sign_reading": self.sign_reading,
            "a1_zero": self.a1_is_zero,
            "identity_(y^2-1)a2+(x^2-1)a0": self.identity_verdict.to_json() if self.identity_verdict else None,
            "conventions": self.conventions,
            "succeeded": self.succeeded,
            "membership": self.membership,
            "notes": self.notes,
        }


def zv_family_exprs(delta, sign_reading: str = "modulus") -> dict[str, sympy.Expr]:
    """Reference ZV quadratic family, with constants relabelled to F = c1 H + c2 pp^2 + c3 pp pt + c4 pt^2.

    ``sign_reading="literal"`` keeps the base ``y^2 - x^2`` of a0 (negative on the
    domain); ``"modulus"`` uses ``x^2 - y^2``.
    """
    d = _delta_value(delta)
    x, y = sympy.symbols("x y")
    c1, c2, c3, c4 = sympy.symbols("c1 c2 c3 c4")
    base = (y ** 2 - x ** 2) if sign_reading == "literal" else (x ** 2 - y ** 2)
    if sign_reading not in ("literal", "modulus"):
        raise ValueError("sign_reading must be 'literal' or 'modulus'")
    P = ((x + 1) / (x - 1)) ** d
    a0 = c1 * base ** (1 - d ** 2) * (x + 1) ** (d ** 2 + d - 1) * (x - 1) ** (d ** 2 - d - 1)
    a2 = -c1 * ((x ** 2 - 1) / (x ** 2 - y ** 2)) ** (d ** 2) * P * (x ** 2 - y ** 2) / (y ** 2 - 1)
    b0 = -c1 * (y ** 2 - 1) * (x ** 2 - 1) * P + c2
    b2 = -c1 * ((x - 1) / (x + 1)) ** d + c4
    return {"a0": a0, "a1": sympy.Integer(0), "a2": a2, "b0": b0, "b1": c3, "b2": b2}


def zv_quadratic_family(delta, *, sign_reading: str = "modulus", n_samples: int = 100, precision: int = 40,
                        seed=0, conventions: Sequence = tuple(Convention)) -> QuadraticFamily:
    """Check the reference ZV quadratic family against every Hamiltonian convention.

    For each convention the four determining residuals are zero-tested, and F
    is compared with ``c1' H + c2 p_phi^2 + c3 p_phi p_t + c4 p_t^2`` where
    ``c1'`` is fitted as ``a0 / H_xx`` (which must itself be constant).
    Nothing is guessed: if no convention works the report says so.
    """
    fam = zv_family_exprs(delta, sign_reading)
    notes = []
    d = _delta_value(delta)
    if d == 1:
        notes.append("delta = 1 (Schwarzschild): the family derivation assumes delta != 1")
    results, succeeded, membership = {}, [], {}
    identity = None
    for conv in conventions:
        conv = Convention(conv)
        m = zipoy_voorhees(d, conv, extra=fam)
        K = m.field
        e = m.extras
        Fq = MomentaPoly(K, {(2, 0, 0, 0): e["a0"], (1, 1, 0, 0): e["a1"], (0, 2, 0, 0): e["a2"],
                             (0, 0, 2, 0): e["b0"], (0, 0, 1, 1): e["b1"], (0, 0, 0, 2): e["b2"]})
        dom = m.domain.with_intervals(c1=(Fraction(1, 2), Fraction(2)))
        mdl = ReducedModel(m.name, K, dom, m.t_xx, m.t_yy, m.V_phiphi, m.V_tt, m.perp_weight, m.metric4d, m.info)
        if identity is None:
            X, Y = K["x"], K["y"]
            identity = equivalent_zero((Y ** 2 - 1) * e["a2"] + (X ** 2 - 1) * e["a0"], dom, n_samples,
                                       precision=precision, seed=f"{seed}/identity", field=K)
        qv = quadratic_verdicts(mdl, Fq, n_samples, precision=precision, seed=f"{seed}/{conv.value}")
        results[conv.value] = qv
        if all(s == ZERO for s in qv):
            succeeded.append(conv.value)
        ratio = e["a0"] / m.t_xx
        const = [equivalent_zero(K.d(ratio, v), dom, n_samples, precision=precision,
                                 seed=f"{seed}/{conv.value}/ratio_{v}", field=K) for v in "xy"]
        c2, c3, c4 = K["c2"], K["c3"], K["c4"]
        H = mdl.H
        diff = Fq - (H * ratio + MomentaPoly(K, {(0, 0, 2, 0): c2, (0, 0, 1, 1): c3, (0, 0, 0, 2): c4}))
        dv = [equivalent_zero(c, dom, n_samples, precision=precision, seed=f"{seed}/{conv.value}/member/{mm}",
                              field=K) for mm, c in diff.terms.items()]
        membership[conv.value] = {
            "fitted_c1_constant": _combine(const),
            "fitted_c1": _constant_text(K, ratio, dom) if all(v.is_zero for v in const) else None,
            "residual": _combine(dv) if dv else ZERO,
        }
    return QuadraticFamily(str(d), sign_reading, {k: fam[k] for k in ("a0", "a1", "a2")},
                           {k: fam[k] for k in ("b0", "b1", "b2")}, identity, fam["a1"] == 0, results,
                           succeeded, membership, notes)


def _constant_text(K: RationalField, f: FracElement, dom: Domain) -> str:
    """Text of an element already known to be independent of x and y.

    Atoms are not algebraically independent, so the element is evaluated at
    one point with the linear parameter c1 = 1 and the value identified.
    """
    point = dom.sample(K.base_names(f), random.Random("constant"))
    point["c1"] = Fraction(1)
    value, _, _ = K.evaluate(f, point, precision=40)
    q = sympy.nsimplify(sympy.Float(str(value), 40), rational=True, tolerance=sympy.Rational(1, 10 ** 25))
    return to_text(q * sympy.Symbol("c1"))


# -- report ---------------------------------------------------------------------------------


CONCLUSION_RANK1 = "additional-Killing-vector"
CONCLUSION_NO_CUBIC = "no-nontrivial-odd-cubic"
CONCLUSION_DEGENERATE = "criterion-degenerate"


def _is_zv(model: ReducedModel) -> bool:
    return model.info.get("chart") == "prolate_spheroidal"


def reducibility_report(model: ReducedModel, n_samples: int = 200, *, precision: int = 40, seed=0, tol=None,
                        quadratic: bool = True, flatness: bool = True) -> dict:
    """Run the decision table and return a JSON-ready report.

    Rank <= 1: p_y is tested as a linear integral (extra Killing vector).
    Rank 2: the alpha pipeline runs; a non-zero criterion forces alpha = 0,
    a zero criterion marks the degenerate branch, where flatness is checked.
    """
    rep: dict = {
        "tool": {"name": "weylkt", "version": __version__},
        "model": model.describe(),
        "seed": seed,
        "samples": n_samples,
        "precision": precision,
        "tol": str(tol) if tol is not None else f"1e-{max(precision, 40) - 10}",
        "domain": model.domain.to_json(),
        "timings": None,
    }
    rk = rank_M(model, n_samples, precision=precision, seed=f"{seed}/rank", tol=tol)
    rep["rank"] = rk.to_json()
    incomplete = rk.incomplete
    rep["criterion"] = None
    rep["quadratic"] = None
    rep["killing_vector"] = None
    if rk.value is not None and rk.value <= 1:
        kr = killing_residual(model.H, model.momentum("py"), model.domain, n_samples, precision=precision,
                              seed=f"{seed}/py", tol=tol)
        rep["killing_vector"] = {"candidate": "py", **kr.to_json()}
        rep["conclusion"] = CONCLUSION_RANK1
        py_ok = kr.status == ZERO
        rep["summary"] = ("rank <= 1: p_y is a Killing vector; a cubic integral is reducible by one degree"
                          if py_ok else "rank <= 1: an additional Killing vector exists (not p_y in this chart)")
        if rk.flat_flag:
            rep["summary"] += "; dV^tt vanishes (flat/degenerate potential)"
        incomplete |= kr.status == INCONCLUSIVE
    elif rk.value == 2:
        crit, cv, ans = necessary_criterion(model, n_samples=n_samples, precision=precision, seed=f"{seed}/alpha",
                                            tol=tol)
        rep["criterion"] = {
            "expression_text": to_text(ans.field.to_expr(crit)),
            "verdict": cv.status,
            "witness": cv.witness.to_json() if cv.witness else None,
            "seed": cv.seed,
            "samples_used": cv.samples_used,
            "nu": ans.nu_verdict.to_json(),
            "pivots": [{"unknown": p.unknown, "row": p.row, "verdict": p.verdict.status,
                        "witness": p.verdict.witness.to_json() if p.verdict.witness else None}
                       for p in ans.solve.pivots + ans.alpha_solve.pivots],
        }
        incomplete |= cv.status == INCONCLUSIVE
        if cv.is_nonzero:
            rep["conclusion"] = CONCLUSION_NO_CUBIC
            rep["summary"] = "criterion non-zero: alpha = 0, no nontrivial odd cubic integral"
        elif cv.is_zero:
            rep["conclusion"] = CONCLUSION_DEGENERATE
            rep["summary"] = "criterion vanishes: degenerate (flat-branch candidate)"
            if flatness and model.metric4d is not None:
                from .curvature import curvature
                cr = curvature(model.field, model.metric4d, "Riemann", model.domain, max(30, n_samples // 4),
                               precision=precision, seed=f"{seed}/riemann")
                rep["flatness"] = {"riemann_all_zero": cr.all_zero,
                                   "nonzero_components": [list(k) for k in cr.nonzero_components]}
                if cr.all_zero:
                    rep["summary"] += "; flatness confirmed => reducible"
        else:
            rep["conclusion"] = "incomplete"
            rep["summary"] = "criterion inconclusive"
        if quadratic and _is_zv(model) and model.info.get("convention") == Convention.INVERSE_METRIC.value:
            delta = _delta_value(model.info["delta"])
            if delta.is_Number and delta != 1:
                fam = zv_quadratic_family(delta, n_samples=max(30, n_samples // 2), precision=precision,
                                          seed=f"{seed}/quadratic")
                rep["quadratic"] = fam.to_json()
                reducible = bool(fam.succeeded) and all(fam.membership[c]["residual"] == ZERO
                                                        for c in fam.succeeded)
                rep["quadratic"]["reducible"] = reducible
                if cv.is_nonzero and reducible:
                    rep["totally_reducible"] = True
                    rep["summary"] = ("no nontrivial odd cubic; quadratic family reducible => totally reducible")
            elif delta == 1:
                kr = killing_residual(model.H, carter_candidate(model), model.domain, max(30, n_samples // 2),
                                      precision=precision, seed=f"{seed}/carter")
                rep["quadratic"] = {"schwarzschild_extra_integral": "(1-y^2) py^2 + pphi^2/(1-y^2)",
                                    "verdict": kr.status,
                                    "note": "delta = 1: family formulas assume delta != 1"}
    else:
        rep["conclusion"] = "incomplete"
        rep["summary"] = "rank could not be decided"
        incomplete = True
    rep["incomplete"] = bool(incomplete)
    return rep


__all__ = [
    "GradientMatrix", "gradient_matrix", "RankVerdict", "rank_M", "nabla_perp", "OddCubicAnsatz",
    "solve_odd_bottom_block", "middle_block_equations", "solve_cubic_leading", "necessary_criterion",
    "KillingResidual", "killing_residual", "quadratic_equations", "quadratic_verdicts", "carter_candidate",
    "QuadraticFamily", "zv_family_exprs", "zv_quadratic_family", "reducibility_report", "RankTooLow",
    "EQUATION_ORDER", "UNKNOWN_ORDER",
]
