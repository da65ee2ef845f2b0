"""Gauss-Jordan elimination over expression fields with zero-tested pivots."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import sympy

from .core import normalize, to_text
from .field import RationalField
from .zero import Domain, ZeroVerdict, equivalent_zero


class InconsistentSystem(ValueError):
    def __init__(self, residual, text: str):
        super().__init__(f"inconsistent linear system: residual {text} is not identically zero")
        self.residual = residual


class PivotInconclusive(RuntimeError):
    def __init__(self, unknown: str, verdict: ZeroVerdict):
        super().__init__(f"could not decide the pivot for {unknown}; increase the sample budget "
                         f"(used {verdict.samples_used} samples, {verdict.domain_errors} domain errors)")
        self.verdict = verdict


@dataclass(frozen=True)
class PivotRecord:
    unknown: str
    row: int
    pivot: object
    verdict: ZeroVerdict


@dataclass
class LinearSolution:
    solution: dict
    residuals: list
    pivots: list
    residual_rows: list


class _ExprOps:
    def __init__(self, unknowns):
        self.syms = {u: (u if isinstance(u, sympy.Symbol) else sympy.Symbol(str(u))) for u in unknowns}

    def name(self, u):
        return self.syms[u].name

    def coeff(self, eq, u):
        s = self.syms[u]
        c = normalize(sympy.diff(eq, s))
        if s in c.free_symbols:
            raise ValueError(f"relation is not affine in {s}: {eq}")
        return c

    def constant(self, eq, unknowns):
        return normalize(eq.xreplace({self.syms[u]: 0 for u in unknowns}))

    def simplify(self, e):
        return normalize(e)

    def is_structural_zero(self, e):
        return normalize(e) == 0

    def text(self, e):
        return to_text(e)

    def mentions(self, e, names):
        fs = {s.name for s in e.free_symbols}
        return any((n if isinstance(n, str) else n.name) in fs for n in names)


class _FieldOps:
    def __init__(self, field: RationalField, unknowns):
        self.F = field
        self.names = [u if isinstance(u, str) else str(u.as_expr()) for u in unknowns]
        self.map = dict(zip(unknowns, self.names))

    def name(self, u):
        return self.map[u]

    def coeff(self, eq, u):
        n = self.map[u]
        c = self.F.partial(eq, n)
        if self.F.depends_on(c, n):
            raise ValueError(f"relation is not affine in {n}")
        return c

    def constant(self, eq, unknowns):
        out = eq
        for u in unknowns:
            out = self.F.substitute(out, self.map[u], self.F.zero())
        return out

    def simplify(self, e):
        return e

    def is_structural_zero(self, e):
        return e == 0

    def text(self, e):
        return to_text(e.as_expr())

    def mentions(self, e, names):
        return any(self.F.depends_on(e, n) for n in names)


def solve_linear(
    equations: Sequence,
    unknowns: Sequence,
    domain: Domain,
    *,
    field: RationalField | None = None,
    n_samples: int = 30,
    precision: int = 40,
    seed=0,
    free: Sequence = (),
    check_residuals: bool = True,
) -> LinearSolution:
    """Solve relations ``eq = 0`` affine in ``unknowns`` by Gauss-Jordan elimination.

    Columns are processed in the order of ``unknowns``; for each, the first
    remaining row whose coefficient is not structurally zero and passes a
    NonZero test is the pivot row.  Rows left over after elimination are the
    residual relations (compatibility conditions).  A residual that contains
    neither unknowns nor any of the ``free`` symbols and is not identically
    zero raises :class:`InconsistentSystem` (unless ``check_residuals`` is off).

    ``equations`` are sympy expressions (unknowns are Symbols) or elements of
    ``field`` (unknowns are generator names).
    """
    ops = _FieldOps(field, unknowns) if field is not None else _ExprOps(unknowns)
    rows = []
    for eq in equations:
        eq = eq if field is not None else normalize(sympy.sympify(eq))
        coeffs = [ops.coeff(eq, u) for u in unknowns]
        const = ops.constant(eq, unknowns)
        rows.append((coeffs, const))
    pivots: list[PivotRecord] = []
    used: list[int] = []
    pivot_of: dict[int, int] = {}
    for j, u in enumerate(unknowns):
        chosen = None
        for i, (coeffs, _) in enumerate(rows):
            if i in used or ops.is_structural_zero(coeffs[j]):
                continue
            v = equivalent_zero(coeffs[j], domain, n_samples, precision=precision, seed=f"{seed}/pivot/{j}/{i}",
                                field=field)
            if v.status == "Inconclusive":
                raise PivotInconclusive(ops.name(u), v)
            if v.is_nonzero:
                chosen = i
                pivots.append(PivotRecord(ops.name(u), i, coeffs[j], v))
                break
        if chosen is None:
            continue
        used.append(chosen)
        pivot_of[j] = chosen
        pc, pk = rows[chosen]
        inv = 1 / pc[j]
        pc = [ops.simplify(c * inv) for c in pc]
        pk = ops.simplify(pk * inv)
        rows[chosen] = (pc, pk)
        for i, (coeffs, const) in enumerate(rows):
            if i == chosen or ops.is_structural_zero(coeffs[j]):
                continue
            f = coeffs[j]
            rows[i] = ([ops.simplify(c - f * p) for c, p in zip(coeffs, pc)], ops.simplify(const - f * pk))
    solution = {}
    for j, u in enumerate(unknowns):
        if j not in pivot_of:
            continue
        coeffs, const = rows[pivot_of[j]]
        expr = -const
        for k, v in enumerate(unknowns):
            if k != j and k not in pivot_of and not ops.is_structural_zero(coeffs[k]):
                sym = field[ops.name(v)] if field is not None else ops.syms[v]
                expr = expr - coeffs[k] * sym
        solution[u] = ops.simplify(expr)
    residuals = []
    residual_rows = []
    for i, (coeffs, const) in enumerate(rows):
        if i in used:
            continue
        expr = const
        for k, v in enumerate(unknowns):
            if not ops.is_structural_zero(coeffs[k]):
                sym = field[ops.name(v)] if field is not None else ops.syms[v]
                expr = expr + coeffs[k] * sym
        expr = ops.simplify(expr)
        residual_rows.append(i)
        residuals.append(expr)
        if (check_residuals and all(ops.is_structural_zero(c) for c in coeffs)
                and not ops.is_structural_zero(const) and not ops.mentions(const, free)):
            v = equivalent_zero(const, domain, max(n_samples, 30), precision=precision,
                                seed=f"{seed}/residual/{i}", field=field)
            if not v.is_zero:
                raise InconsistentSystem(const, ops.text(const))
    return LinearSolution(solution, residuals, pivots, residual_rows)


__all__ = ["solve_linear", "LinearSolution", "PivotRecord", "InconsistentSystem", "PivotInconclusive"]
