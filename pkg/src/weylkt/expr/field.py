"""Rational-function fields with derivative rules.

Every heavy computation in the package happens in a field of rational
functions over QQ whose generators are coordinates, parameters, jet variables
and auxiliary quantities (``e^{2U}``, roots, logarithms ...).  Arithmetic and
cancellation are delegated to ``sympy.polys.fields``; this module adds

* a chain-rule derivative ``d(f, "x")`` driven by per-generator rules,
* numeric evaluation with an exact rational path and an mpmath path that also
  reports the largest term magnitude (the scale for relative zero tests),
* :func:`closure`, which turns sympy expressions containing ``ln``, ``exp`` and
  non-integer powers into field elements over fresh auxiliary generators.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import mpmath
import sympy
from sympy import QQ
from sympy.polys.fields import FracElement, FracField

from .core import (
    AUXILIARY,
    COORDINATE,
    JET,
    PARAMETER,
    AuxSymbol,
    JetSymbol,
    MissingDerivativeRule,
    normalize,
)
from .evaluate import DomainError, evaluate_with_scale

_SYMBOL_CLASS = {COORDINATE: sympy.Symbol, PARAMETER: sympy.Symbol, JET: JetSymbol, AUXILIARY: AuxSymbol}

Rule = "FracElement | Callable[[RationalField], FracElement]"
Definition = "sympy.Expr | Callable[[Mapping[str, object], int], object]"


@dataclass(frozen=True)
class GeneratorSpec:
    name: str
    kind: str


class RationalField:
    """A field QQ(g_1, ..., g_n) plus derivative rules and numeric definitions.

    ``rules[name][coord]`` is the partial derivative of generator ``name`` with
    respect to coordinate ``coord``; it may be a field element or a callable
    receiving this field (so rules can refer to elements built later).
    ``definitions[name]`` gives the numeric value of an auxiliary generator,
    either as a sympy expression in sampled symbols or as a callable
    ``(values, precision) -> number``.  Generators without a definition are
    sampled directly by the zero oracle.
    """

    def __init__(
        self,
        specs: Sequence[tuple[str, str]],
        rules: Mapping[str, Mapping[str, object]] | None = None,
        definitions: Mapping[str, object] | None = None,
        coordinates: Sequence[str] = ("x", "y"),
        atoms: Mapping[sympy.Expr, str] | None = None,
    ):
        names = [n for n, _ in specs]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate generator names in {names}")
        self.specs = tuple(GeneratorSpec(n, k) for n, k in specs)
        self.kinds = {s.name: s.kind for s in self.specs}
        self.symbols = tuple(_SYMBOL_CLASS[s.kind](s.name) for s in self.specs)
        self.K: FracField = FracField(self.symbols, QQ)
        self.gens = dict(zip(names, self.K.gens))
        self._index = {n: i for i, n in enumerate(names)}
        self.coordinates = tuple(c for c in coordinates if c in self.gens)
        self.rules = {k: dict(v) for k, v in (rules or {}).items()}
        self.definitions = dict(definitions or {})
        self.atoms = dict(atoms or {})
        self._rule_cache: dict = {}

    # -- construction ------------------------------------------------------
    def __getitem__(self, name: str) -> FracElement:
        return self.gens[name]

    def __contains__(self, name: str) -> bool:
        return name in self.gens

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.specs)

    def zero(self) -> FracElement:
        return self.K.zero

    def one(self) -> FracElement:
        return self.K.one

    def const(self, q) -> FracElement:
        q = Fraction(q) if not isinstance(q, sympy.Rational) else Fraction(int(q.p), int(q.q))
        return self.K(QQ(q.numerator, q.denominator))

    def extend(
        self,
        specs: Sequence[tuple[str, str]] = (),
        rules: Mapping[str, Mapping[str, object]] | None = None,
        definitions: Mapping[str, object] | None = None,
        atoms: Mapping[sympy.Expr, str] | None = None,
    ) -> "RationalField":
        """New field with extra generators; existing rules are kept unless overridden."""
        new_rules = {k: dict(v) for k, v in self.rules.items()}
        for k, v in (rules or {}).items():
            new_rules.setdefault(k, {}).update(v)
        defs = dict(self.definitions)
        defs.update(definitions or {})
        at = dict(self.atoms)
        at.update(atoms or {})
        return RationalField(
            [(s.name, s.kind) for s in self.specs] + list(specs),
            new_rules,
            defs,
            self.coordinates or ("x", "y"),
            at,
        )

    def with_rules(self, rules: Mapping[str, Mapping[str, object]]) -> "RationalField":
        """Same generators, rules overridden for the given names."""
        return self.extend((), rules)

    def convert(self, f) -> FracElement:
        """Bring an element of another field (sharing generator names) into this one."""
        if isinstance(f, FracElement):
            if f.field is self.K:
                return f
            return self.from_expr(f.as_expr())
        if isinstance(f, (int, Fraction)) or isinstance(f, sympy.Rational):
            return self.const(f)
        return self.from_expr(f)

    def from_expr(self, e) -> FracElement:
        """Field element for a sympy expression rational in this field's symbols.

        Registered atoms (transcendental subterms) are replaced by their generators.
        """
        e = sympy.sympify(e)
        if self.atoms:
            e = _replace_atoms(e, self)
        by_name = {s.name: s for s in self.symbols}
        e = e.xreplace({s: by_name[s.name] for s in e.free_symbols if s.name in by_name and s is not by_name[s.name]})
        extra = [s.name for s in e.free_symbols if s.name not in by_name]
        if extra:
            raise ValueError(f"symbols {sorted(extra)} are not generators of this field")
        try:
            return self.K.from_expr(e)
        except (ValueError, sympy.polys.polyerrors.CoercionFailed) as exc:
            raise ValueError(f"expression is not rational over this field: {e}") from exc

    def to_expr(self, f: FracElement, definitions: bool = False) -> sympy.Expr:
        """sympy form; with ``definitions`` auxiliary generators are expanded."""
        e = f.as_expr()
        if definitions:
            e = self.expand_definitions(e)
        return e

    def expand_definitions(self, e: sympy.Expr) -> sympy.Expr:
        for _ in range(len(self.specs) + 1):
            rep = {}
            for s in e.free_symbols:
                d = self.definitions.get(s.name)
                if isinstance(d, sympy.Expr):
                    rep[s] = d
                elif d is not None:
                    raise ValueError(f"generator {s.name} has only a numeric definition")
            if not rep:
                return e
            e = e.xreplace(rep)
        return e

    # -- structure ---------------------------------------------------------
    def depends_on(self, f: FracElement, name: str) -> bool:
        i = self._index[name]
        return f.numer.degree(i) > 0 or f.denom.degree(i) > 0

    def generators_of(self, f: FracElement) -> list[str]:
        return [n for n in self.names if self.depends_on(f, n)]

    def degree(self, f: FracElement, name: str) -> tuple[int, int]:
        i = self._index[name]
        return max(f.numer.degree(i), 0), max(f.denom.degree(i), 0)

    def is_free_of(self, f: FracElement, names: Iterable[str]) -> bool:
        return not any(self.depends_on(f, n) for n in names)

    # -- calculus ----------------------------------------------------------
    def rule(self, name: str, var: str) -> FracElement | None:
        table = self.rules.get(name)
        if table is None or var not in table:
            return None
        r = table[var]
        if callable(r) and not isinstance(r, FracElement):
            key = (name, var)
            if key not in self._rule_cache:
                self._rule_cache[key] = self.convert(r(self))
            return self._rule_cache[key]
        return self.convert(r)

    def partial(self, f: FracElement, name: str) -> FracElement:
        """Plain partial derivative treating all other generators as constants."""
        return f.diff(self.gens[name])

    def d(self, f: FracElement, var: str) -> FracElement:
        """Total derivative by a coordinate, chain rule through generator rules."""
        if var not in self.gens:
            raise KeyError(f"unknown coordinate {var}")
        out = f.diff(self.gens[var])
        for n in self.names:
            if n == var or not self.depends_on(f, n):
                continue
            r = self.rule(n, var)
            if r is None:
                if self.kinds[n] in (JET, AUXILIARY):
                    raise MissingDerivativeRule(sympy.Symbol(n), var)
                continue
            out += f.diff(self.gens[n]) * r
        return out

    # -- substitution ------------------------------------------------------
    def substitute(self, f: FracElement, name: str, value: FracElement) -> FracElement:
        """Replace generator ``name`` by the field element ``value``."""
        return _subs_frac(self, f, name, value)

    def solve_affine(self, eq: FracElement, name: str) -> tuple[FracElement, FracElement]:
        """Solve ``eq = 0`` for a generator it contains affinely in its numerator.

        Returns ``(solution, pivot)`` where pivot is the coefficient of the generator.
        """
        i = self._index[name]
        n = eq.numer
        if n.degree(i) != 1:
            raise ValueError(f"equation is not affine in {name} (degree {n.degree(i)})")
        g = self.gens[name]
        c1 = self.K(n.diff(g.numer))
        c0 = self.K(n) - c1 * g
        if self.depends_on(c1, name) or self.depends_on(c0, name):
            raise ValueError(f"equation is not affine in {name}")
        return -c0 / c1, c1

    # -- numerics ----------------------------------------------------------
    def base_names(self, f: FracElement) -> list[str]:
        """Names that must be sampled to evaluate ``f`` (definitions followed)."""
        out: set[str] = set()
        stack = self.generators_of(f)
        seen = set()
        while stack:
            n = stack.pop()
            if n in seen:
                continue
            seen.add(n)
            d = self.definitions.get(n)
            if d is None:
                out.add(n)
            elif isinstance(d, sympy.Expr):
                for s in d.free_symbols:
                    if s.name in self.gens and s.name != n:
                        stack.append(s.name)
                    elif s.name not in self.gens:
                        out.add(s.name)
            else:
                needs = getattr(d, "needs", ())
                for s in needs:
                    if s in self.gens:
                        stack.append(s)
                    else:
                        out.add(s)
        return sorted(out)

    def generator_values(self, names: Iterable[str], point: Mapping[str, object], precision: int, exact: bool):
        """Values of the requested generators under ``point``; may raise NotExactValue."""
        vals: dict[str, object] = {}
        assignment = {k: v for k, v in point.items()}

        def value(n):
            if n in vals:
                return vals[n]
            if n in assignment and n not in self.definitions:
                v = assignment[n]
                vals[n] = _coerce(v, exact)
                return vals[n]
            d = self.definitions.get(n)
            if d is None:
                raise KeyError(f"no value for generator {n}")
            if isinstance(d, sympy.Expr):
                sub = {}
                for s in d.free_symbols:
                    sub[s.name] = value(s.name) if s.name in self.gens else _coerce(assignment[s.name], exact)
                v, _, ex = evaluate_with_scale(d, sub, precision, exact=True if exact else False)
            else:
                if exact:
                    raise _NotExactValue
                sub = dict(assignment)
                for s in getattr(d, "needs", ()):
                    if s in self.gens:
                        sub[s] = value(s)
                with mpmath.workdps(precision + 5):
                    v = d(sub, precision)
            vals[n] = v
            return v

        try:
            return {n: value(n) for n in names}
        except _NotExactValue:
            raise
        except Exception as exc:
            from .evaluate import NotExact

            if isinstance(exc, NotExact):
                raise _NotExactValue from None
            raise

    def evaluate(self, f: FracElement, point: Mapping[str, object], precision: int = 40, exact: bool | None = None):
        """Return ``(value, scale, is_exact)``.

        ``scale`` is the largest numerator term magnitude divided by the
        magnitude of the denominator, i.e. the size of the terms that cancel.
        """
        names = self.generators_of(f)
        if exact is not False:
            try:
                vals = self.generator_values(names, point, precision, exact=True)
                return _eval_frac(self, f, vals, exact=True) + (True,)
            except _NotExactValue:
                if exact:
                    raise
        with mpmath.workdps(precision + 5):
            vals = self.generator_values(names, point, precision, exact=False)
            v, s = _eval_frac(self, f, vals, exact=False)
            return +v, +s, False

    def __repr__(self):
        return f"RationalField({', '.join(self.names)})"


class _NotExactValue(Exception):
    pass


def _coerce(v, exact: bool):
    if exact:
        if isinstance(v, Fraction):
            return v
        if isinstance(v, int):
            return Fraction(v)
        if isinstance(v, sympy.Rational):
            return Fraction(int(v.p), int(v.q))
        raise _NotExactValue
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    if isinstance(v, sympy.Rational):
        return mpmath.mpf(int(v.p)) / int(v.q)
    return mpmath.mpf(v)


def _eval_poly(F: RationalField, poly, vals_by_index, exact: bool):
    total = 0
    biggest = 0
    powcache: dict = {}
    for mon, c in poly.terms():
        if exact:
            t = Fraction(int(c.numerator), int(c.denominator))
        else:
            t = mpmath.mpf(int(c.numerator)) / int(c.denominator)
        for i, e in enumerate(mon):
            if e:
                key = (i, e)
                p = powcache.get(key)
                if p is None:
                    p = vals_by_index[i] ** e
                    powcache[key] = p
                t = t * p
        total = total + t
        a = abs(t)
        if a > biggest:
            biggest = a
    return total, biggest


def _eval_frac(F: RationalField, f: FracElement, vals: Mapping[str, object], exact: bool):
    zero = Fraction(0) if exact else mpmath.mpf(0)
    vi = [vals.get(n, zero) for n in F.names]
    num, big = _eval_poly(F, f.numer, vi, exact)
    den, _ = _eval_poly(F, f.denom, vi, exact)
    if den == 0:
        raise DomainError("denominator vanishes at sample point", None)
    return num / den, big / abs(den)


def _subs_frac(F: RationalField, f: FracElement, name: str, g: FracElement) -> FracElement:
    """Substitute a generator by a fraction via homogenisation of each polynomial."""
    i = F._index[name]
    R = F.K.ring
    gn, gd = g.numer, g.denom

    def sub_poly(P):
        coeffs: dict[int, object] = {}
        for mon, c in P.terms():
            k = mon[i]
            m2 = list(mon)
            m2[i] = 0
            coeffs[k] = coeffs.get(k, R.zero) + R({tuple(m2): c})
        if not coeffs:
            return F.K.zero
        n = max(coeffs)
        tot = R.zero
        for k, c in coeffs.items():
            tot += c * (gn ** k if k else R.one) * gd ** (n - k)
        return F.K(tot) / F.K(gd ** n)

    if not F.depends_on(f, name):
        return f
    return sub_poly(f.numer) / sub_poly(f.denom)


# -- closure of transcendental expressions -----------------------------------------


_ATOM_PREFIX = {"log": "L", "exp": "X", "pow": "R"}


def _canonical_atom(e: sympy.Expr):
    """Split ``e`` into (rational multiplier, atom expression) or None if rational."""
    if isinstance(e, sympy.Pow):
        b, p = normalize(e.base), normalize(e.exp)
        if p.is_Integer:
            return None
        if p.is_Rational:
            k = sympy.floor(p)
            r = p - k
            return b ** k, sympy.Pow(b, r, evaluate=False)
        c, rest = p.as_coeff_Mul()
        if c < 0:
            return sympy.Integer(1), sympy.Pow(b, -p, evaluate=False), True
        return sympy.Integer(1), sympy.Pow(b, p, evaluate=False)
    if isinstance(e, (sympy.log, sympy.exp)):
        return sympy.Integer(1), e.func(normalize(e.args[0]))
    return None


def _replace_atoms(e: sympy.Expr, F: RationalField) -> sympy.Expr:
    """Replace registered atoms inside ``e`` by generator symbols (bottom-up)."""
    by_name = {s.name: s for s in F.symbols}

    def walk(node):
        if node.is_Atom:
            return node
        args = [walk(a) for a in node.args]
        if isinstance(node, (sympy.Pow, sympy.log, sympy.exp)) and not (isinstance(node, sympy.Pow) and node.exp.is_Integer):
            split = _canonical_atom(node)
            if split is not None:
                key = split[1]
                name = F.atoms.get(key)
                if name is None:
                    raise ValueError(f"subexpression {node} is not a registered atom of this field")
                sym = by_name[name]
                inv = len(split) == 3
                return walk_rational(split[0]) * (1 / sym if inv else sym)
        return node.func(*args)

    def walk_rational(node):
        return walk(node) if not node.is_Atom else node

    return walk(e)


def closure(
    exprs: Sequence,
    specs: Sequence[tuple[str, str]],
    coordinates: Sequence[str] = ("x", "y"),
    rules: Mapping[str, Mapping[str, object]] | None = None,
    definitions: Mapping[str, object] | None = None,
) -> tuple[RationalField, list[FracElement]]:
    """Field closing ``exprs`` under differentiation, and the exprs as its elements.

    Every ``ln(f)``, ``exp(f)`` and non-integer power ``f^r`` (``r`` free of the
    coordinates) becomes an auxiliary generator whose derivative rule is
    rational in the generators: ``f'/f``, ``a f'`` and ``r a f'/f``.  Rational
    exponents are split as ``f^k * f^s`` with integer ``k`` and ``0 < s < 1``
    so that e.g. ``f^(1/2)`` and ``f^(-1/2)`` share one generator.
    """
    atoms: dict[sympy.Expr, str] = {}
    atom_info: list[tuple[str, sympy.Expr]] = []
    counters = {"L": 0, "X": 0, "R": 0}
    taken = {n for n, _ in specs}

    def register(node):
        if node.is_Atom:
            return
        for a in node.args:
            register(a)
        if isinstance(node, (sympy.Pow, sympy.log, sympy.exp)):
            split = _canonical_atom(node)
            if split is None:
                return
            key = split[1]
            for a in (key.args if not isinstance(key, sympy.Pow) else (key.base,)):
                register(a)
            if isinstance(key, sympy.Pow) and any(s.name in coordinates for s in key.exp.free_symbols):
                raise NotImplementedError(f"power with coordinate-dependent exponent: {node}")
            if key not in atoms:
                prefix = "L" if isinstance(key, sympy.log) else "X" if isinstance(key, sympy.exp) else "R"
                while True:
                    name = f"{prefix}{counters[prefix]}"
                    counters[prefix] += 1
                    if name not in taken:
                        break
                atoms[key] = name
                taken.add(name)
                atom_info.append((name, key))

    exprs = [normalize(sympy.sympify(e), expand=False) for e in exprs]
    for e in exprs:
        register(e)

    all_specs = list(specs) + [(n, AUXILIARY) for n, _ in atom_info]
    all_rules = {k: dict(v) for k, v in (rules or {}).items()}
    all_defs = dict(definitions or {})
    for name, key in atom_info:
        all_defs[name] = key
        all_rules[name] = {c: _atom_rule(name, key, c) for c in coordinates}
    F = RationalField(all_specs, all_rules, all_defs, coordinates, atoms)
    return F, [F.from_expr(e) for e in exprs]


def _atom_rule(name: str, key: sympy.Expr, coord: str):
    def rule(F: RationalField):
        a = F[name]
        if isinstance(key, sympy.log):
            inner = F.from_expr(key.args[0])
            return F.d(inner, coord) / inner
        if isinstance(key, sympy.exp):
            inner = F.from_expr(key.args[0])
            return a * F.d(inner, coord)
        base = F.from_expr(key.base)
        expo = F.from_expr(key.exp)
        return expo * a * F.d(base, coord) / base

    return rule


def numeric_definition(func: Callable[[Mapping[str, object], int], object], needs: Sequence[str]):
    """Tag a numeric definition with the names it reads from the sample point."""
    func.needs = tuple(needs)
    return func


__all__ = ["RationalField", "GeneratorSpec", "closure", "numeric_definition", "FracElement"]
