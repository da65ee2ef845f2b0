"""Polynomials in the momenta (p_x, p_y, p_phi, p_t) with field coefficients."""

from __future__ import annotations

import re
from typing import Mapping

from .expr.core import AUXILIARY, parse, to_text
from .expr.field import FracElement, RationalField

MomExp = tuple[int, int, int, int]
MOMENTA = ("px", "py", "pphi", "pt")


def mom_key(m: MomExp):
    """Total degree first, then lexicographic (descending in p_x, p_y, ...)."""
    return (-sum(m), tuple(-e for e in m))


class MomentaPoly:
    """Immutable map from momentum exponents to coefficients in ``field``.

    Coefficients depend on x, y and parameters only; the coordinates phi and t
    are cyclic and never appear, so brackets differentiate only in x and y.
    """

    __slots__ = ("field", "terms")

    def __init__(self, field: RationalField, terms: Mapping[MomExp, object] | None = None):
        self.field = field
        clean = {}
        for m, c in (terms or {}).items():
            m = tuple(int(e) for e in m)
            if len(m) != 4 or min(m) < 0:
                raise ValueError(f"bad momentum exponent {m}")
            c = field.convert(c)
            if c != 0:
                clean[m] = clean.get(m, field.zero()) + c
                if clean[m] == 0:
                    del clean[m]
        self.terms = dict(sorted(clean.items(), key=lambda kv: mom_key(kv[0])))

    # -- constructors -----------------------------------------------------------
    @classmethod
    def momentum(cls, field: RationalField, which: str) -> "MomentaPoly":
        m = [0, 0, 0, 0]
        m[MOMENTA.index(which)] = 1
        return cls(field, {tuple(m): field.one()})

    @classmethod
    def scalar(cls, field: RationalField, c) -> "MomentaPoly":
        return cls(field, {(0, 0, 0, 0): c})

    # -- arithmetic -------------------------------------------------------------
    def _coerce(self, other) -> "MomentaPoly":
        if isinstance(other, MomentaPoly):
            if other.field is not self.field:
                return MomentaPoly(self.field, {m: self.field.convert(c) for m, c in other.terms.items()})
            return other
        return MomentaPoly.scalar(self.field, other)

    def __add__(self, other):
        other = self._coerce(other)
        t = dict(self.terms)
        for m, c in other.terms.items():
            t[m] = t.get(m, self.field.zero()) + c
        return MomentaPoly(self.field, t)

    __radd__ = __add__

    def __neg__(self):
        return MomentaPoly(self.field, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        t: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                t[m] = t.get(m, self.field.zero()) + c1 * c2
        return MomentaPoly(self.field, t)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, MomentaPoly):
            return NotImplemented
        return self.terms == self._coerce(other).terms

    def __hash__(self):
        return hash(tuple(self.terms))

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def coefficient(self, m: MomExp) -> FracElement:
        return self.terms.get(tuple(m), self.field.zero())

    def map_coefficients(self, fn) -> "MomentaPoly":
        return MomentaPoly(self.field, {m: fn(c) for m, c in self.terms.items()})

    # -- calculus ---------------------------------------------------------------
    def d_coord(self, var: str) -> "MomentaPoly":
        return MomentaPoly(self.field, {m: self.field.d(c, var) for m, c in self.terms.items()})

    def d_momentum(self, which: str) -> "MomentaPoly":
        k = MOMENTA.index(which)
        t = {}
        for m, c in self.terms.items():
            if m[k]:
                m2 = list(m)
                m2[k] -= 1
                t[tuple(m2)] = c * m[k]
        return MomentaPoly(self.field, t)

    # -- text -------------------------------------------------------------------
    def to_text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.terms.items():
            mono = " ".join(f"{n}^{e}" for n, e in zip(MOMENTA, m))
            parts.append(f"({to_text(c.as_expr())}) {mono}")
        return " + ".join(parts)

    def __repr__(self):
        return f"MomentaPoly({self.to_text()})"

    def split_by_xy_degree(self) -> dict[int, "MomentaPoly"]:
        return split_by_xy_degree(self)


def poisson(F: MomentaPoly, G: MomentaPoly) -> MomentaPoly:
    """Canonical bracket with ``{x, p_x} = +1``; phi and t are cyclic."""
    G = F._coerce(G)
    out = MomentaPoly(F.field)
    for q, p in (("x", "px"), ("y", "py")):
        # coefficients are only differentiated when paired with a non-zero momentum derivative
        Gp = G.d_momentum(p)
        if not Gp.is_zero():
            out = out + F.d_coord(q) * Gp
        Fp = F.d_momentum(p)
        if not Fp.is_zero():
            out = out - Fp * G.d_coord(q)
    return out


def split_by_xy_degree(P: MomentaPoly) -> dict[int, MomentaPoly]:
    parts: dict[int, dict] = {}
    for m, c in P.terms.items():
        parts.setdefault(m[0] + m[1], {})[m] = c
    return {d: MomentaPoly(P.field, t) for d, t in sorted(parts.items(), reverse=True)}


def coefficient(P: MomentaPoly, m: MomExp) -> FracElement:
    return P.coefficient(m)


def parse_momenta(text: str, field: RationalField) -> MomentaPoly:
    """Inverse of :meth:`MomentaPoly.to_text` (coefficients parsed in ``field``)."""
    text = text.strip()
    if text == "0":
        return MomentaPoly(field)
    terms: dict = {}
    for chunk in _split_top_level(text):
        chunk = chunk.strip()
        if not chunk.startswith("("):
            raise ValueError(f"malformed momenta term: {chunk!r}")
        depth = 0
        for i, ch in enumerate(chunk):
            depth += ch == "("
            depth -= ch == ")"
            if depth == 0:
                break
        coef_text, mono = chunk[1:i], chunk[i + 1:].strip()
        m = re.fullmatch(r"px\^(\d+)\s+py\^(\d+)\s+pphi\^(\d+)\s+pt\^(\d+)", mono)
        if not m:
            raise ValueError(f"malformed momentum monomial: {mono!r}")
        key = tuple(int(g) for g in m.groups())
        terms[key] = terms.get(key, field.zero()) + field.from_expr(parse(coef_text))
    return MomentaPoly(field, terms)


def _split_top_level(text: str) -> list[str]:
    out, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "+" and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return [s for s in out if s.strip()]


def ansatz_monomials(degree: int = 3, parity: str = "odd") -> list[tuple[int, int, int]]:
    """Index triples (i, j, k): p_x^j p_y^(i-j) p_phi^k p_t^(degree-i-k)."""
    if parity not in ("odd", "even", "all"):
        raise ValueError("parity must be 'odd', 'even' or 'all'")
    out = []
    for i in range(degree, -1, -1):
        if parity == "odd" and i % 2 == 0 or parity == "even" and i % 2 == 1:
            continue
        for j in range(i, -1, -1):
            for k in range(degree - i, -1, -1):
                out.append((i, j, k))
    return out


def build_integral_ansatz(field: RationalField, degree: int = 3, parity: str = "odd", prefix: str = "a"):
    """General momentum polynomial of the given degree and (p_x, p_y)-parity.

    Each coefficient ``a_i_j_k`` is a function of (x, y), represented by three
    generators: its value and its first partials (``a_i_j_k_x``, ``a_i_j_k_y``).
    Returns the extended field and the polynomial.
    """
    if degree != 3:
        raise NotImplementedError("only degree 3 ansatze are provided")
    idx = ansatz_monomials(degree, parity)
    specs, rules = [], {}
    for i, j, k in idx:
        n = f"{prefix}_{i}_{j}_{k}"
        specs += [(n, AUXILIARY), (n + "_x", AUXILIARY), (n + "_y", AUXILIARY)]
        rules[n] = {"x": (lambda F, n=n: F[n + "_x"]), "y": (lambda F, n=n: F[n + "_y"])}
    F = field.extend(specs, rules)
    terms = {(j, i - j, k, degree - i - k): F[f"{prefix}_{i}_{j}_{k}"] for i, j, k in idx}
    return F, MomentaPoly(F, terms)


__all__ = ["MomentaPoly", "MomExp", "MOMENTA", "poisson", "split_by_xy_degree", "coefficient",
           "parse_momenta", "build_integral_ansatz", "ansatz_monomials"]
