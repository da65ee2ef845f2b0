"""Symbols, text I/O, differentiation and normalization of sympy expressions.

Expressions are plain :class:`sympy.Expr` trees.  Two Symbol subclasses mark
symbols that depend on the coordinates and therefore need a derivative rule
before they can be differentiated: :class:`JetSymbol` (derivatives of the
potential ``U``) and :class:`AuxSymbol` (``e^{2U}``, ``e^{2gamma}``, the
scaling function ``alpha`` ...).
"""

from __future__ import annotations

import re
from typing import Mapping

import sympy
from sympy.parsing.sympy_parser import (
    convert_xor,
    parse_expr,
    standard_transformations,
)
from sympy.printing.str import StrPrinter

Expr = sympy.Expr

COORDINATE = "coordinate"
PARAMETER = "parameter"
JET = "jet"
AUXILIARY = "auxiliary"


class JetSymbol(sympy.Symbol):
    """A derivative of the potential treated as an independent indeterminate."""


class AuxSymbol(sympy.Symbol):
    """An auxiliary dependent symbol whose partials come from a rule table."""


x, y = sympy.symbols("x y")
delta = sympy.Symbol("delta")


class MissingDerivativeRule(KeyError):
    def __init__(self, symbol, var):
        super().__init__(f"no derivative rule for dependent symbol {symbol} with respect to {var}")
        self.symbol = symbol
        self.var = var

    def __str__(self):
        return self.args[0]


def kind_of(s: sympy.Symbol) -> str:
    if isinstance(s, JetSymbol):
        return JET
    if isinstance(s, AuxSymbol):
        return AUXILIARY
    if s.name in ("x", "y"):
        return COORDINATE
    return PARAMETER


Rules = Mapping[sympy.Symbol, Mapping[sympy.Symbol, Expr]]


def differentiate(e, var: sympy.Symbol, rules: Rules | None = None) -> Expr:
    """Partial derivative of ``e`` by ``var`` with the chain rule through ``rules``.

    ``rules[s][var]`` is the declared partial of the dependent symbol ``s``.
    Jet and auxiliary symbols without a rule raise :class:`MissingDerivativeRule`.
    """
    e = sympy.sympify(e)
    rules = rules or {}
    out = sympy.diff(e, var)
    for s in sorted(e.free_symbols, key=lambda s: s.name):
        if s == var:
            continue
        table = rules.get(s)
        if table is not None and var in table:
            out += sympy.diff(e, s) * table[var]
        elif kind_of(s) in (JET, AUXILIARY):
            raise MissingDerivativeRule(s, var)
    return normalize(out)


def _is_transcendental(e) -> bool:
    if isinstance(e, sympy.Pow):
        return not e.exp.is_Integer
    return isinstance(e, sympy.Function)


def _skeleton(e, table: dict):
    """Replace maximal non-rational subtrees by dummies (args normalized first)."""
    if e.is_Atom:
        return e
    if _is_transcendental(e):
        if isinstance(e, sympy.Pow):
            key = sympy.Pow(normalize(e.base), normalize(e.exp))
        else:
            key = e.func(*[normalize(a) for a in e.args])
        if key.is_Atom or not _is_transcendental(key):
            return _skeleton(key, table) if not key.is_Atom else key
        if key not in table:
            table[key] = sympy.Dummy(f"t{len(table)}")
        return table[key]
    return e.func(*[_skeleton(a, table) for a in e.args])


def normalize(e, expand: bool = True) -> Expr:
    """Canonical form: constants folded, like terms collected, fractions cancelled.

    Non-rational subterms (``ln``, ``exp``, non-integer powers) are normalized
    recursively and then treated as opaque generators, so the result is the
    cancelled quotient of two expanded polynomials in symbols and such atoms.
    With ``expand=False`` only the atom arguments are canonicalized and the
    rational skeleton is left as built.  Idempotent in both modes.
    """
    e = sympy.sympify(e)
    if e.is_Atom:
        return e
    table: dict = {}
    skel = _skeleton(e, table)
    if expand:
        skel = sympy.cancel(skel)
        if skel.is_Add or skel.is_Mul:
            n, d = sympy.fraction(skel)
            skel = sympy.expand(n) / sympy.expand(d)
    back = {v: k for k, v in table.items()}
    return skel.xreplace(back) if back else skel


# -- text form -----------------------------------------------------------------

_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_FUNCS = {"ln": sympy.log, "log": sympy.log, "exp": sympy.exp, "sqrt": sympy.sqrt}


class _TextPrinter(StrPrinter):
    def _print_Pow(self, expr, rational=False):
        s = super()._print_Pow(expr, rational)
        return s.replace("**", "^")

    def _print_log(self, expr):
        return f"ln({self._print(expr.args[0])})"


def to_text(e) -> str:
    """Infix text with ``^``, ``ln``, ``exp``, ``sqrt`` and ``p/q`` rationals."""
    return _TextPrinter({"order": None}).doprint(sympy.sympify(e)).replace("**", "^")


def parse(text: str, symbols: Mapping[str, sympy.Symbol] | None = None) -> Expr:
    """Parse the text grammar back into an expression.

    Every identifier that is not ``ln``/``exp``/``sqrt`` becomes a Symbol (so
    names such as ``E``, ``Q`` or ``gamma`` are never sympy constants).
    ``symbols`` may supply pre-built symbols, e.g. :class:`JetSymbol` objects.
    """
    local = {}
    for name in _IDENT.findall(text):
        if name in _FUNCS:
            local[name] = _FUNCS[name]
        elif symbols and name in symbols:
            local[name] = symbols[name]
        else:
            local[name] = sympy.Symbol(name)
    transformations = standard_transformations + (convert_xor,)
    try:
        return parse_expr(text, local_dict=local, global_dict={"Integer": sympy.Integer,
                                                               "Rational": sympy.Rational,
                                                               "Float": sympy.Float,
                                                               "Symbol": sympy.Symbol},
                          transformations=transformations, evaluate=True)
    except (SyntaxError, TypeError) as exc:
        raise ValueError(f"cannot parse expression {text!r}: {exc}") from None


__all__ = [
    "Expr", "JetSymbol", "AuxSymbol", "MissingDerivativeRule", "kind_of",
    "differentiate", "normalize", "to_text", "parse", "x", "y", "delta",
]

# implicit multiplication is deliberately not enabled: "2x" is a syntax error.
