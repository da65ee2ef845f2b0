"""Numeric evaluation of sympy expression trees.

Two arithmetics are supported: exact :class:`fractions.Fraction` (used when
every leaf and every power is rational) and mpmath floats at a requested number
of significant digits.  Both track the largest intermediate magnitude, which
the zero oracle uses as the scale for relative tolerances.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

import mpmath
import sympy


class DomainError(ArithmeticError):
    """Raised when a subexpression leaves the real domain (or divides by zero)."""

    def __init__(self, message: str, subexpression=None):
        super().__init__(message)
        self.subexpression = subexpression


class NotExact(Exception):
    """Internal signal: the exact path cannot represent this value."""


def to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, sympy.Rational):
        return Fraction(int(v.p), int(v.q))
    if isinstance(v, str):
        return Fraction(v)
    if hasattr(v, "numerator") and hasattr(v, "denominator"):
        return Fraction(int(v.numerator), int(v.denominator))
    raise TypeError(f"not an exact rational: {v!r}")


def _exact_root(q: Fraction, n: int) -> Fraction | None:
    """The real n-th root of q when it is rational, else None."""
    if q < 0:
        if n % 2 == 0:
            return None
        r = _exact_root(-q, n)
        return -r if r is not None else None

    def iroot(k: int):
        r = sympy.integer_nthroot(k, n)
        return int(r[0]) if r[1] else None

    a, b = iroot(q.numerator), iroot(q.denominator)
    if a is None or b is None:
        return None
    return Fraction(a, b)


class _Walker:
    def __init__(self, assignment: Mapping, exact: bool):
        self.exact = exact
        self.max_mag = 0
        self.values = {}
        for k, v in assignment.items():
            name = k if isinstance(k, str) else k.name
            if exact:
                try:
                    self.values[name] = to_fraction(v)
                except TypeError:
                    raise NotExact from None
            else:
                self.values[name] = v if isinstance(v, mpmath.mpf) else _to_mpf(v)

    def note(self, v):
        a = abs(v)
        if a > self.max_mag:
            self.max_mag = a
        return v

    def walk(self, e):
        if e.is_Symbol:
            try:
                return self.note(self.values[e.name])
            except KeyError:
                raise KeyError(f"no value assigned to symbol {e.name}") from None
        if e.is_Rational:
            v = Fraction(int(e.p), int(e.q))
            return self.note(v if self.exact else mpmath.mpf(v.numerator) / v.denominator)
        if e.is_Number:
            if self.exact:
                raise NotExact
            return self.note(mpmath.mpf(str(e)) if e.is_Float else mpmath.mpf(sympy.N(e, mpmath.mp.dps + 5)))
        if e.is_NumberSymbol:  # E, pi, ...
            if self.exact:
                raise NotExact
            return self.note(mpmath.mpf(sympy.N(e, mpmath.mp.dps + 5)))
        if e.is_Add:
            total = 0
            for a in e.args:
                total = total + self.walk(a)
            return self.note(total)
        if e.is_Mul:
            total = 1
            for a in e.args:
                total = total * self.walk(a)
            return self.note(total)
        if e.is_Pow:
            return self.note(self.power(e))
        if isinstance(e, sympy.log):
            a = self.walk(e.args[0])
            if a <= 0:
                raise DomainError(f"ln of non-positive value in {e}", e)
            if self.exact:
                if a == 1:
                    return Fraction(0)
                raise NotExact
            return self.note(mpmath.log(a))
        if isinstance(e, sympy.exp):
            a = self.walk(e.args[0])
            if self.exact:
                if a == 0:
                    return Fraction(1)
                raise NotExact
            return self.note(mpmath.exp(a))
        if isinstance(e, sympy.Abs):
            return self.note(abs(self.walk(e.args[0])))
        raise TypeError(f"cannot evaluate node of type {type(e).__name__}: {e}")

    def power(self, e):
        base = self.walk(e.base)
        expo = self.walk(e.exp)
        if self.exact:
            if expo.denominator == 1:
                if base == 0 and expo < 0:
                    raise DomainError(f"division by zero in {e}", e)
                return base ** int(expo)
            if base < 0:
                raise DomainError(f"fractional power of negative base in {e}", e)
            r = _exact_root(base, expo.denominator)
            if r is None:
                raise NotExact
            if r == 0 and expo < 0:
                raise DomainError(f"division by zero in {e}", e)
            return r ** expo.numerator
        if _integer_valued(e.exp, expo):
            n = int(mpmath.nint(expo))
            if base == 0 and n < 0:
                raise DomainError(f"division by zero in {e}", e)
            return base ** n
        if base < 0:
            raise DomainError(f"fractional power of negative base in {e}", e)
        if base == 0:
            if expo > 0:
                return mpmath.mpf(0)
            raise DomainError(f"division by zero in {e}", e)
        return mpmath.power(base, expo)


def _integer_valued(node, value) -> bool:
    # a symbolic exponent such as delta may be assigned an integer
    if node.is_Integer:
        return True
    if node.is_Number:
        return False
    return value == mpmath.nint(value)


def _to_mpf(v):
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    if isinstance(v, sympy.Rational):
        return mpmath.mpf(int(v.p)) / int(v.q)
    if isinstance(v, str):
        return _to_mpf(Fraction(v))
    if hasattr(v, "numerator") and hasattr(v, "denominator") and not isinstance(v, float):
        return mpmath.mpf(int(v.numerator)) / int(v.denominator)
    return mpmath.mpf(v)


def evaluate_with_scale(e, assignment: Mapping, precision: int = 40, exact: bool | None = None):
    """Evaluate ``e`` and return ``(value, max_intermediate_magnitude, is_exact)``.

    With ``exact=None`` the exact path is tried first and the mpmath path is
    used as a fallback.  Values are Fractions on the exact path and ``mpf`` on
    the floating path.
    """
    if precision < 15:
        raise ValueError("precision must be at least 15 significant digits")
    e = sympy.sympify(e)
    if exact is not False:
        try:
            w = _Walker(assignment, exact=True)
            v = w.walk(e)
            return v, w.max_mag, True
        except NotExact:
            if exact:
                raise
        except ZeroDivisionError:
            raise DomainError(f"division by zero in {e}", e) from None
    with mpmath.workdps(precision + 5):
        w = _Walker(assignment, exact=False)
        try:
            v = w.walk(e)
        except ZeroDivisionError:
            raise DomainError(f"division by zero in {e}", e) from None
        return +v, w.max_mag, False


def evaluate(e, assignment: Mapping, precision: int = 40):
    """Value of ``e`` under ``assignment`` (Fraction when exact, else mpf)."""
    return evaluate_with_scale(e, assignment, precision)[0]
