"""Randomized zero testing (Schwartz-Zippel style) with reproducible witnesses."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import mpmath
import sympy

from .evaluate import DomainError, evaluate_with_scale
from .field import FracElement, RationalField

ZERO = "Zero"
NONZERO = "NonZero"
INCONCLUSIVE = "Inconclusive"

_GRID = 2 ** 24


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, sympy.Rational):
        return Fraction(int(v.p), int(v.q))
    return Fraction(str(v)) if isinstance(v, (str, float)) else Fraction(v)


@dataclass(frozen=True)
class Domain:
    """Open sampling intervals per symbol name, with optional excluded windows.

    Names without an interval fall back to ``defaults`` keyed by symbol kind
    and then to ``fallback``.
    """

    intervals: Mapping[str, tuple[Fraction, Fraction]] = field(default_factory=dict)
    exclusions: Mapping[str, tuple[tuple[Fraction, Fraction], ...]] = field(default_factory=dict)
    fallback: tuple[Fraction, Fraction] = (Fraction(1, 5), Fraction(2))

    def __post_init__(self):
        iv = {k: (_frac(a), _frac(b)) for k, (a, b) in self.intervals.items()}
        for k, (a, b) in iv.items():
            if not a < b:
                raise ValueError(f"empty sampling interval for {k}: ({a}, {b})")
        object.__setattr__(self, "intervals", iv)
        ex = {k: tuple((_frac(a), _frac(b)) for a, b in v) for k, v in self.exclusions.items()}
        object.__setattr__(self, "exclusions", ex)
        object.__setattr__(self, "fallback", (_frac(self.fallback[0]), _frac(self.fallback[1])))

    def interval(self, name: str) -> tuple[Fraction, Fraction]:
        return self.intervals.get(name, self.fallback)

    def with_intervals(self, **intervals) -> "Domain":
        iv = dict(self.intervals)
        iv.update({k: (_frac(a), _frac(b)) for k, (a, b) in intervals.items()})
        return Domain(iv, self.exclusions, self.fallback)

    def excluding(self, name: str, lo, hi) -> "Domain":
        ex = {k: tuple(v) for k, v in self.exclusions.items()}
        ex[name] = ex.get(name, ()) + ((_frac(lo), _frac(hi)),)
        return Domain(self.intervals, ex, self.fallback)

    def merged(self, other: "Domain") -> "Domain":
        iv = dict(self.intervals)
        iv.update(other.intervals)
        ex = dict(self.exclusions)
        ex.update(other.exclusions)
        return Domain(iv, ex, self.fallback)

    def sample(self, names: Iterable[str], rng: random.Random) -> dict[str, Fraction]:
        point = {}
        for n in sorted(names):
            lo, hi = self.interval(n)
            for _ in range(100):
                v = lo + (hi - lo) * Fraction(rng.randrange(1, _GRID), _GRID)
                if not any(a <= v <= b for a, b in self.exclusions.get(n, ())):
                    break
            else:
                raise ValueError(f"exclusions cover the sampling interval of {n}")
            point[n] = v
        return point

    def to_json(self) -> dict:
        return {k: [str(a), str(b)] for k, (a, b) in sorted(self.intervals.items())}


ZV_DOMAIN = Domain({
    "x": (Fraction(21, 20), Fraction(10)),
    "y": (Fraction(-19, 20), Fraction(19, 20)),
    "delta": (Fraction(1, 10), Fraction(4)),
})


@dataclass(frozen=True)
class Witness:
    assignment: Mapping[str, str]
    value: str
    scale: str
    threshold: str

    def to_json(self) -> dict:
        return {"assignment": dict(sorted(self.assignment.items())), "value": self.value,
                "scale": self.scale, "threshold": self.threshold}


@dataclass(frozen=True)
class ZeroVerdict:
    status: str
    witness: Witness | None
    samples_used: int
    seed: object
    draws: int = 0
    domain_errors: int = 0
    exact_samples: int = 0
    precision: int = 40
    tol: str = ""

    @property
    def is_zero(self) -> bool:
        return self.status == ZERO

    @property
    def is_nonzero(self) -> bool:
        return self.status == NONZERO

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "witness": self.witness.to_json() if self.witness else None,
            "samples_used": self.samples_used,
            "draws": self.draws,
            "domain_errors": self.domain_errors,
            "exact_samples": self.exact_samples,
            "seed": self.seed,
            "precision": self.precision,
            "tol": self.tol,
        }


def _fmt(v, digits: int = 25) -> str:
    if isinstance(v, Fraction):
        if v.denominator == 1 or len(str(v)) < 60:
            return str(v)
        v = mpmath.mpf(v.numerator) / v.denominator
    return mpmath.nstr(v, digits)


def make_evaluator(e, field: RationalField | None = None):
    """Return ``(names_to_sample, fn(point, precision) -> (value, scale, exact))``."""
    if isinstance(e, FracElement):
        if field is None:
            raise ValueError("a RationalField is required to evaluate field elements")
        return field.base_names(e), lambda p, prec: field.evaluate(e, p, prec)
    if callable(e) and not isinstance(e, sympy.Basic):
        names = getattr(e, "needs", None)
        if names is None:
            raise ValueError("callable evaluators must carry a 'needs' attribute")
        return sorted(names), e
    e = sympy.sympify(e)
    names = sorted(s.name for s in e.free_symbols)
    return names, lambda p, prec: evaluate_with_scale(e, p, prec)


def equivalent_zero(
    e,
    domain: Domain,
    n_samples: int = 200,
    tol=None,
    *,
    precision: int = 40,
    seed=0,
    field: RationalField | None = None,
    max_draw_factor: int = 10,
) -> ZeroVerdict:
    """Decide whether ``e`` vanishes identically on ``domain`` by random sampling.

    Each draw ``i`` uses its own generator seeded by ``f"{seed}/{i}"`` so the
    verdict is independent of scheduling.  A draw is a success when the
    evaluated magnitude is at most ``tol * scale`` where ``scale`` is the
    largest intermediate magnitude.  The first failing draw yields NonZero
    with its witness.  Domain errors are re-drawn up to ``max_draw_factor *
    n_samples`` draws; if more than 90% of draws fail, or fewer than
    ``n_samples`` succeed, the verdict is Inconclusive.
    """
    if n_samples < 30:
        raise ValueError("n_samples must be at least 30")
    precision = max(int(precision), 40)
    tol = Fraction(1, 10 ** (precision - 10)) if tol is None else _frac(tol)
    names, fn = make_evaluator(e, field)
    successes = draws = errors = exact_count = 0
    max_draws = max_draw_factor * n_samples
    while successes < n_samples and draws < max_draws:
        rng = random.Random(f"{seed}/{draws}")
        draws += 1
        point = domain.sample(names, rng)
        try:
            value, scale, exact = fn(point, precision)
        except (DomainError, ZeroDivisionError):
            errors += 1
            if draws >= 10 and errors > 0.9 * draws:
                break
            continue
        with mpmath.workdps(precision + 5):
            if exact:
                threshold = Fraction(scale) * tol
                small = value == 0 or abs(value) <= threshold
            else:
                threshold = mpmath.mpf(scale) * (mpmath.mpf(tol.numerator) / tol.denominator)
                small = abs(value) <= threshold
            if not small:
                w = Witness({k: str(v) for k, v in point.items()}, _fmt(value), _fmt(scale), _fmt(threshold))
                return ZeroVerdict(NONZERO, w, successes + 1, seed, draws, errors, exact_count + int(exact),
                                   precision, str(tol))
        successes += 1
        exact_count += int(exact)
    status = ZERO if successes >= n_samples else INCONCLUSIVE
    return ZeroVerdict(status, None, successes, seed, draws, errors, exact_count, precision, str(tol))


def nonzero_everywhere_sampled(e, domain: Domain, n_samples: int = 30, *, precision: int = 40, seed=0,
                               field: RationalField | None = None) -> tuple[bool, int]:
    """True when every sampled value of ``e`` is clearly non-zero (used for pivots and guards)."""
    names, fn = make_evaluator(e, field)
    hits = 0
    for i in range(n_samples):
        point = domain.sample(names, random.Random(f"{seed}/nz/{i}"))
        try:
            v, s, _ = fn(point, max(precision, 40))
        except (DomainError, ZeroDivisionError):
            continue
        if v == 0 or abs(v) <= s * mpmath.mpf(10) ** (-(precision - 10)):
            return False, hits
        hits += 1
    return hits > 0, hits


__all__ = ["Domain", "ZV_DOMAIN", "Witness", "ZeroVerdict", "equivalent_zero", "make_evaluator",
           "nonzero_everywhere_sampled", "ZERO", "NONZERO", "INCONCLUSIVE"]
