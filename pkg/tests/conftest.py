"""Shared generators for randomized checks."""

import random
from fractions import Fraction

import sympy

from weylkt.expr import ZERO, Domain, closure, equivalent_zero
from weylkt.expr.zero import INCONCLUSIVE, NONZERO
from weylkt.momenta import MomentaPoly

X, Y = sympy.symbols("x y")
POISSON_DOMAIN = Domain({"x": (Fraction(1, 2), Fraction(4)), "y": (Fraction(1, 2), Fraction(2))})


def poisson_field():
    """Coordinates x, y plus two transcendental atoms, so brackets go through derivative rules."""
    F, atoms = closure([sympy.log(X), sympy.sqrt(X + Y)], [("x", "coordinate"), ("y", "coordinate")])
    return F, atoms


def random_coefficient(F, atoms, rng: random.Random):
    x, y = F["x"], F["y"]
    pool = [x, y, *atoms]
    c = F.const(Fraction(rng.randint(-5, 5), rng.randint(1, 4)))
    for _ in range(rng.randint(1, 3)):
        c += F.const(rng.randint(-3, 3)) * rng.choice(pool) * rng.choice(pool)
    if rng.random() < 0.3:
        c = c / (x + 2 * y + rng.randint(1, 3))
    return c


def random_momenta(F, atoms, rng: random.Random, max_degree: int = 3, n_terms: int = 4) -> MomentaPoly:
    terms = {}
    for _ in range(n_terms):
        deg = rng.randint(0, max_degree)
        m = [0, 0, 0, 0]
        for _ in range(deg):
            m[rng.randrange(4)] += 1
        terms[tuple(m)] = random_coefficient(F, atoms, rng)
    return MomentaPoly(F, terms)


def poly_verdict(P: MomentaPoly, domain: Domain = POISSON_DOMAIN, n_samples: int = 30, seed=0) -> str:
    """Zero oracle over every coefficient (exact field cancellation counts as Zero)."""
    statuses = [equivalent_zero(c, domain, n_samples, field=P.field, seed=f"{seed}/{m}").status
                for m, c in P.terms.items()]
    if NONZERO in statuses:
        return NONZERO
    if INCONCLUSIVE in statuses:
        return INCONCLUSIVE
    return ZERO


# -- acceptance ledger ------------------------------------------------------------------------

ACCEPTANCE: dict = {}


def record(n: int, ok: bool, title: str, detail: str = "") -> None:
    """One line per acceptance criterion, printed in the terminal summary."""
    ACCEPTANCE[n] = (ok, title, detail)
    print(_line(n))


def _line(n: int) -> str:
    ok, title, detail = ACCEPTANCE[n]
    return f"ACCEPTANCE {n:2d} {'PASS' if ok else 'FAIL'}: {title}" + (f" [{detail}]" if detail else "")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(_line(n))
    passed = sum(ok for ok, _, _ in ACCEPTANCE.values())
    terminalreporter.write_line(f"{passed}/{len(ACCEPTANCE)} acceptance criteria pass")
