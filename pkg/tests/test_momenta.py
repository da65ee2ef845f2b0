import random

import pytest
import sympy

from conftest import poisson_field, poly_verdict, random_momenta
from weylkt.expr import ZERO
from weylkt.momenta import (
    MOMENTA, MomentaPoly, ansatz_monomials, build_integral_ansatz, parse_momenta, poisson, split_by_xy_degree,
)


@pytest.fixture(scope="module")
def field():
    return poisson_field()


def _sympy_bracket(P: MomentaPoly, Q: MomentaPoly) -> sympy.Expr:
    px, py, pphi, pt = sympy.symbols("px py pphi pt")

    def expr(R):
        return sum(R.field.to_expr(c, definitions=True) * px ** m[0] * py ** m[1] * pphi ** m[2] * pt ** m[3]
                   for m, c in R.terms.items())
    e1, e2 = expr(P), expr(Q)
    e1 = e1.xreplace({s: sympy.Symbol(s.name) for s in e1.free_symbols})
    e2 = e2.xreplace({s: sympy.Symbol(s.name) for s in e2.free_symbols})
    x, y = sympy.Symbol("x"), sympy.Symbol("y")
    return (sympy.diff(e1, x) * sympy.diff(e2, px) - sympy.diff(e1, px) * sympy.diff(e2, x)
            + sympy.diff(e1, y) * sympy.diff(e2, py) - sympy.diff(e1, py) * sympy.diff(e2, y))


def test_canonical_pairs(field):
    F, _ = field
    x = MomentaPoly.scalar(F, F["x"])
    px = MomentaPoly.momentum(F, "px")
    assert poisson(x, px) == MomentaPoly.scalar(F, 1)
    assert poisson(MomentaPoly.momentum(F, "pphi"), px).is_zero()


def test_bracket_matches_independent_sympy_route(field):
    F, atoms = field
    rng = random.Random(3)
    px, py, pphi, pt = sympy.symbols("px py pphi pt")
    for _ in range(5):
        P, Q = random_momenta(F, atoms, rng), random_momenta(F, atoms, rng)
        ours = _sympy_bracket(P, Q)
        br = poisson(P, Q)
        got = sum(F.to_expr(c, definitions=True) * px ** m[0] * py ** m[1] * pphi ** m[2] * pt ** m[3]
                  for m, c in br.terms.items())
        got = sympy.sympify(got)
        got = got.xreplace({s: sympy.Symbol(s.name) for s in got.free_symbols})
        pt_vals = {sympy.Symbol("x"): sympy.Rational(7, 5), sympy.Symbol("y"): sympy.Rational(3, 4),
                   px: 2, py: -1, pphi: sympy.Rational(1, 3), pt: 5}
        assert abs(sympy.N((got - ours).subs(pt_vals), 40)) < 1e-30


def test_antisymmetry_and_leibniz_small_sample(field):
    F, atoms = field
    rng = random.Random(11)
    for i in range(10):
        P, Q, R = (random_momenta(F, atoms, rng) for _ in range(3))
        assert poly_verdict(poisson(P, Q) + poisson(Q, P), seed=i) == ZERO
        assert poly_verdict(poisson(P, Q * R) - poisson(P, Q) * R - Q * poisson(P, R), seed=i) == ZERO


def test_jacobi_small_sample(field):
    F, atoms = field
    rng = random.Random(12)
    for i in range(5):
        P, Q, R = (random_momenta(F, atoms, rng) for _ in range(3))
        jac = poisson(P, poisson(Q, R)) + poisson(Q, poisson(R, P)) + poisson(R, poisson(P, Q))
        assert poly_verdict(jac, seed=i) == ZERO


def test_text_round_trip(field):
    F, atoms = field
    P = random_momenta(F, atoms, random.Random(5))
    assert parse_momenta(P.to_text(), F) == P


def test_degree_split_and_derivatives(field):
    F, _ = field
    P = MomentaPoly(F, {(2, 1, 0, 0): F["x"], (0, 0, 1, 2): F["y"], (1, 0, 0, 0): 1})
    parts = split_by_xy_degree(P)
    assert list(parts) == [3, 1, 0]
    assert P.d_momentum("px") == MomentaPoly(F, {(1, 1, 0, 0): 2 * F["x"], (0, 0, 0, 0): 1})
    assert P.degree() == 3


def test_ansatz_monomials_and_integral_ansatz(field):
    F, _ = field
    odd = ansatz_monomials(3, "odd")
    assert all((i % 2) == 1 for i, _, _ in odd)
    assert len(odd) == 4 + 2 * 3
    G, A = build_integral_ansatz(F)
    assert A.degree() == 3
    name = "a_3_3_0"
    assert G.d(G[name], "x") == G[name + "_x"]
    assert set(MOMENTA) == {"px", "py", "pphi", "pt"}
