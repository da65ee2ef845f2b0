import dataclasses

import pytest
import sympy

from weylkt.analysis import (
    CONCLUSION_NO_CUBIC, CONCLUSION_RANK1, RankTooLow, carter_candidate, gradient_matrix, killing_residual,
    necessary_criterion, rank_M, reducibility_report, solve_odd_bottom_block, zv_quadratic_family,
)
from weylkt.expr import ZV_DOMAIN, equivalent_zero
from weylkt.models import weyl_from_U, zipoy_voorhees

x, y, d = sympy.symbols("x y delta")


def _expr(F, f):
    e = F.to_expr(f, definitions=True)
    return e.xreplace({s: sympy.Symbol(s.name) for s in e.free_symbols})


@pytest.fixture(scope="module")
def zv_symbolic():
    m = zipoy_voorhees("delta")
    crit, verdict, ans = necessary_criterion(m, n_samples=40)
    return m, crit, verdict, ans


def test_det_closed_form_symbolic_delta():
    m = zipoy_voorhees("delta")
    det = _expr(m.field, gradient_matrix(m).det)
    target = -4 * d * y / ((x ** 2 - 1) ** 2 * (y ** 2 - 1) ** 2)
    assert equivalent_zero(det - target, ZV_DOMAIN, 40).is_zero


def test_criterion_closed_form_symbolic_delta(zv_symbolic):
    m, crit, verdict, ans = zv_symbolic
    assert verdict.is_nonzero
    target = -2 * (-4 * d ** 2 * x + 3 * d * x ** 2 + 3 * d - 2 * x) / (3 * y * (x ** 2 - 1) ** 2)
    assert equivalent_zero(_expr(ans.field, crit) - target, ZV_DOMAIN, 40).is_zero


def test_alpha_system_is_consistent_and_alpha_free(zv_symbolic):
    m, crit, verdict, ans = zv_symbolic
    assert all(c == 0 for c in ans.consistency)
    for f in (ans.A, ans.B):
        assert ans.field.is_free_of(f, ("al", "al_x", "al_y"))
    assert all(s.is_zero for s in ans.scalar_relations)


@pytest.mark.parametrize("delta,target", [
    ("2", -4 * (x ** 2 - 3 * x + 1) / (y * (x ** 2 - 1) ** 2)),
    ("1/2", -1 / (y * (x + 1) ** 2)),
])
def test_criterion_numeric_delta(delta, target):
    m = zipoy_voorhees(delta)
    crit, verdict, ans = necessary_criterion(m, n_samples=40)
    assert verdict.is_nonzero and verdict.witness is not None
    assert equivalent_zero(_expr(ans.field, crit) - target, ZV_DOMAIN, 40).is_zero


def test_rank_invariant_under_constant_rescaling():
    m = zipoy_voorhees(2)
    scaled = dataclasses.replace(m, V_phiphi=m.V_phiphi * m.field.const(sympy.Rational(7, 3)))
    assert rank_M(m, 40).value == rank_M(scaled, 40).value == 2


def test_rank_one_models_and_bottom_block_guard():
    w = weyl_from_U("c*ln(x)", "-c^2*ln(x)")
    rk = rank_M(w, 40)
    assert rk.value == 1 and not rk.flat_flag
    with pytest.raises(RankTooLow):
        solve_odd_bottom_block(w, 40)
    z0 = rank_M(zipoy_voorhees(0), 40)
    assert z0.value == 1 and z0.flat_flag


def test_py_integral_only_for_y_independent_potential():
    w = weyl_from_U("c*ln(x)", "-c^2*ln(x)")
    assert killing_residual(w.H, w.momentum("py"), w.domain, 40).status == "Zero"
    z = zipoy_voorhees(2)
    res = killing_residual(z.H, z.momentum("py"), z.domain, 40)
    assert res.status == "NonZero" and res.witness is not None


def test_carter_integral_for_schwarzschild_only():
    z1 = zipoy_voorhees(1)
    assert killing_residual(z1.H, carter_candidate(z1), z1.domain, 40).status == "Zero"
    z2 = zipoy_voorhees(2)
    assert killing_residual(z2.H, carter_candidate(z2), z2.domain, 40).status == "NonZero"


def test_quadratic_family_delta2_convention():
    fam = zv_quadratic_family("2", n_samples=30)
    assert fam.succeeded == ["metric"]
    assert fam.membership["metric"]["residual"] == "Zero"
    assert fam.identity_verdict.is_zero and fam.a1_is_zero


def test_report_conclusions():
    rep = reducibility_report(zipoy_voorhees(2), 40, quadratic=False)
    assert rep["conclusion"] == CONCLUSION_NO_CUBIC
    assert rep["rank"]["value"] == 2
    rep1 = reducibility_report(weyl_from_U("c*ln(x)", "-c^2*ln(x)"), 40)
    assert rep1["conclusion"] == CONCLUSION_RANK1
    assert rep1["killing_vector"]["status"] == "Zero"
