from fractions import Fraction

import pytest
import sympy

from weylkt.curvature import DegenerateMetric, curvature, expr_curvature
from weylkt.expr import ZV_DOMAIN, equivalent_zero
from weylkt.models import (
    Convention, ModelRejected, load_model_file, model_from_mapping, schwarzschild_in_zv_chart, weyl_from_U,
    zipoy_voorhees, zv_metric_exprs,
)


def test_zv1_is_schwarzschild():
    ex, sw = zv_metric_exprs(1), schwarzschild_in_zv_chart(1)
    for k in ("g_xx", "g_yy", "g_phiphi", "g_tt"):
        assert equivalent_zero(ex[k] - sw[k], ZV_DOMAIN, 30).is_zero, k


def test_zv_curvature_both_routes_delta_2():
    m = zipoy_voorhees(2)
    rep = curvature(m.field, m.metric4d, "Ricci", m.domain, 30)
    assert rep.all_zero
    ex = zv_metric_exprs(2)
    g = [[0] * 4 for _ in range(4)]
    for i, n in enumerate(["g_xx", "g_yy", "g_phiphi", "g_tt"]):
        g[i][i] = ex[n]
    for comp in expr_curvature(g, "Ricci").values():
        assert equivalent_zero(comp, m.domain, 30).is_zero


def test_zv_is_curved_but_zv0_flat():
    m = zipoy_voorhees(1)
    assert curvature(m.field, m.metric4d, "Riemann", m.domain, 30, stop_at_first_nonzero=True).nonzero_components
    m0 = zipoy_voorhees(0)
    assert curvature(m0.field, m0.metric4d, "Riemann", m0.domain, 30).all_zero


def test_perturbed_metric_is_not_vacuum():
    m = zipoy_voorhees(2)
    F = m.field
    g = [row[:] for row in m.metric4d]
    g[0][0] = g[0][0] * F["x"]
    assert not curvature(F, g, "Ricci", m.domain, 30).all_zero


def test_degenerate_metric_raises():
    m = zipoy_voorhees(2)
    g = [row[:] for row in m.metric4d]
    g[3][3] = m.field.zero()
    with pytest.raises(DegenerateMetric):
        curvature(m.field, g, "Ricci", m.domain, 30)


def test_hamiltonian_conventions_differ():
    inv = zipoy_voorhees(2)
    met = zipoy_voorhees(2, Convention.METRIC)
    lit = zipoy_voorhees(2, "omega_literal")
    F = inv.field
    ex = zv_metric_exprs(2)
    # H = g^{ij} p_i p_j in the default convention
    assert equivalent_zero(F.to_expr(inv.t_xx, definitions=True) * ex["g_xx"] - 1, ZV_DOMAIN, 30).is_zero
    assert equivalent_zero(met.field.to_expr(met.t_xx, definitions=True) - ex["g_xx"], ZV_DOMAIN, 30).is_zero
    assert lit.info["convention"] == "omega_literal"


def test_weyl_model_accepts_vacuum_and_rejects_non_solution():
    w = weyl_from_U("c*ln(x)", "-c^2*ln(x)")
    assert w.ernst_verdict.is_zero
    rep = curvature(w.field, w.metric4d, "Ricci", w.domain, 30)
    assert rep.all_zero
    with pytest.raises(ModelRejected) as err:
        weyl_from_U("x")
    assert err.value.verdict.witness is not None
    with pytest.raises(ModelRejected):
        weyl_from_U("c*ln(x)", "c^2*ln(x)")


def test_weyl_model_gamma_by_path_integral():
    w = weyl_from_U("c*ln(x)")
    rep = curvature(w.field, w.metric4d, "Ricci", w.domain, 30)
    assert rep.all_zero


def test_model_files(tmp_path):
    p = tmp_path / "m.toml"
    p.write_text('type = "zv"\ndelta = "3"\n[domain]\nx = [2, 5]\n')
    m = load_model_file(p)
    assert m.info["delta"] == "3" and m.domain.interval("x") == (Fraction(2), Fraction(5))
    with pytest.raises(ValueError):
        model_from_mapping({"type": "kerr"})
    with pytest.raises(ValueError):
        model_from_mapping({"type": "weyl"})


def test_symbolic_delta_model_has_parameter():
    m = zipoy_voorhees("delta")
    assert "delta" in m.field.names
    with pytest.raises(ValueError):
        zipoy_voorhees(-1)
    assert isinstance(m.H.field, type(m.field))
    assert sympy.Symbol("delta") in m.field.to_expr(m.V_tt, definitions=True).free_symbols
