import numpy as np
import pytest

from weylkt.analysis import carter_candidate
from weylkt.geodesic import (
    PRESETS, bracket_vs_drift, compile_flow, integrate, momentum_from_shell, time_reversal_error,
)
from weylkt.models import weyl_from_U, zipoy_voorhees


def _ic(name):
    pr = PRESETS[name]
    m = zipoy_voorhees(pr["delta"])
    px = momentum_from_shell(m, pr["x"], pr["y"], pr["py"], pr["pphi"], pr["pt"])
    return m, [pr["x"], pr["y"], px, pr["py"]], pr["pphi"], pr["pt"]


def test_initial_data_on_shell():
    m, ic, pphi, pt = _ic("zv2")
    flow = compile_flow(m, pphi, pt)
    assert flow.value("H", ic) == pytest.approx(-1.0, abs=1e-12)
    with pytest.raises(ValueError):
        momentum_from_shell(m, 6.0, 0.5, 0.0, 40.0, -0.95)


def test_bracket_matches_numerical_drift_rate():
    m, ic, pphi, pt = _ic("zv2")
    br = bracket_vs_drift(m, carter_candidate(m), ic, pphi, pt, 20)
    assert br.max_rel_error < 1e-6
    assert br.scale > 1e-3
    # for an integral the rate is zero on both routes
    hz = bracket_vs_drift(m, m.H, ic, pphi, pt, 20)
    assert hz.max_abs_error < 1e-9 and np.all(hz.bracket == 0)


def test_time_reversal():
    m, ic, pphi, pt = _ic("zv1")
    assert time_reversal_error(m, ic, pphi, pt, 50) < 1e-8


def test_cyclic_momenta_have_no_drift():
    m, ic, pphi, pt = _ic("zv2")
    tr = integrate(m, ic, pphi, pt, 20, candidates={"pphi": m.momentum("pphi"), "pt": m.momentum("pt")})
    assert tr.drifts["pphi"].max_drift == 0.0 and tr.drifts["pt"].max_drift == 0.0


def test_domain_exit_is_reported():
    m = zipoy_voorhees(2)
    px = momentum_from_shell(m, 3.0, 0.2, 0.0, 0.5, -0.9)
    tr = integrate(m, [3.0, 0.2, -px, 0.0], 0.5, -0.9, 200)
    assert tr.status == "domain-exit" and "x_lo" in tr.message


def test_csv_layout():
    m, ic, pphi, pt = _ic("zv1")
    tr = integrate(m, ic, pphi, pt, 5, candidates={"carter": carter_candidate(m)}, n_out=11)
    lines = tr.to_csv().splitlines()
    assert lines[0] == "t,x,y,px,py,drift_H,drift_carter"
    assert len(lines) == 12


def test_parameters_must_be_numeric():
    w = weyl_from_U("c*ln(x)", "-c^2*ln(x)")
    with pytest.raises(ValueError):
        compile_flow(w, 1.0, -1.0)
    flow = compile_flow(w, 1.0, -1.0, params={"c": 0.5})
    assert np.isfinite(flow.value("H", [1.5, 0.0, 0.1, 0.1]))
