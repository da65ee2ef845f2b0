"""Integrate the preset orbits and compare invariant drift.

The Carter-type quadratic (1 - y^2) p_y^2 + p_phi^2 / (1 - y^2) is conserved
for delta = 1 (Schwarzschild) and drifts at the percent level for delta = 2.
Pass an output directory to also write the trajectories as CSV.
"""

import sys
from pathlib import Path

from weylkt.analysis import carter_candidate, killing_residual
from weylkt.geodesic import PRESETS, integrate, momentum_from_shell
from weylkt.models import zipoy_voorhees

out = Path(sys.argv[1]) if len(sys.argv) > 1 else None
for name, pr in PRESETS.items():
    m = zipoy_voorhees(pr["delta"])
    C = carter_candidate(m)
    px = momentum_from_shell(m, pr["x"], pr["y"], pr["py"], pr["pphi"], pr["pt"])
    tr = integrate(m, [pr["x"], pr["y"], px, pr["py"]], pr["pphi"], pr["pt"], 100.0, 1e-12, {"carter": C})
    br = killing_residual(m.H, C, m.domain, 30)
    drift = tr.summary()["max_drift"]
    print(f"{name}: {tr.status}, x in [{tr.states[0].min():.2f}, {tr.states[0].max():.2f}], "
          f"drift H {drift['H']:.2e}, drift Carter {drift['carter']:.2e}, {{H, C}} {br.status}")
    if out:
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.csv").write_text(tr.to_csv())
