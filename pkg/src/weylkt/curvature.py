"""Christoffel symbols, Riemann and Ricci tensors of metrics over a RationalField.

Coordinates are ``(x, y, phi, t)``; components depend on x and y only, so the
phi and t derivatives vanish identically.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from itertools import product
from typing import Sequence

from .expr.field import FracElement, RationalField
from .expr.zero import Domain, ZeroVerdict, equivalent_zero

COORDS = ("x", "y", "phi", "t")
Metric = Sequence[Sequence[FracElement]]


class DegenerateMetric(ValueError):
    def __init__(self, verdict: ZeroVerdict):
        super().__init__("metric determinant vanishes on the sampled domain")
        self.verdict = verdict


@dataclass
class CurvatureReport:
    which: str
    components: dict
    verdicts: dict = dc_field(default_factory=dict)

    @property
    def all_zero(self) -> bool:
        return all(v.is_zero for v in self.verdicts.values())

    @property
    def nonzero_components(self) -> list:
        return [k for k, v in self.verdicts.items() if v.is_nonzero]

    def to_json(self) -> dict:
        return {
            "which": self.which,
            "all_zero": self.all_zero,
            "components": {",".join(map(str, k)): v.to_json() for k, v in sorted(self.verdicts.items())},
        }


def _d(F: RationalField, f: FracElement, k: int) -> FracElement:
    if k >= 2 or f == 0:
        return F.zero()
    return F.d(f, COORDS[k])


def check_symmetric(g: Metric) -> None:
    for a, b in product(range(4), repeat=2):
        if g[a][b] != g[b][a]:
            raise ValueError(f"metric is not symmetric in ({a}, {b})")


def determinant(F: RationalField, g: Metric) -> FracElement:
    m = [list(r) for r in g]
    det = F.one()
    n = len(m)
    for c in range(n):
        p = next((r for r in range(c, n) if m[r][c] != 0), None)
        if p is None:
            return F.zero()
        if p != c:
            m[c], m[p] = m[p], m[c]
            det = -det
        det = det * m[c][c]
        for r in range(c + 1, n):
            if m[r][c] != 0:
                f = m[r][c] / m[c][c]
                m[r] = [a - f * b for a, b in zip(m[r], m[c])]
    return det


def inverse_metric(F: RationalField, g: Metric) -> list[list[FracElement]]:
    n = len(g)
    if all(g[a][b] == 0 for a in range(n) for b in range(n) if a != b):
        return [[(1 / g[a][a] if a == b else F.zero()) for b in range(n)] for a in range(n)]
    m = [list(r) + [F.one() if i == j else F.zero() for j in range(n)] for i, r in enumerate(g)]
    for c in range(n):
        p = next(r for r in range(c, n) if m[r][c] != 0)
        m[c], m[p] = m[p], m[c]
        inv = 1 / m[c][c]
        m[c] = [v * inv for v in m[c]]
        for r in range(n):
            if r != c and m[r][c] != 0:
                f = m[r][c]
                m[r] = [a - f * b for a, b in zip(m[r], m[c])]
    return [row[n:] for row in m]


def christoffel(F: RationalField, g: Metric, ginv=None):
    """``Gamma[a][b][c]`` = Gamma^a_{bc}."""
    ginv = ginv or inverse_metric(F, g)
    dg = [[[_d(F, g[a][b], c) for c in range(4)] for b in range(4)] for a in range(4)]
    gam = [[[F.zero()] * 4 for _ in range(4)] for _ in range(4)]
    for a, b in product(range(4), repeat=2):
        for c in range(b, 4):
            s = F.zero()
            for e in range(4):
                if ginv[a][e] == 0:
                    continue
                t = dg[e][c][b] + dg[e][b][c] - dg[b][c][e]
                if t != 0:
                    s += ginv[a][e] * t
            gam[a][b][c] = gam[a][c][b] = s / 2
    return gam


def riemann(F: RationalField, g: Metric, gam=None) -> dict:
    """Components R^a_{bcd} with c < d (antisymmetric in the last pair)."""
    gam = gam or christoffel(F, g)
    out = {}
    for a, b, c, d in product(range(4), repeat=4):
        if c >= d:
            continue
        v = _d(F, gam[a][d][b], c) - _d(F, gam[a][c][b], d)
        for e in range(4):
            if gam[a][c][e] != 0 and gam[e][d][b] != 0:
                v += gam[a][c][e] * gam[e][d][b]
            if gam[a][d][e] != 0 and gam[e][c][b] != 0:
                v -= gam[a][d][e] * gam[e][c][b]
        out[(a, b, c, d)] = v
    return out


def ricci(F: RationalField, g: Metric, gam=None) -> dict:
    """Components R_{bd} = R^a_{bad} for b <= d (checked symmetric)."""
    gam = gam or christoffel(F, g)
    full = {}
    for b, d in product(range(4), repeat=2):
        v = F.zero()
        for a in range(4):
            v += _d(F, gam[a][d][b], a) - _d(F, gam[a][a][b], d)
            for e in range(4):
                if gam[a][a][e] != 0 and gam[e][d][b] != 0:
                    v += gam[a][a][e] * gam[e][d][b]
                if gam[a][d][e] != 0 and gam[e][a][b] != 0:
                    v -= gam[a][d][e] * gam[e][a][b]
        full[(b, d)] = v
    for b, d in product(range(4), repeat=2):
        if full[(b, d)] != full[(d, b)]:
            raise AssertionError(f"Ricci tensor not symmetric in ({b}, {d})")
    return {k: v for k, v in full.items() if k[0] <= k[1]}


def curvature(
    F: RationalField,
    g: Metric,
    which: str,
    domain: Domain,
    n_samples: int = 100,
    *,
    precision: int = 40,
    tol=None,
    seed=0,
    stop_at_first_nonzero: bool = False,
) -> CurvatureReport:
    """Zero-tested Ricci or Riemann components of ``g``.

    The determinant is zero-tested first; a degenerate metric raises
    :class:`DegenerateMetric` carrying the verdict.
    """
    if which not in ("Ricci", "Riemann"):
        raise ValueError("which must be 'Ricci' or 'Riemann'")
    check_symmetric(g)
    det = determinant(F, g)
    dv = equivalent_zero(det, domain, 30, precision=precision, seed=f"{seed}/det", field=F)
    if not dv.is_nonzero:
        raise DegenerateMetric(dv)
    gam = christoffel(F, g)
    comps = ricci(F, g, gam) if which == "Ricci" else riemann(F, g, gam)
    rep = CurvatureReport(which, comps)
    for k, v in comps.items():
        verdict = equivalent_zero(v, domain, n_samples, tol, precision=precision, seed=f"{seed}/{k}", field=F)
        rep.verdicts[k] = verdict
        if stop_at_first_nonzero and verdict.is_nonzero:
            break
    return rep


def expr_curvature(metric: Sequence[Sequence], which: str) -> dict:
    """Second route: plain sympy differentiation of explicit component expressions.

    No field, no atoms, no cancellation; intended for numeric cross-checks.
    """
    import sympy

    xs = [sympy.Symbol(c) for c in COORDS]
    g = sympy.Matrix(4, 4, lambda i, j: sympy.sympify(metric[i][j]))
    if g.is_diagonal():
        gi = sympy.diag(*[1 / g[i, i] for i in range(4)])
    else:
        gi = g.inv()

    def dd(f, k):
        return sympy.diff(f, xs[k]) if k < 2 else sympy.Integer(0)

    gam = [[[sum((gi[a, e] * (dd(g[e, c], b) + dd(g[e, b], c) - dd(g[b, c], e)) for e in range(4)),
                 sympy.Integer(0)) / 2 for c in range(4)] for b in range(4)] for a in range(4)]
    if which == "Riemann":
        out = {}
        for a, b, c, d in product(range(4), repeat=4):
            if c < d:
                out[(a, b, c, d)] = (dd(gam[a][d][b], c) - dd(gam[a][c][b], d)
                                     + sum(gam[a][c][e] * gam[e][d][b] - gam[a][d][e] * gam[e][c][b]
                                           for e in range(4)))
        return out
    out = {}
    for b, d in product(range(4), repeat=2):
        if b <= d:
            out[(b, d)] = sum(dd(gam[a][d][b], a) - dd(gam[a][a][b], d)
                              + sum(gam[a][a][e] * gam[e][d][b] - gam[a][d][e] * gam[e][a][b] for e in range(4))
                              for a in range(4))
    return out


__all__ = ["expr_curvature", "CurvatureReport", "DegenerateMetric", "christoffel", "riemann", "ricci", "curvature",
           "inverse_metric", "determinant", "COORDS"]
