"""Walk through the odd cubic analysis of the Zipoy-Voorhees family.

Prints the gradient determinant, the coefficients A, B of alpha_x = A alpha,
alpha_y = B alpha, and the criterion A_y - B_x for symbolic delta, then shows
that the criterion has a NonZero witness for a few sample values.
"""

import sympy

from weylkt.analysis import gradient_matrix, necessary_criterion, rank_M
from weylkt.models import zipoy_voorhees


def show(label, F, f):
    print(f"{label:>10}: {sympy.factor(F.to_expr(f))}")


m = zipoy_voorhees("delta")
print("model:", m.name)
print("rank of M:", rank_M(m, 60).value)
show("det M", m.field, gradient_matrix(m).det)
crit, verdict, ans = necessary_criterion(m, n_samples=60)
show("A", ans.field, ans.A)
show("B", ans.field, ans.B)
show("A_y - B_x", ans.field, crit)
print("verdict:", verdict.status, "witness:", verdict.witness.assignment if verdict.witness else None)

for d in ("1/2", "1", "2", "3"):
    c, v, a = necessary_criterion(zipoy_voorhees(d), n_samples=30)
    print(f"delta = {d:>3}: criterion {sympy.factor(a.field.to_expr(c))}  ({v.status})")
