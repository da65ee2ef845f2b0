"""Elimination chain on the generic Weyl jet model, step by step."""

import json

import sympy

from weylkt.jet import lemma8_pipeline

res = lemma8_pipeline(n_samples=30)
for step in res.trace:
    print(f"{step.name:>16}  eliminates {step.variable:<7} pivot {sympy.factor(step.pivot.as_expr())}")
    if step.guard_factors:
        print(" " * 18 + "new guards:", ", ".join(step.guard_factors))
print()
print("d/dy K40 after the chain:")
print("  ", sympy.factor(res.final.as_expr()))
print("comparison with the product x U_x^2 (1+2xU_x)(1+xU_x)^2 (xU_x^2+U_x+xU_y^2)^3:")
print("  ", json.dumps(res.final_comparison.to_json()))
print()
for b in res.branches:
    print(f"branch {b['case']}: {b['resolution']}")
print()
print("fourth case:", json.dumps({k: v if isinstance(v, str) else v["status"]
                                 for k, v in res.checks["fourth_case"].items()}, indent=1))
