"""Exact symbolic expressions, rational-function fields and the zero oracle."""

from .core import (
    AuxSymbol,
    JetSymbol,
    MissingDerivativeRule,
    differentiate,
    kind_of,
    normalize,
    parse,
    to_text,
)
from .evaluate import DomainError, evaluate, evaluate_with_scale
from .field import RationalField, closure, numeric_definition
from .linsolve import InconsistentSystem, LinearSolution, PivotInconclusive, solve_linear
from .zero import INCONCLUSIVE, NONZERO, ZERO, ZV_DOMAIN, Domain, Witness, ZeroVerdict, equivalent_zero

__all__ = [
    "AuxSymbol", "JetSymbol", "MissingDerivativeRule", "differentiate", "kind_of", "normalize", "parse",
    "to_text", "DomainError", "evaluate", "evaluate_with_scale", "RationalField", "closure",
    "numeric_definition", "InconsistentSystem", "LinearSolution", "PivotInconclusive", "solve_linear",
    "Domain", "ZV_DOMAIN", "Witness", "ZeroVerdict", "equivalent_zero", "ZERO", "NONZERO", "INCONCLUSIVE",
]
