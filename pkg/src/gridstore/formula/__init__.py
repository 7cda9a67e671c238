"""Minimal A1 formula language: parser, evaluator, dependency graph.

Covers arithmetic, comparisons, and the range aggregates (SUM, AVERAGE,
MIN, MAX, COUNT) needed by range-access benchmarking and interactive
recomputation.
"""

from gridstore.formula.ast import (
    AttrRef,
    Bin,
    Call,
    FormulaExpr,
    Lit,
    Neg,
    RangeRef,
    Ref,
    render,
    format_formula,
)
from gridstore.formula.parser import FormulaError, parse_expression, parse_formula, parse_predicate
from gridstore.formula.evaluator import SheetResolver, access_footprint, evaluate
from gridstore.formula.graph import CycleError, DependencyGraph

__all__ = [
    "AttrRef",
    "Bin",
    "Call",
    "CycleError",
    "DependencyGraph",
    "FormulaError",
    "FormulaExpr",
    "Lit",
    "Neg",
    "RangeRef",
    "Ref",
    "SheetResolver",
    "access_footprint",
    "evaluate",
    "format_formula",
    "parse_expression",
    "parse_formula",
    "parse_predicate",
    "render",
]
