"""Expression tree nodes and the canonical renderer."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from gridstore.core import CellAddress, Region, format_a1


@dataclass(frozen=True)
class Lit:
    value: float
    lexeme: str  # original spelling, kept so "5" does not render as "5.0"


@dataclass(frozen=True)
class Ref:
    row: int
    col: int

    @property
    def addr(self) -> CellAddress:
        return CellAddress(self.row, self.col)


@dataclass(frozen=True)
class RangeRef:
    region: Region


@dataclass(frozen=True)
class AttrRef:
    """Named attribute reference, valid only in relational filter predicates."""

    name: str


@dataclass(frozen=True)
class DeadRef:
    """A reference whose target row/column was deleted; evaluates to #REF!."""


@dataclass(frozen=True)
class Neg:
    operand: "FormulaExpr"


@dataclass(frozen=True)
class Bin:
    op: str  # one of + - * / = <> < <= > >=
    left: "FormulaExpr"
    right: "FormulaExpr"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["FormulaExpr", ...]


FormulaExpr = Union[Lit, Ref, RangeRef, AttrRef, DeadRef, Neg, Bin, Call]

FUNCTIONS = frozenset({"SUM", "AVERAGE", "MIN", "MAX", "COUNT"})

_PRECEDENCE = {
    "=": 1, "<>": 1, "<": 1, "<=": 1, ">": 1, ">=": 1,
    "+": 2, "-": 2,
    "*": 3, "/": 3,
}
_UNARY_PRECEDENCE = 4


def render(expr: FormulaExpr) -> str:
    """Canonical source text for ``expr`` (no leading '=')."""
    return _render(expr, 0)


def format_formula(expr: FormulaExpr) -> str:
    return "=" + render(expr)


def _render(expr: FormulaExpr, parent_prec: int, right_side: bool = False) -> str:
    if isinstance(expr, Lit):
        return expr.lexeme
    if isinstance(expr, Ref):
        return format_a1(expr.addr)
    if isinstance(expr, RangeRef):
        r = expr.region
        return (
            format_a1(CellAddress(r.top, r.left))
            + ":"
            + format_a1(CellAddress(r.bottom, r.right))
        )
    if isinstance(expr, AttrRef):
        return expr.name
    if isinstance(expr, DeadRef):
        return "#REF!"
    if isinstance(expr, Call):
        return expr.name + "(" + ",".join(_render(a, 0) for a in expr.args) + ")"
    if isinstance(expr, Neg):
        inner = _render(expr.operand, _UNARY_PRECEDENCE)
        return "-" + inner
    if isinstance(expr, Bin):
        prec = _PRECEDENCE[expr.op]
        text = (
            _render(expr.left, prec)
            + expr.op
            + _render(expr.right, prec, right_side=True)
        )
        # Left associativity: a-(b-c) must keep its parentheses.
        if prec < parent_prec or (prec == parent_prec and right_side):
            return "(" + text + ")"
        return text
    raise TypeError(f"not a formula expression: {expr!r}")
