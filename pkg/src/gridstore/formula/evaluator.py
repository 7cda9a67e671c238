"""Formula evaluation and access-footprint analysis."""

from __future__ import annotations

from typing import Iterable, Protocol

from gridstore.core import (
    DIV0,
    EMPTY,
    REF_ERROR,
    VALUE_ERROR,
    Boolean,
    CellAddress,
    CellContent,
    ErrorValue,
    Formula,
    Number,
    Region,
    Sheet,
    Text,
)
from gridstore.formula.ast import AttrRef, Bin, Call, DeadRef, FormulaExpr, Lit, Neg, RangeRef, Ref

EvalValue = CellContent | ErrorValue


class Resolver(Protocol):
    """Supplies effective cell values to the evaluator.

    Formula cells must resolve to their computed value, not the Formula
    content itself.
    """

    rows: int
    cols: int

    def value_at(self, addr: CellAddress) -> EvalValue: ...

    def values_in(self, region: Region) -> Iterable[EvalValue]:
        """Effective values of the *filled* cells inside ``region``."""
        ...


class SheetResolver:
    """Resolver over a plain Sheet plus a computed-value cache for formulas."""

    def __init__(self, sheet: Sheet, values: dict[CellAddress, EvalValue] | None = None):
        self.sheet = sheet
        self.values = values if values is not None else {}

    @property
    def rows(self) -> int:
        return self.sheet.rows

    @property
    def cols(self) -> int:
        return self.sheet.cols

    def value_at(self, addr: CellAddress) -> EvalValue:
        content = self.sheet.get(addr)
        if isinstance(content, Formula):
            return self.values.get(addr, VALUE_ERROR)
        return content

    def values_in(self, region: Region) -> Iterable[EvalValue]:
        for addr, content in self.sheet.filled_in(region):
            if isinstance(content, Formula):
                yield self.values.get(addr, VALUE_ERROR)
            else:
                yield content


def _as_number(value: EvalValue) -> float | ErrorValue:
    if isinstance(value, ErrorValue):
        return value
    if isinstance(value, Number):
        return value.value
    if isinstance(value, Boolean):
        return 1.0 if value.value else 0.0
    if value is EMPTY:
        return 0.0
    return VALUE_ERROR


def evaluate(expr: FormulaExpr, resolver: Resolver) -> EvalValue:
    """Evaluate ``expr``; errors come back as ErrorValue, never exceptions."""
    if isinstance(expr, Lit):
        return Number(expr.value)
    if isinstance(expr, Ref):
        if not (1 <= expr.row <= resolver.rows and 1 <= expr.col <= resolver.cols):
            return REF_ERROR
        return resolver.value_at(expr.addr)
    if isinstance(expr, RangeRef):
        return VALUE_ERROR  # a bare range is not a scalar
    if isinstance(expr, DeadRef):
        return REF_ERROR
    if isinstance(expr, AttrRef):
        attr_value = getattr(resolver, "attr_value", None)
        if attr_value is None:
            return VALUE_ERROR  # only meaningful under a predicate resolver
        return attr_value(expr.name)
    if isinstance(expr, Neg):
        v = _as_number(evaluate(expr.operand, resolver))
        return v if isinstance(v, ErrorValue) else Number(-v)
    if isinstance(expr, Bin):
        return _eval_bin(expr, resolver)
    if isinstance(expr, Call):
        return _eval_call(expr, resolver)
    raise TypeError(f"not a formula expression: {expr!r}")


def _eval_bin(expr: Bin, resolver: Resolver) -> EvalValue:
    left = evaluate(expr.left, resolver)
    right = evaluate(expr.right, resolver)
    if isinstance(left, ErrorValue):
        return left
    if isinstance(right, ErrorValue):
        return right
    op = expr.op
    if op in ("+", "-", "*", "/"):
        a = _as_number(left)
        if isinstance(a, ErrorValue):
            return a
        b = _as_number(right)
        if isinstance(b, ErrorValue):
            return b
        if op == "+":
            return Number(a + b)
        if op == "-":
            return Number(a - b)
        if op == "*":
            return Number(a * b)
        if b == 0.0:
            return DIV0
        return Number(a / b)
    # Comparisons: text compares with text byte-wise, everything else
    # numerically (booleans and empties coerce).
    if isinstance(left, Text) and isinstance(right, Text):
        a, b = left.value, right.value
    elif isinstance(left, Text) or isinstance(right, Text):
        return VALUE_ERROR
    else:
        a = _as_number(left)
        b = _as_number(right)
        if isinstance(a, ErrorValue):
            return a
        if isinstance(b, ErrorValue):
            return b
    if op == "=":
        return Boolean(a == b)
    if op == "<>":
        return Boolean(a != b)
    if op == "<":
        return Boolean(a < b)
    if op == "<=":
        return Boolean(a <= b)
    if op == ">":
        return Boolean(a > b)
    return Boolean(a >= b)


def _eval_call(expr: Call, resolver: Resolver) -> EvalValue:
    numbers: list[float] = []
    for arg in expr.args:
        if isinstance(arg, RangeRef):
            region = arg.region
            if region.bottom > resolver.rows or region.right > resolver.cols:
                return REF_ERROR
            for value in resolver.values_in(region):
                if isinstance(value, ErrorValue):
                    return value
                if isinstance(value, Number):
                    numbers.append(value.value)
                # Text/Boolean/Empty cells are skipped by the aggregates.
        else:
            value = evaluate(arg, resolver)
            if isinstance(value, ErrorValue):
                return value
            if value is EMPTY:
                continue
            v = _as_number(value)
            if isinstance(v, ErrorValue):
                return v
            numbers.append(v)
    name = expr.name
    if name == "SUM":
        return Number(sum(numbers))
    if name == "COUNT":
        return Number(float(len(numbers)))
    if name == "AVERAGE":
        if not numbers:
            return DIV0
        return Number(sum(numbers) / len(numbers))
    if name == "MIN":
        return Number(min(numbers)) if numbers else Number(0.0)
    if name == "MAX":
        return Number(max(numbers)) if numbers else Number(0.0)
    raise TypeError(f"unknown function {name!r}")  # parser rejects these


def access_footprint(expr: FormulaExpr) -> tuple[list[Region], int]:
    """Rectangular regions the formula reads, in source order, plus the total
    addressed-cell count. Cells shared by two distinct arguments are counted
    twice: the cost model charges per-region fetches.
    """
    regions: list[Region] = []

    def walk(node: FormulaExpr) -> None:
        if isinstance(node, Ref):
            regions.append(Region(node.row, node.col, node.row, node.col))
        elif isinstance(node, RangeRef):
            regions.append(node.region)
        elif isinstance(node, Neg):
            walk(node.operand)
        elif isinstance(node, Bin):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Call):
            for arg in node.args:
                walk(arg)

    walk(expr)
    return regions, sum(r.area for r in regions)
