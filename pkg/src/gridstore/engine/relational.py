"""Relational operators over composite table values.

Set semantics for union/difference/intersection, bag semantics for
crossproduct/join, deterministic row order (left operand first). Filter
predicates are formula expressions over attribute names.
"""

from __future__ import annotations

from dataclasses import dataclass

from gridstore.core import Boolean, CellContent, ErrorValue, Number
from gridstore.formula.ast import FormulaExpr
from gridstore.formula.evaluator import EvalValue, evaluate
from gridstore.formula.parser import parse_predicate


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class TableValue:
    """Composite value held in one cell: named attributes over ordered rows."""

    attrs: tuple[str, ...]
    rows: tuple[tuple[CellContent, ...], ...]

    def __post_init__(self) -> None:
        if len(set(self.attrs)) != len(self.attrs):
            raise SchemaError(f"duplicate attribute names: {self.attrs}")
        for row in self.rows:
            if len(row) != len(self.attrs):
                raise SchemaError("ragged row in table value")

    @property
    def row_count(self) -> int:
        return len(self.rows)


def _require_same_schema(a: TableValue, b: TableValue, op: str) -> None:
    if a.attrs != b.attrs:
        raise SchemaError(f"{op} needs identical schemas: {a.attrs} vs {b.attrs}")


def union(a: TableValue, b: TableValue) -> TableValue:
    _require_same_schema(a, b, "union")
    seen = set()
    out = []
    for row in a.rows + b.rows:
        if row not in seen:
            seen.add(row)
            out.append(row)
    return TableValue(a.attrs, tuple(out))


def difference(a: TableValue, b: TableValue) -> TableValue:
    _require_same_schema(a, b, "difference")
    drop = set(b.rows)
    seen = set()
    out = []
    for row in a.rows:
        if row not in drop and row not in seen:
            seen.add(row)
            out.append(row)
    return TableValue(a.attrs, tuple(out))


def intersection(a: TableValue, b: TableValue) -> TableValue:
    _require_same_schema(a, b, "intersection")
    keep = set(b.rows)
    seen = set()
    out = []
    for row in a.rows:
        if row in keep and row not in seen:
            seen.add(row)
            out.append(row)
    return TableValue(a.attrs, tuple(out))


def _merged_attrs(a: TableValue, b: TableValue) -> tuple[str, ...]:
    out = list(a.attrs)
    for name in b.attrs:
        candidate = name
        suffix = 2
        while candidate in out:
            candidate = f"{name}_{suffix}"
            suffix += 1
        out.append(candidate)
    return tuple(out)


def crossproduct(a: TableValue, b: TableValue) -> TableValue:
    attrs = _merged_attrs(a, b)
    rows = tuple(ra + rb for ra in a.rows for rb in b.rows)
    return TableValue(attrs, rows)


class _RowResolver:
    """Predicate context: attribute names resolve, nothing else does."""

    rows = 0
    cols = 0

    def __init__(self, attrs: tuple[str, ...], row: tuple[CellContent, ...]) -> None:
        self._values = dict(zip(attrs, row))

    def value_at(self, addr) -> EvalValue:
        from gridstore.core import REF_ERROR

        return REF_ERROR

    def values_in(self, region):
        return ()

    def attr_value(self, name: str) -> EvalValue:
        return self._values[name]


def _predicate_expr(predicate: str | FormulaExpr) -> FormulaExpr:
    if isinstance(predicate, str):
        return parse_predicate(predicate)
    return predicate


def _check_attrs(expr: FormulaExpr, attrs: tuple[str, ...]) -> None:
    from gridstore.formula.ast import AttrRef, Bin, Call, Neg

    def walk(node) -> None:
        if isinstance(node, AttrRef):
            if node.name not in attrs:
                raise SchemaError(f"unknown attribute {node.name!r}")
        elif isinstance(node, Neg):
            walk(node.operand)
        elif isinstance(node, Bin):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Call):
            for arg in node.args:
                walk(arg)

    walk(expr)


def _row_passes(expr: FormulaExpr, attrs: tuple[str, ...], row: tuple[CellContent, ...]) -> bool:
    value = evaluate(expr, _RowResolver(attrs, row))
    if isinstance(value, Boolean):
        return value.value
    if isinstance(value, Number):
        return value.value != 0
    if isinstance(value, ErrorValue):
        raise SchemaError(f"predicate evaluated to {value.code}")
    raise SchemaError("predicate must yield a boolean or number")


def filter_rows(table: TableValue, predicate: str | FormulaExpr) -> TableValue:
    expr = _predicate_expr(predicate)
    _check_attrs(expr, table.attrs)
    rows = tuple(row for row in table.rows if _row_passes(expr, table.attrs, row))
    return TableValue(table.attrs, rows)


def join(a: TableValue, b: TableValue, predicate: str | FormulaExpr | None = None) -> TableValue:
    """Natural join when no predicate; nested-loop predicate join otherwise."""
    if predicate is None:
        shared = [name for name in a.attrs if name in b.attrs]
        b_keep = [i for i, name in enumerate(b.attrs) if name not in shared]
        attrs = a.attrs + tuple(b.attrs[i] for i in b_keep)
        a_idx = {name: i for i, name in enumerate(a.attrs)}
        b_idx = {name: i for i, name in enumerate(b.attrs)}
        out = []
        for ra in a.rows:
            for rb in b.rows:
                if all(ra[a_idx[name]] == rb[b_idx[name]] for name in shared):
                    out.append(ra + tuple(rb[i] for i in b_keep))
        return TableValue(attrs, tuple(out))
    product_attrs = _merged_attrs(a, b)
    expr = _predicate_expr(predicate)
    _check_attrs(expr, product_attrs)
    out = []
    for ra in a.rows:
        for rb in b.rows:
            row = ra + rb
            if _row_passes(expr, product_attrs, row):
                out.append(row)
    return TableValue(product_attrs, tuple(out))


def project(table: TableValue, *attrs: str) -> TableValue:
    indices = []
    for name in attrs:
        if name not in table.attrs:
            raise SchemaError(f"unknown attribute {name!r}")
        indices.append(table.attrs.index(name))
    seen = set()
    out = []
    for row in table.rows:
        projected = tuple(row[i] for i in indices)
        if projected not in seen:
            seen.add(projected)
            out.append(projected)
    return TableValue(tuple(attrs), tuple(out))


def rename(table: TableValue, old: str, new: str) -> TableValue:
    if old not in table.attrs:
        raise SchemaError(f"unknown attribute {old!r}")
    attrs = tuple(new if name == old else name for name in table.attrs)
    return TableValue(attrs, table.rows)


def index_into(table: TableValue, i: int, j: int) -> CellContent:
    """The (i, j)th cell of a composite table value, 1-based."""
    if not (1 <= i <= len(table.rows)) or not (1 <= j <= len(table.attrs)):
        raise IndexError(f"({i}, {j}) outside table of {len(table.rows)}x{len(table.attrs)}")
    return table.rows[i - 1][j - 1]
