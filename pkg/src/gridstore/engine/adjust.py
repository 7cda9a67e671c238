"""Reference adjustment under row/column insertion and deletion.

Mainstream semantics: references at or past an insertion point shift;
ranges straddling it grow. A deleted line turns direct references into
#REF! and shrinks ranges, killing ranges it wholly covered.
"""

from __future__ import annotations

from gridstore.core import Region
from gridstore.formula.ast import (
    AttrRef,
    Bin,
    Call,
    DeadRef,
    FormulaExpr,
    Lit,
    Neg,
    RangeRef,
    Ref,
)


def _map_leaves(expr: FormulaExpr, ref_fn, range_fn) -> FormulaExpr:
    if isinstance(expr, Ref):
        return ref_fn(expr)
    if isinstance(expr, RangeRef):
        return range_fn(expr)
    if isinstance(expr, Neg):
        return Neg(_map_leaves(expr.operand, ref_fn, range_fn))
    if isinstance(expr, Bin):
        return Bin(
            expr.op,
            _map_leaves(expr.left, ref_fn, range_fn),
            _map_leaves(expr.right, ref_fn, range_fn),
        )
    if isinstance(expr, Call):
        return Call(expr.name, tuple(_map_leaves(a, ref_fn, range_fn) for a in expr.args))
    if isinstance(expr, (Lit, AttrRef, DeadRef)):
        return expr
    raise TypeError(f"not a formula expression: {expr!r}")


def adjust_for_insert(expr: FormulaExpr, pos: int, axis: str) -> FormulaExpr:
    """Shift references for a new row/column appearing at position ``pos``."""

    def ref(node: Ref) -> FormulaExpr:
        if axis == "row":
            return Ref(node.row + 1, node.col) if node.row >= pos else node
        return Ref(node.row, node.col + 1) if node.col >= pos else node

    def rng(node: RangeRef) -> FormulaExpr:
        r = node.region
        if axis == "row":
            top = r.top + 1 if r.top >= pos else r.top
            bottom = r.bottom + 1 if r.bottom >= pos else r.bottom
            return RangeRef(Region(top, r.left, bottom, r.right))
        left = r.left + 1 if r.left >= pos else r.left
        right = r.right + 1 if r.right >= pos else r.right
        return RangeRef(Region(r.top, left, r.bottom, right))

    return _map_leaves(expr, ref, rng)


def adjust_for_delete(expr: FormulaExpr, pos: int, axis: str) -> FormulaExpr:
    """Shift references after row/column ``pos`` is removed."""

    def ref(node: Ref) -> FormulaExpr:
        coord = node.row if axis == "row" else node.col
        if coord == pos:
            return DeadRef()
        if coord > pos:
            return Ref(node.row - 1, node.col) if axis == "row" else Ref(node.row, node.col - 1)
        return node

    def rng(node: RangeRef) -> FormulaExpr:
        r = node.region
        lo, hi = (r.top, r.bottom) if axis == "row" else (r.left, r.right)
        if lo == hi == pos:
            return DeadRef()
        new_lo = lo - 1 if lo > pos else lo
        new_hi = hi - 1 if hi >= pos else hi
        if axis == "row":
            return RangeRef(Region(new_lo, r.left, new_hi, r.right))
        return RangeRef(Region(r.top, new_lo, r.bottom, new_hi))

    return _map_leaves(expr, ref, rng)


def shift_region_for_insert(region: Region, pos: int, axis: str) -> Region:
    """How a table's footprint moves: regions past the line shift, regions
    spanning it grow by one empty line."""
    if axis == "row":
        top, bottom = region.top, region.bottom
        if pos <= top:
            return Region(top + 1, region.left, bottom + 1, region.right)
        if top < pos <= bottom:
            return Region(top, region.left, bottom + 1, region.right)
        return region
    left, right = region.left, region.right
    if pos <= left:
        return Region(region.top, left + 1, region.bottom, right + 1)
    if left < pos <= right:
        return Region(region.top, left, region.bottom, right + 1)
    return region


def shift_region_for_delete(region: Region, pos: int, axis: str) -> Region | None:
    """Region after removing a line; None when the region vanishes."""
    if axis == "row":
        top, bottom = region.top, region.bottom
        if pos < top:
            return Region(top - 1, region.left, bottom - 1, region.right)
        if pos > bottom:
            return region
        if top == bottom:
            return None
        return Region(top, region.left, bottom - 1, region.right)
    left, right = region.left, region.right
    if pos < left:
        return Region(region.top, left - 1, region.bottom, right - 1)
    if pos > right:
        return region
    if left == right:
        return None
    return Region(region.top, left, region.bottom, right - 1)
