"""Naive reference engine: one dense dictionary keyed by display position.

Deliberately simple: structural edits re-key the whole map and rewrite every
formula, and values are always produced by evaluating every formula from
scratch (no incremental recomputation to get wrong). Used as the
differential oracle for the real engine.
"""

from __future__ import annotations

from gridstore.core import (
    EMPTY,
    CellAddress,
    CellContent,
    Formula,
    Region,
    Sheet,
)
from gridstore.formula import CycleError, DependencyGraph, format_formula, parse_formula
from gridstore.formula.ast import (
    AttrRef,
    Bin,
    Call,
    DeadRef,
    Lit,
    Neg,
    RangeRef,
    Ref,
)
from gridstore.formula.evaluator import EvalValue


def _shift(expr, axis: str, pos: int, delta: int):
    """Textbook reference adjustment, written independently of the engine's:
    delta=+1 inserts a line at ``pos``, delta=-1 removes line ``pos``."""
    if isinstance(expr, Ref):
        r, c = expr.row, expr.col
        coord = r if axis == "row" else c
        if delta == 1:
            if coord >= pos:
                coord += 1
        else:
            if coord == pos:
                return DeadRef()
            if coord > pos:
                coord -= 1
        return Ref(coord, c) if axis == "row" else Ref(r, coord)
    if isinstance(expr, RangeRef):
        rg = expr.region
        lo, hi = (rg.top, rg.bottom) if axis == "row" else (rg.left, rg.right)
        if delta == 1:
            if lo >= pos:
                lo += 1
            if hi >= pos:
                hi += 1
        else:
            if lo == hi == pos:
                return DeadRef()
            if lo > pos:
                lo -= 1
            if hi >= pos:
                hi -= 1
        if axis == "row":
            return RangeRef(Region(lo, rg.left, hi, rg.right))
        return RangeRef(Region(rg.top, lo, rg.bottom, hi))
    if isinstance(expr, Neg):
        return Neg(_shift(expr.operand, axis, pos, delta))
    if isinstance(expr, Bin):
        return Bin(expr.op, _shift(expr.left, axis, pos, delta), _shift(expr.right, axis, pos, delta))
    if isinstance(expr, Call):
        return Call(expr.name, tuple(_shift(a, axis, pos, delta) for a in expr.args))
    if isinstance(expr, (Lit, AttrRef, DeadRef)):
        return expr
    raise TypeError(f"not a formula expression: {expr!r}")


class NaiveEngine:
    def __init__(self, rows: int = 1000, cols: int = 26) -> None:
        self.rows = rows
        self.cols = cols
        self.cells: dict[CellAddress, CellContent] = {}
        self._values: dict[CellAddress, EvalValue] | None = None  # lazy

    # --- evaluation: always from scratch, computed on demand -------------------

    def _to_sheet(self) -> Sheet:
        sheet = Sheet(rows=max(1, self.rows), cols=max(1, self.cols))
        for addr, content in self.cells.items():
            sheet.set(addr, content)
        return sheet

    def _check_cycles(self) -> None:
        """Raises CycleError if the current formula set is cyclic; cheap
        because it only builds footprints, no evaluation."""
        graph = DependencyGraph()
        for addr, content in self.cells.items():
            if isinstance(content, Formula):
                graph.add_formula(addr, content.expr)

    def values(self) -> dict[CellAddress, EvalValue]:
        if self._values is None:
            graph = DependencyGraph.from_sheet(self._to_sheet())
            self._values = dict(graph.values)
        return self._values

    # --- operations -------------------------------------------------------------

    def update_cell(self, addr: CellAddress, content: CellContent) -> None:
        addr = CellAddress(*addr)
        if not (1 <= addr.row <= self.rows and 1 <= addr.col <= self.cols):
            raise IndexError(f"address {tuple(addr)} outside extents")
        if isinstance(content, Formula) and content.expr is None:
            content = Formula(content.source, parse_formula(content.source))
        previous = self.cells.get(addr)
        if content is EMPTY:
            self.cells.pop(addr, None)
        else:
            self.cells[addr] = content
        if isinstance(content, Formula):
            try:
                self._check_cycles()
            except CycleError:
                if previous is None:
                    self.cells.pop(addr, None)
                else:
                    self.cells[addr] = previous
                raise
        self._values = None

    def get_cells(self, region: Region) -> list[list[CellContent]]:
        return [
            [self.cells.get(CellAddress(r, c), EMPTY) for c in range(region.left, region.right + 1)]
            for r in range(region.top, region.bottom + 1)
        ]

    def get_values(self, region: Region) -> list[list[EvalValue]]:
        values = self.values()
        out = []
        for r in range(region.top, region.bottom + 1):
            row = []
            for c in range(region.left, region.right + 1):
                addr = CellAddress(r, c)
                content = self.cells.get(addr, EMPTY)
                row.append(values.get(addr, content) if isinstance(content, Formula) else content)
            out.append(row)
        return out

    def _restructure(self, axis: str, pos: int, delta: int) -> None:
        moved: dict[CellAddress, CellContent] = {}
        for addr, content in self.cells.items():
            coord = addr.row if axis == "row" else addr.col
            if delta == -1 and coord == pos:
                continue  # the line is gone
            if delta == 1 and coord >= pos:
                coord += 1
            elif delta == -1 and coord > pos:
                coord -= 1
            target = CellAddress(coord, addr.col) if axis == "row" else CellAddress(addr.row, coord)
            if isinstance(content, Formula):
                expr = _shift(content.expr, axis, pos, delta)
                content = Formula(format_formula(expr), expr)
            moved[target] = content
        self.cells = moved
        self._values = None

    def insert_row_after(self, row: int) -> None:
        if not (0 <= row <= self.rows):
            raise IndexError(f"row {row} outside extents")
        self.rows += 1
        self._restructure("row", row + 1, 1)

    def insert_column_after(self, col: int) -> None:
        if not (0 <= col <= self.cols):
            raise IndexError(f"column {col} outside extents")
        self.cols += 1
        self._restructure("col", col + 1, 1)

    def delete_row(self, row: int) -> None:
        if not (1 <= row <= self.rows):
            raise IndexError(f"row {row} outside extents")
        self.rows -= 1
        self._restructure("row", row, -1)

    def delete_column(self, col: int) -> None:
        if not (1 <= col <= self.cols):
            raise IndexError(f"column {col} outside extents")
        self.cols -= 1
        self._restructure("col", col, -1)
