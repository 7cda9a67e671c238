"""Physical table stores, keyed by row/column identifiers.

Tables never see display positions; that indirection is what lets row and
column insertion touch no tuples. Fetches materialize whole tuples (a ROM
row, a COM column, an RCV cell) so wall-clock access tracks the modeled
access cost.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from gridstore.core import EMPTY, CellContent


@dataclass
class TableStats:
    tuple_writes: int = 0
    tuple_fetches: int = 0
    cells_materialized: int = 0

    def reset(self) -> None:
        self.tuple_writes = 0
        self.tuple_fetches = 0
        self.cells_materialized = 0


class RomTable:
    """One tuple per row identifier, one field per column identifier."""

    kind = "ROM"

    def __init__(self, table_id: str, col_ids: list[int], stats: TableStats) -> None:
        self.table_id = table_id
        self.col_ids = list(col_ids)
        self.col_index = {cid: i for i, cid in enumerate(col_ids)}
        self.rows: dict[int, list[CellContent]] = {}
        self.stats = stats

    def can_hold(self, rid: int, cid: int) -> bool:
        return cid in self.col_index

    def set(self, rid: int, cid: int, content: CellContent) -> None:
        idx = self.col_index[cid]
        row = self.rows.get(rid)
        if content is EMPTY:
            if row is None:
                return
            row[idx] = EMPTY
            self.stats.tuple_writes += 1
            if all(c is EMPTY for c in row):
                del self.rows[rid]
            return
        if row is None:
            row = [EMPTY] * len(self.col_ids)
            self.rows[rid] = row
        row[idx] = content
        self.stats.tuple_writes += 1

    def get(self, rid: int, cid: int) -> CellContent:
        row = self.rows.get(rid)
        if row is None:
            return EMPTY
        return row[self.col_index[cid]]

    def fetch_tuple(self, rid: int) -> list[CellContent] | None:
        """Materialize the full stored row, as a real fetch would."""
        row = self.rows.get(rid)
        if row is None:
            return None
        self.stats.tuple_fetches += 1
        self.stats.cells_materialized += len(row)
        return list(row)

    def iter_filled(self, dead_rows: set[int], dead_cols: set[int]) -> Iterator[tuple[int, int, CellContent]]:
        for rid, row in self.rows.items():
            if rid in dead_rows:
                continue
            for cid, content in zip(self.col_ids, row):
                if content is not EMPTY and cid not in dead_cols:
                    yield rid, cid, content

    def cell_count(self, dead_rows: set[int], dead_cols: set[int]) -> int:
        return sum(1 for _ in self.iter_filled(dead_rows, dead_cols))


class ComTable:
    """Transpose of ROM: one tuple per column identifier."""

    kind = "COM"

    def __init__(self, table_id: str, row_ids: list[int], stats: TableStats) -> None:
        self.table_id = table_id
        self.row_ids = list(row_ids)
        self.row_index = {rid: i for i, rid in enumerate(row_ids)}
        self.cols: dict[int, list[CellContent]] = {}
        self.stats = stats

    def can_hold(self, rid: int, cid: int) -> bool:
        return rid in self.row_index

    def set(self, rid: int, cid: int, content: CellContent) -> None:
        idx = self.row_index[rid]
        col = self.cols.get(cid)
        if content is EMPTY:
            if col is None:
                return
            col[idx] = EMPTY
            self.stats.tuple_writes += 1
            if all(c is EMPTY for c in col):
                del self.cols[cid]
            return
        if col is None:
            col = [EMPTY] * len(self.row_ids)
            self.cols[cid] = col
        col[idx] = content
        self.stats.tuple_writes += 1

    def get(self, rid: int, cid: int) -> CellContent:
        col = self.cols.get(cid)
        if col is None:
            return EMPTY
        return col[self.row_index[rid]]

    def fetch_tuple(self, cid: int) -> list[CellContent] | None:
        col = self.cols.get(cid)
        if col is None:
            return None
        self.stats.tuple_fetches += 1
        self.stats.cells_materialized += len(col)
        return list(col)

    def iter_filled(self, dead_rows: set[int], dead_cols: set[int]) -> Iterator[tuple[int, int, CellContent]]:
        for cid, col in self.cols.items():
            if cid in dead_cols:
                continue
            for rid, content in zip(self.row_ids, col):
                if content is not EMPTY and rid not in dead_rows:
                    yield rid, cid, content

    def cell_count(self, dead_rows: set[int], dead_cols: set[int]) -> int:
        return sum(1 for _ in self.iter_filled(dead_rows, dead_cols))


class RcvTable:
    """Key-value store: one tuple per filled cell. One instance per sheet
    holds every RCV-assigned cell plus anything no other table can take."""

    kind = "RCV"

    def __init__(self, table_id: str, stats: TableStats) -> None:
        self.table_id = table_id
        self.cells: dict[tuple[int, int], CellContent] = {}
        self.by_row: dict[int, set[int]] = {}
        self.stats = stats

    def set(self, rid: int, cid: int, content: CellContent) -> None:
        key = (rid, cid)
        if content is EMPTY:
            if key in self.cells:
                del self.cells[key]
                self.by_row[rid].discard(cid)
                self.stats.tuple_writes += 1
            return
        self.cells[key] = content
        self.by_row.setdefault(rid, set()).add(cid)
        self.stats.tuple_writes += 1

    def get(self, rid: int, cid: int) -> CellContent:
        content = self.cells.get((rid, cid))
        if content is None:
            return EMPTY
        self.stats.tuple_fetches += 1
        self.stats.cells_materialized += 1
        return content

    def iter_filled(self, dead_rows: set[int], dead_cols: set[int]) -> Iterator[tuple[int, int, CellContent]]:
        for (rid, cid), content in self.cells.items():
            if rid not in dead_rows and cid not in dead_cols:
                yield rid, cid, content

    def cell_count(self, dead_rows: set[int], dead_cols: set[int]) -> int:
        return sum(1 for _ in self.iter_filled(dead_rows, dead_cols))


@dataclass
class TomTable:
    """Linked relational table: named attributes over ordered records."""

    name: str
    attrs: list[str]
    records: list[list[CellContent]] = field(default_factory=list)

    def set_cell(self, record: int, attr_idx: int, content: CellContent) -> None:
        self.records[record][attr_idx] = content

    def get_cell(self, record: int, attr_idx: int) -> CellContent:
        if 0 <= record < len(self.records) and 0 <= attr_idx < len(self.attrs):
            return self.records[record][attr_idx]
        return EMPTY
