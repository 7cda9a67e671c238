"""Workbook and per-sheet engine.

Tables key tuples by immutable row/column identifiers; display positions
resolve through positional maps. Inserting a row therefore touches O(log N)
posmap nodes and zero table tuples. Formula references live in display
coordinates and are adjusted in place on structural edits (the registry is
small); stored cell data never moves.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from gridstore.core import (
    EMPTY,
    CellAddress,
    CellContent,
    ErrorValue,
    ExtentError,
    Formula,
    Number,
    Region,
    Sheet,
    Text,
    VALUE_ERROR,
)
from gridstore.costmodel import CostParams, ModelKind, pg_params, tom
from gridstore.decomposer import (
    Constraints,
    DecompEntry,
    Decomposition,
    DpBudgetError,
    IncrementalConfig,
    aggressive,
    dp_optimal,
    dp_weighted,
    greedy,
    incremental,
    validate_recoverability,
)
from gridstore.engine.adjust import (
    adjust_for_delete,
    adjust_for_insert,
    shift_region_for_delete,
    shift_region_for_insert,
)
from gridstore.engine.cache import DEFAULT_CAPACITY_CELLS, TupleCache
from gridstore.engine.relational import TableValue
from gridstore.engine.tables import ComTable, RcvTable, RomTable, TableStats, TomTable
from gridstore.formula import (
    CycleError,
    DependencyGraph,
    format_formula,
    parse_formula,
)
from gridstore.formula.ast import FormulaExpr
from gridstore.formula.evaluator import EvalValue, evaluate
from gridstore.posmap import HierarchicalMap


class EngineError(ValueError):
    pass


class FormulaCell:
    """Engine-resident formula content. The expression is adjusted in place
    on structural edits; the source text regenerates lazily."""

    __slots__ = ("expr", "_source", "_stale")

    def __init__(self, expr: FormulaExpr, source: str) -> None:
        self.expr = expr
        self._source = source
        self._stale = False

    def mark_stale(self) -> None:
        self._stale = True

    @property
    def source(self) -> str:
        if self._stale:
            self._source = format_formula(self.expr)
            self._stale = False
        return self._source

    def snapshot(self) -> Formula:
        return Formula(self.source, self.expr)


def _public(content) -> CellContent:
    return content.snapshot() if isinstance(content, FormulaCell) else content


@dataclass
class LiveEntry:
    region: Region  # display coordinates, shifted on structural edits
    kind: ModelKind
    table: RomTable | ComTable | TomTable | None  # None for RCV regions


class _EntryIndex:
    """Row-interval index over entries: sorted by region top, pruned with a
    running max of bottoms, so lookups touch only entries whose row band can
    reach the query."""

    def __init__(self, entries: list[LiveEntry]) -> None:
        self.ordered = sorted(entries, key=lambda e: e.region.top)
        self.tops = [e.region.top for e in self.ordered]
        self.max_bottom: list[int] = []
        running = 0
        for e in self.ordered:
            running = max(running, e.region.bottom)
            self.max_bottom.append(running)

    def overlapping(self, region: Region) -> list[LiveEntry]:
        import bisect

        idx = bisect.bisect_right(self.tops, region.bottom)
        out = []
        for i in range(idx - 1, -1, -1):
            if self.max_bottom[i] < region.top:
                break
            entry = self.ordered[i]
            if entry.region.overlaps(region):
                out.append(entry)
        out.reverse()
        return out


class _EngineResolver:
    """Evaluator resolver reading through the engine's physical layout."""

    def __init__(self, sheet: "SheetEngine") -> None:
        self.sheet = sheet

    @property
    def rows(self) -> int:
        return self.sheet.rows

    @property
    def cols(self) -> int:
        return self.sheet.cols

    def value_at(self, addr: CellAddress) -> EvalValue:
        content = self.sheet._read_cell(addr)
        if isinstance(content, FormulaCell):
            return self.sheet.graph.values.get(addr, VALUE_ERROR)
        return content

    def values_in(self, region: Region):
        return self.sheet.iter_effective_values(region)


class SheetEngine:
    def __init__(
        self,
        workbook: "Workbook",
        name: str,
        rows: int = 1000,
        cols: int = 26,
        posmap_order: int = 32,
    ) -> None:
        if rows < 1 or cols < 1:
            raise EngineError("sheet extents must be >= 1")
        self.workbook = workbook
        self.name = name
        self.stats = TableStats()
        self.rows_map = HierarchicalMap.from_ids(range(1, rows + 1), order=posmap_order)
        self.cols_map = HierarchicalMap.from_ids(range(1, cols + 1), order=posmap_order)
        self._next_row_id = rows + 1
        self._next_col_id = cols + 1
        self.overlay = RcvTable(f"{name}!rcv", self.stats)
        self.entries: list[LiveEntry] = []
        self._entry_index: _EntryIndex | None = None
        self.dead_rows: set[int] = set()
        self.dead_cols: set[int] = set()
        self.graph = DependencyGraph()
        self._formula_cells: dict[CellAddress, FormulaCell] = {}
        self.cache = TupleCache(DEFAULT_CAPACITY_CELLS)
        self.revision = 0
        self._table_seq = itertools.count(1)
        self.last_decomposition: Decomposition | None = None

    # --- extents and id resolution -------------------------------------------

    @property
    def rows(self) -> int:
        return len(self.rows_map)

    @property
    def cols(self) -> int:
        return len(self.cols_map)

    def _check_addr(self, addr: CellAddress) -> None:
        if not (1 <= addr.row <= self.rows and 1 <= addr.col <= self.cols):
            raise EngineError(f"address {tuple(addr)} outside extents {self.rows}x{self.cols}")

    def _row_id(self, row: int) -> int:
        return self.rows_map.lookup(row)

    def _col_id(self, col: int) -> int:
        return self.cols_map.lookup(col)

    # --- routing ---------------------------------------------------------------

    def _index(self) -> _EntryIndex:
        if self._entry_index is None:
            self._entry_index = _EntryIndex(self.entries)
        return self._entry_index

    def _mark_entries_changed(self) -> None:
        self._entry_index = None

    def _entry_at(self, addr: CellAddress) -> LiveEntry | None:
        probe = Region(addr.row, addr.col, addr.row, addr.col)
        for entry in self._index().overlapping(probe):
            return entry
        return None

    def _read_cell(self, addr: CellAddress):
        self._check_addr(addr)
        rid = self._row_id(addr.row)
        cid = self._col_id(addr.col)
        entry = self._entry_at(addr)
        if entry is not None:
            if entry.kind.name == "TOM":
                return self._tom_read(entry, addr)
            if entry.kind.name in ("ROM", "COM") and entry.table.can_hold(rid, cid):
                return entry.table.get(rid, cid)
        return self.overlay.get(rid, cid)

    def _write_cell(self, addr: CellAddress, content) -> None:
        rid = self._row_id(addr.row)
        cid = self._col_id(addr.col)
        entry = self._entry_at(addr)
        if entry is not None and entry.kind.name == "TOM":
            self._tom_write(entry, addr, content)
            return
        if (
            entry is not None
            and entry.kind.name in ("ROM", "COM")
            and entry.table.can_hold(rid, cid)
        ):
            table = entry.table
            table.set(rid, cid, content)
            tuple_id, index = (
                (rid, table.col_index[cid])
                if table.kind == "ROM"
                else (cid, table.row_index[rid])
            )
            self.cache.patch(table.table_id, tuple_id, index, content)
            if content is EMPTY and (
                (table.kind == "ROM" and rid not in table.rows)
                or (table.kind == "COM" and cid not in table.cols)
            ):
                self.cache.invalidate_tuple(table.table_id, tuple_id)
            return
        self.overlay.set(rid, cid, content)

    # --- TOM plumbing ------------------------------------------------------------

    def _tom_coords(self, entry: LiveEntry, addr: CellAddress) -> tuple[int, int]:
        return addr.row - entry.region.top - 1, addr.col - entry.region.left

    def _tom_read(self, entry: LiveEntry, addr: CellAddress):
        record, attr_idx = self._tom_coords(entry, addr)
        table: TomTable = entry.table
        if record < 0:
            name = table.attrs[attr_idx] if attr_idx < len(table.attrs) else ""
            return Text(name) if name else EMPTY
        return table.get_cell(record, attr_idx)

    def _tom_write(self, entry: LiveEntry, addr: CellAddress, content) -> None:
        record, attr_idx = self._tom_coords(entry, addr)
        table: TomTable = entry.table
        if record < 0:
            if not isinstance(content, Text) or not content.value:
                raise EngineError("linked-table attribute names must be non-empty text")
            table.attrs[attr_idx] = content.value
            return
        table.set_cell(record, attr_idx, _public(content))
        self.stats.tuple_writes += 1

    # --- reads ---------------------------------------------------------------------

    def _content_grid(self, region: Region):
        """Raw contents (FormulaCell included) for a display region, fetched
        per overlapped table with whole-tuple materialization."""
        rows_n = region.row_count
        cols_n = region.col_count
        grid = [[EMPTY] * cols_n for _ in range(rows_n)]
        row_ids = self.rows_map.lookup_range(region.top, rows_n)
        col_ids = self.cols_map.lookup_range(region.left, cols_n)
        for entry in self._index().overlapping(region):
            overlap = entry.region.intersect(region)
            if overlap is None:
                continue
            if entry.kind.name == "ROM":
                table: RomTable = entry.table
                col_span = [
                    (c - region.left, table.col_index.get(col_ids[c - region.left]))
                    for c in range(overlap.left, overlap.right + 1)
                ]
                for r in range(overlap.top, overlap.bottom + 1):
                    rid = row_ids[r - region.top]
                    tup = self.cache.get(table.table_id, rid)
                    if tup is None:
                        tup = table.fetch_tuple(rid)
                        if tup is not None:
                            self.cache.put(table.table_id, rid, tup)
                    if tup is None:
                        continue
                    out_row = grid[r - region.top]
                    for out_c, idx in col_span:
                        if idx is not None:
                            out_row[out_c] = tup[idx]
            elif entry.kind.name == "COM":
                table: ComTable = entry.table
                row_span = [
                    (r - region.top, table.row_index.get(row_ids[r - region.top]))
                    for r in range(overlap.top, overlap.bottom + 1)
                ]
                for c in range(overlap.left, overlap.right + 1):
                    cid = col_ids[c - region.left]
                    tup = self.cache.get(table.table_id, cid)
                    if tup is None:
                        tup = table.fetch_tuple(cid)
                        if tup is not None:
                            self.cache.put(table.table_id, cid, tup)
                    if tup is None:
                        continue
                    for out_r, idx in row_span:
                        if idx is not None:
                            grid[out_r][c - region.left] = tup[idx]
            elif entry.kind.name == "TOM":
                for r in range(overlap.top, overlap.bottom + 1):
                    for c in range(overlap.left, overlap.right + 1):
                        grid[r - region.top][c - region.left] = self._tom_read(
                            entry, CellAddress(r, c)
                        )
        # Global key-value overlay: everything no rectangular table holds.
        by_row = self.overlay.by_row
        for r_off, rid in enumerate(row_ids):
            row_cells = by_row.get(rid)
            if not row_cells:
                continue
            out_row = grid[r_off]
            for c_off, cid in enumerate(col_ids):
                if cid in row_cells:
                    out_row[c_off] = self.overlay.get(rid, cid)
        return grid

    def get_cells(self, region: Region) -> list[list[CellContent]]:
        """Grid of cell contents for a display region (formulas included)."""
        if region.bottom > self.rows or region.right > self.cols:
            raise EngineError(f"range {region.to_a1()} outside extents")
        return [[_public(c) for c in row] for row in self._content_grid(region)]

    def iter_effective_values(self, region: Region):
        """Effective values of the filled cells in a region, fetched per
        overlapped table without materializing the empty area. This is the
        formula evaluator's read path, so its wall-clock tracks the layout."""
        values = self.graph.values
        row_ids = self.rows_map.lookup_range(region.top, region.row_count)
        col_ids = self.cols_map.lookup_range(region.left, region.col_count)

        def effective(content, row, col):
            if isinstance(content, FormulaCell):
                return values.get(CellAddress(row, col), VALUE_ERROR)
            return content

        for entry in self._index().overlapping(region):
            overlap = entry.region.intersect(region)
            if overlap is None:
                continue
            if entry.kind.name == "ROM":
                table: RomTable = entry.table
                span = [
                    (c, table.col_index.get(col_ids[c - region.left]))
                    for c in range(overlap.left, overlap.right + 1)
                ]
                for r in range(overlap.top, overlap.bottom + 1):
                    rid = row_ids[r - region.top]
                    tup = self.cache.get(table.table_id, rid)
                    if tup is None:
                        tup = table.fetch_tuple(rid)
                        if tup is not None:
                            self.cache.put(table.table_id, rid, tup)
                    if tup is None:
                        continue
                    for c, idx in span:
                        if idx is None:
                            continue
                        content = tup[idx]
                        if content is not EMPTY:
                            yield effective(content, r, c)
            elif entry.kind.name == "COM":
                table: ComTable = entry.table
                span = [
                    (r, table.row_index.get(row_ids[r - region.top]))
                    for r in range(overlap.top, overlap.bottom + 1)
                ]
                for c in range(overlap.left, overlap.right + 1):
                    cid = col_ids[c - region.left]
                    tup = self.cache.get(table.table_id, cid)
                    if tup is None:
                        tup = table.fetch_tuple(cid)
                        if tup is not None:
                            self.cache.put(table.table_id, cid, tup)
                    if tup is None:
                        continue
                    for r, idx in span:
                        if idx is None:
                            continue
                        content = tup[idx]
                        if content is not EMPTY:
                            yield effective(content, r, c)
            elif entry.kind.name == "TOM":
                for r in range(overlap.top, overlap.bottom + 1):
                    for c in range(overlap.left, overlap.right + 1):
                        content = self._tom_read(entry, CellAddress(r, c))
                        if content is not EMPTY:
                            yield effective(content, r, c)
            # RCV regions fall through to the overlay pass below.
        by_row = self.overlay.by_row
        col_pos_of = {cid: region.left + off for off, cid in enumerate(col_ids)}
        for r_off, rid in enumerate(row_ids):
            row_cells = by_row.get(rid)
            if not row_cells:
                continue
            row = region.top + r_off
            if len(row_cells) <= region.col_count:
                for cid in row_cells:
                    col = col_pos_of.get(cid)
                    if col is not None:
                        yield effective(self.overlay.get(rid, cid), row, col)
            else:
                for c_off, cid in enumerate(col_ids):
                    if cid in row_cells:
                        yield effective(
                            self.overlay.get(rid, cid), row, region.left + c_off
                        )

    def get_values(self, region: Region) -> list[list[EvalValue]]:
        """Effective values: formula cells yield their computed value."""
        grid = self._content_grid(region)
        values = self.graph.values
        out = []
        for r, row in enumerate(grid):
            out_row = []
            for c, content in enumerate(row):
                if isinstance(content, FormulaCell):
                    addr = CellAddress(region.top + r, region.left + c)
                    out_row.append(values.get(addr, VALUE_ERROR))
                else:
                    out_row.append(content)
            out.append(out_row)
        return out

    def resolver(self) -> _EngineResolver:
        return _EngineResolver(self)

    # --- cell edits --------------------------------------------------------------

    def update_cell(self, addr: CellAddress, content: CellContent) -> list[tuple[CellAddress, EvalValue]]:
        """Set a cell; recomputes dependents. Returns (address, new effective
        value) for every cell whose value changed, edited cell first."""
        self._check_addr(addr)
        addr = CellAddress(*addr)
        if isinstance(content, Formula):
            expr = content.expr if content.expr is not None else parse_formula(content.source)
            try:
                self.graph.add_formula(addr, expr)  # raises CycleError, state intact
            except CycleError:
                raise
            new_content = FormulaCell(expr, content.source)
            self._formula_cells[addr] = new_content
        else:
            if addr in self._formula_cells:
                del self._formula_cells[addr]
                self.graph.remove_formula(addr)
            new_content = content
        self._write_cell(addr, new_content)
        updates = self.graph.recompute(self.resolver(), {addr})
        self.revision += 1
        effective = (
            self.graph.values.get(addr, VALUE_ERROR)
            if isinstance(new_content, FormulaCell)
            else content
        )
        result = [(addr, effective)]
        result.extend((a, v) for a, v in updates if a != addr)
        return result

    # --- structural edits -----------------------------------------------------------

    def _rebuild_graph(self, value_map: dict[CellAddress, EvalValue]) -> None:
        graph = DependencyGraph()
        for addr, cell in self._formula_cells.items():
            graph.add_formula(addr, cell.expr)
        graph.values = value_map
        self.graph = graph

    def insert_row_after(self, row: int) -> None:
        """Insert a fresh row at position row+1; nothing stored moves."""
        if not (0 <= row <= self.rows):
            raise EngineError(f"row {row} outside extents")
        pos = row + 1
        self.rows_map.insert_at(pos, self._next_row_id)
        self._next_row_id += 1
        self.entries = [
            LiveEntry(shift_region_for_insert(e.region, pos, "row"), e.kind, e.table)
            for e in self.entries
        ]
        self._mark_entries_changed()
        new_cells: dict[CellAddress, FormulaCell] = {}
        new_values: dict[CellAddress, EvalValue] = {}
        values = self.graph.values
        for addr, cell in self._formula_cells.items():
            cell.expr = adjust_for_insert(cell.expr, pos, "row")
            cell.mark_stale()
            target = CellAddress(addr.row + 1, addr.col) if addr.row >= pos else addr
            new_cells[target] = cell
            if addr in values:
                new_values[target] = values[addr]
        self._formula_cells = new_cells
        self._rebuild_graph(new_values)
        self.revision += 1

    def insert_column_after(self, col: int) -> None:
        if not (0 <= col <= self.cols):
            raise EngineError(f"column {col} outside extents")
        pos = col + 1
        self.cols_map.insert_at(pos, self._next_col_id)
        self._next_col_id += 1
        self.entries = [
            LiveEntry(shift_region_for_insert(e.region, pos, "col"), e.kind, e.table)
            for e in self.entries
        ]
        self._mark_entries_changed()
        for entry in self.entries:
            if entry.kind.name == "TOM" and entry.region.left < pos <= entry.region.right:
                attr_idx = pos - entry.region.left
                entry.table.attrs.insert(attr_idx, f"col{attr_idx + 1}")
                for record in entry.table.records:
                    record.insert(attr_idx, EMPTY)
        new_cells: dict[CellAddress, FormulaCell] = {}
        new_values: dict[CellAddress, EvalValue] = {}
        values = self.graph.values
        for addr, cell in self._formula_cells.items():
            cell.expr = adjust_for_insert(cell.expr, pos, "col")
            cell.mark_stale()
            target = CellAddress(addr.row, addr.col + 1) if addr.col >= pos else addr
            new_cells[target] = cell
            if addr in values:
                new_values[target] = values[addr]
        self._formula_cells = new_cells
        self._rebuild_graph(new_values)
        self.revision += 1

    def delete_row(self, row: int) -> None:
        if not (1 <= row <= self.rows):
            raise EngineError(f"row {row} outside extents")
        for entry in self.entries:
            if entry.kind.name == "TOM" and entry.region.top == row:
                raise EngineError("cannot delete the attribute row of a linked table")
        rid = self.rows_map.delete_at(row)
        self.dead_rows.add(rid)
        kept: list[LiveEntry] = []
        for entry in self.entries:
            if (
                entry.kind.name == "TOM"
                and entry.region.top < row <= entry.region.bottom
            ):
                del entry.table.records[row - entry.region.top - 1]
            region = shift_region_for_delete(entry.region, row, "row")
            if region is not None:
                kept.append(LiveEntry(region, entry.kind, entry.table))
        self.entries = kept
        self._mark_entries_changed()
        new_cells: dict[CellAddress, FormulaCell] = {}
        new_values: dict[CellAddress, EvalValue] = {}
        values = self.graph.values
        for addr, cell in self._formula_cells.items():
            if addr.row == row:
                continue  # the formula cell itself is gone
            cell.expr = adjust_for_delete(cell.expr, row, "row")
            cell.mark_stale()
            target = CellAddress(addr.row - 1, addr.col) if addr.row > row else addr
            new_cells[target] = cell
            if addr in values:
                new_values[target] = values[addr]
        self._formula_cells = new_cells
        self._rebuild_graph(new_values)
        self.graph.full_recompute(self.resolver())
        self.revision += 1

    def delete_column(self, col: int) -> None:
        if not (1 <= col <= self.cols):
            raise EngineError(f"column {col} outside extents")
        cid = self.cols_map.delete_at(col)
        self.dead_cols.add(cid)
        kept: list[LiveEntry] = []
        for entry in self.entries:
            if (
                entry.kind.name == "TOM"
                and entry.region.left <= col <= entry.region.right
            ):
                attr_idx = col - entry.region.left
                if len(entry.table.attrs) > 1:
                    del entry.table.attrs[attr_idx]
                    for record in entry.table.records:
                        del record[attr_idx]
            region = shift_region_for_delete(entry.region, col, "col")
            if region is not None:
                kept.append(LiveEntry(region, entry.kind, entry.table))
        self.entries = kept
        self._mark_entries_changed()
        new_cells: dict[CellAddress, FormulaCell] = {}
        new_values: dict[CellAddress, EvalValue] = {}
        values = self.graph.values
        for addr, cell in self._formula_cells.items():
            if addr.col == col:
                continue
            cell.expr = adjust_for_delete(cell.expr, col, "col")
            cell.mark_stale()
            target = CellAddress(addr.row, addr.col - 1) if addr.col > col else addr
            new_cells[target] = cell
            if addr in values:
                new_values[target] = values[addr]
        self._formula_cells = new_cells
        self._rebuild_graph(new_values)
        self.graph.full_recompute(self.resolver())
        self.revision += 1

    # --- linked tables ------------------------------------------------------------

    def link_table(self, region: Region, table_name: str) -> TomTable:
        """Bind a region to a named table two-way; creates the table from the
        region's contents when the name is new. First row holds attribute
        names."""
        self._check_addr(CellAddress(region.top, region.left))
        self._check_addr(CellAddress(region.bottom, region.right))
        if region.row_count < 2:
            raise EngineError("linked region needs an attribute row plus records")
        for entry in self.entries:
            if entry.kind.name == "TOM" and entry.region.overlaps(region):
                raise EngineError(f"region overlaps linked table {entry.kind.table!r}")
        existing = self.workbook.linked_tables.get(table_name)
        grid = self.get_values(region)
        if existing is None:
            attrs = []
            for i, content in enumerate(grid[0]):
                if isinstance(content, Text) and content.value:
                    attrs.append(content.value)
                else:
                    attrs.append(f"col{i + 1}")
            records = [[_as_storable(v) for v in row] for row in grid[1:]]
            table = TomTable(table_name, attrs, records)
            self.workbook.linked_tables[table_name] = table
        else:
            table = existing
            if len(table.attrs) != region.col_count:
                raise EngineError(
                    f"table {table_name!r} has {len(table.attrs)} attributes; "
                    f"region is {region.col_count} wide"
                )
            if len(table.records) > region.row_count - 1:
                raise EngineError(f"region too small for table {table_name!r}")
        self._evict_region(region)
        self.entries.append(LiveEntry(region, tom(table_name), table))
        self._mark_entries_changed()
        self.graph.recompute(self.resolver(), {addr for addr in region.cells()})
        self.revision += 1
        return table

    def _evict_region(self, region: Region) -> None:
        """Remove the region's cells from their current tables; entries that
        overlap dissolve, their outside cells landing in the overlay."""
        doomed: list[LiveEntry] = []
        kept: list[LiveEntry] = []
        for entry in self.entries:
            (doomed if entry.region.overlaps(region) else kept).append(entry)
        row_pos = self._row_positions()
        col_pos = self._col_positions()
        for entry in doomed:
            if entry.kind.name == "TOM":
                raise EngineError("cannot dissolve a linked-table region")
            table = entry.table
            if table is None:
                continue  # RCV region: its cells already live in the overlay
            for rid, cid, content in list(table.iter_filled(self.dead_rows, self.dead_cols)):
                addr = CellAddress(row_pos[rid], col_pos[cid])
                if not region.contains(addr):
                    self.overlay.set(rid, cid, content)
            self.cache.invalidate_table(table.table_id)
        self.entries = kept
        self._mark_entries_changed()
        # Cells inside the region disappear from general storage: the linked
        # table owns them now.
        for addr in region.cells():
            rid = self._row_id(addr.row)
            cid = self._col_id(addr.col)
            self.overlay.set(rid, cid, EMPTY)
            if addr in self._formula_cells:
                del self._formula_cells[addr]
                self.graph.remove_formula(addr)
                self.graph.values.pop(addr, None)

    # --- bulk operations --------------------------------------------------------------

    def bulk_load(self, sheet: Sheet) -> None:
        """Import a plain sheet's cells into the overlay in one pass, then
        build the dependency graph and evaluate every formula once. The
        engine must be empty."""
        if self.entries or self.overlay.cells or self._formula_cells:
            raise EngineError("bulk_load requires an empty sheet engine")
        if sheet.rows > self.rows or sheet.cols > self.cols:
            raise EngineError("sheet exceeds engine extents")
        for addr, content in sheet.cells.items():
            rid, cid = addr.row, addr.col  # fresh engine: position == id
            if isinstance(content, Formula):
                expr = content.expr if content.expr is not None else parse_formula(content.source)
                cell = FormulaCell(expr, content.source)
                self._formula_cells[addr] = cell
                self.overlay.set(rid, cid, cell)
            else:
                self.overlay.set(rid, cid, content)
        self._rebuild_graph({})
        self.graph.full_recompute(self.resolver())
        self.stats.reset()
        self.revision += 1

    def storage_cost(self, params: CostParams | None = None) -> float:
        """Modeled storage of the live physical state: rectangular tables by
        their current region dimensions, plus every overlay cell at s5."""
        params = params or self.workbook.cost_params
        total = 0.0
        for entry in self.entries:
            region = entry.region
            if entry.kind.name == "ROM":
                total += (
                    params.s1
                    + params.s2 * region.area
                    + params.s3 * region.col_count
                    + params.s4 * region.row_count
                )
            elif entry.kind.name == "COM":
                total += (
                    params.s1
                    + params.s2 * region.area
                    + params.s4 * region.col_count
                    + params.s3 * region.row_count
                )
        total += params.s5 * self.overlay.cell_count(self.dead_rows, self.dead_cols)
        return total

    # --- materialization -------------------------------------------------------------

    def _row_positions(self) -> dict[int, int]:
        return {rid: pos for pos, rid in enumerate(self.rows_map.to_ids(), start=1)}

    def _col_positions(self) -> dict[int, int]:
        return {cid: pos for pos, cid in enumerate(self.cols_map.to_ids(), start=1)}

    def iter_filled(self):
        """(address, public content) for every stored cell, via id->position
        maps built once per call."""
        row_pos = self._row_positions()
        col_pos = self._col_positions()
        seen: set[CellAddress] = set()
        for entry in self.entries:
            if entry.kind.name == "TOM":
                for addr in entry.region.cells():
                    content = self._tom_read(entry, addr)
                    if content is not EMPTY:
                        seen.add(addr)
                        yield addr, _public(content)
            elif entry.kind.name in ("ROM", "COM"):
                for rid, cid, content in entry.table.iter_filled(self.dead_rows, self.dead_cols):
                    addr = CellAddress(row_pos[rid], col_pos[cid])
                    seen.add(addr)
                    yield addr, _public(content)
        for rid, cid, content in self.overlay.iter_filled(self.dead_rows, self.dead_cols):
            addr = CellAddress(row_pos[rid], col_pos[cid])
            if addr in seen:
                raise EngineError(f"cell {tuple(addr)} stored twice")
            yield addr, _public(content)

    def to_sheet(self) -> Sheet:
        sheet = Sheet(rows=max(1, self.rows), cols=max(1, self.cols))
        for addr, content in self.iter_filled():
            sheet.set(addr, content)
        return sheet

    def current_decomposition(self) -> Decomposition:
        entries = [DecompEntry(e.region, e.kind) for e in self.entries]
        decomp = Decomposition(entries, "live", 0.0)
        if self.last_decomposition is not None:
            decomp.provenance = self.last_decomposition.provenance
        return decomp

    # --- layout optimization ------------------------------------------------------------

    def optimize_layout(
        self,
        algorithm: str = "aggressive",
        params: CostParams | None = None,
        eta: float | None = None,
        max_table_cols: int | None = None,
    ) -> tuple[Decomposition, int]:
        """Re-run the optimizer and physically migrate cells into the new
        tables. Returns the decomposition and the number of cells that moved."""
        params = params or pg_params()
        sheet = self.to_sheet()
        pins = tuple(
            (e.region, e.kind.table) for e in self.entries if e.kind.name == "TOM"
        )
        constraints = Constraints(pinned_tom=pins, max_table_cols=max_table_cols)
        existing = Decomposition(
            [DecompEntry(e.region, e.kind) for e in self.entries if e.kind.name != "TOM"],
            "live",
        )
        if algorithm == "dp":
            decomp = dp_optimal(sheet, params, constraints)
        elif algorithm == "weighted":
            decomp = dp_weighted(sheet, params, constraints)
        elif algorithm == "greedy":
            decomp = greedy(sheet, params, constraints)
        elif algorithm == "aggressive":
            decomp = aggressive(sheet, params, constraints)
        elif algorithm == "incremental":
            cfg = IncrementalConfig(eta if eta is not None else 1.0, existing)
            decomp, _ = incremental(sheet, params, cfg, "aggressive", constraints)
        else:
            raise EngineError(f"unknown optimizer algorithm {algorithm!r}")
        if algorithm == "incremental":
            # A kept (high-eta) plan may predate recently added cells; those
            # flow to the key-value overlay, so only disjointness is checked
            # here and the post-adoption audit proves exactly-once storage.
            for i, a in enumerate(decomp.entries):
                for b in decomp.entries[i + 1 :]:
                    if a.region.overlaps(b.region):
                        raise EngineError(
                            f"optimizer produced overlapping entries: {a.region} / {b.region}"
                        )
        else:
            violation = validate_recoverability(decomp, sheet)
            if violation is not None:
                raise EngineError(f"optimizer produced unrecoverable layout: {violation}")
        migrated = self._adopt_layout(decomp)
        fault = self.audit()
        if fault is not None:
            raise EngineError(f"layout adoption broke recoverability: {fault}")
        self.last_decomposition = decomp
        self.revision += 1
        if self.workbook.bound_dir:
            from gridstore.store import save

            save(self.workbook, self.workbook.bound_dir)
        return decomp, migrated

    def _adopt_layout(self, decomp: Decomposition) -> int:
        """Move cells into the tables the new layout prescribes; exact
        region+kind matches keep their table objects and migrate nothing."""
        row_pos = self._row_positions()
        col_pos = self._col_positions()
        old_by_key: dict[tuple[Region, str], LiveEntry] = {
            (e.region, e.kind.name): e for e in self.entries
        }
        row_ids_in_order = self.rows_map.to_ids()
        col_ids_in_order = self.cols_map.to_ids()

        cells: dict[CellAddress, tuple[int, int, object, str]] = {}
        for entry in self.entries:
            if entry.table is None or entry.kind.name == "TOM":
                continue  # RCV regions live in the overlay, collected below
            for rid, cid, content in entry.table.iter_filled(self.dead_rows, self.dead_cols):
                addr = CellAddress(row_pos[rid], col_pos[cid])
                cells[addr] = (rid, cid, content, entry.table.table_id)
        for rid, cid, content in self.overlay.iter_filled(self.dead_rows, self.dead_cols):
            addr = CellAddress(row_pos[rid], col_pos[cid])
            cells[addr] = (rid, cid, content, self.overlay.table_id)

        new_entries: list[LiveEntry] = []
        migrated = 0
        fresh_overlay = RcvTable(self.overlay.table_id, self.stats)
        placed: set[CellAddress] = set()
        for dentry in decomp.entries:
            region, kind = dentry.region, dentry.kind
            if kind.name == "TOM":
                old = old_by_key.get((region, "TOM"))
                if old is None:
                    raise EngineError(f"optimizer invented linked table at {region}")
                new_entries.append(old)
                for addr in region.cells():
                    placed.add(addr)
                continue
            if kind.name == "RCV":
                for addr, (rid, cid, content, src) in cells.items():
                    if region.contains(addr):
                        fresh_overlay.set(rid, cid, content)
                        placed.add(addr)
                        if src != self.overlay.table_id:
                            migrated += 1
                new_entries.append(LiveEntry(region, kind, None))
                continue
            reuse = old_by_key.get((region, kind.name))
            span_col_ids = [
                col_ids_in_order[c - 1] for c in range(region.left, region.right + 1)
            ]
            span_row_ids = [
                row_ids_in_order[r - 1] for r in range(region.top, region.bottom + 1)
            ]
            if (
                reuse is not None
                and reuse.table is not None
                and (
                    (kind.name == "ROM" and reuse.table.col_ids == span_col_ids)
                    or (kind.name == "COM" and reuse.table.row_ids == span_row_ids)
                )
            ):
                table = reuse.table
                for rid in list(table.rows) if kind.name == "ROM" else []:
                    if rid in self.dead_rows:
                        del table.rows[rid]
                if kind.name == "COM":
                    for cid in list(table.cols):
                        if cid in self.dead_cols:
                            del table.cols[cid]
                for addr, (rid, cid, content, src) in cells.items():
                    if region.contains(addr):
                        placed.add(addr)
                        if src != table.table_id and table.can_hold(rid, cid):
                            table.set(rid, cid, content)
                            migrated += 1
                new_entries.append(LiveEntry(region, kind, table))
                continue
            table_id = f"{self.name}!t{next(self._table_seq)}"
            if kind.name == "ROM":
                table = RomTable(table_id, span_col_ids, self.stats)
            else:
                table = ComTable(table_id, span_row_ids, self.stats)
            for addr, (rid, cid, content, src) in cells.items():
                if region.contains(addr):
                    table.set(rid, cid, content)
                    placed.add(addr)
                    migrated += 1
            new_entries.append(LiveEntry(region, kind, table))

        for addr, (rid, cid, content, src) in cells.items():
            if addr not in placed:
                fresh_overlay.set(rid, cid, content)
                if src != self.overlay.table_id:
                    migrated += 1
        self.overlay = fresh_overlay
        self.entries = new_entries
        self._mark_entries_changed()
        self.dead_rows = set()
        self.dead_cols = set()
        self.cache.clear()
        return migrated

    # --- audits -------------------------------------------------------------------------

    def audit(self) -> str | None:
        """Exactly-once storage check plus read-path agreement."""
        try:
            seen: dict[CellAddress, CellContent] = {}
            for addr, content in self.iter_filled():
                if addr in seen:
                    return f"cell {tuple(addr)} reachable twice"
                seen[addr] = content
        except EngineError as err:
            return str(err)
        for addr, content in seen.items():
            direct = _public(self._read_cell(addr))
            if direct != content:
                return f"read path disagrees at {tuple(addr)}"
        fault = self.rows_map.check_invariants() or self.cols_map.check_invariants()
        if fault:
            return f"posmap: {fault}"
        return None


def _as_storable(value: EvalValue) -> CellContent:
    """Linked tables hold plain values; computed errors degrade to text."""
    if isinstance(value, ErrorValue):
        return Text(value.code)
    return value


class Workbook:
    def __init__(self, cost_params: CostParams | None = None) -> None:
        self.sheets: dict[str, SheetEngine] = {}
        self.linked_tables: dict[str, TomTable] = {}
        self.cost_params = cost_params or pg_params()
        self.bound_dir: str | None = None

    def create_sheet(self, name: str, rows: int = 1000, cols: int = 26) -> SheetEngine:
        if name in self.sheets:
            raise EngineError(f"sheet {name!r} already exists")
        sheet = SheetEngine(self, name, rows, cols)
        self.sheets[name] = sheet
        return sheet

    def sheet(self, name: str) -> SheetEngine:
        try:
            return self.sheets[name]
        except KeyError:
            raise EngineError(f"no sheet named {name!r}") from None

    def table_value(self, name: str) -> TableValue:
        table = self.linked_tables.get(name)
        if table is None:
            raise EngineError(f"no linked table named {name!r}")
        return TableValue(tuple(table.attrs), tuple(tuple(row) for row in table.records))

    def write_linked_table(self, name: str, value: TableValue) -> None:
        """Replace a linked table's contents; bound regions re-render on the
        next read and dependent formulas recompute."""
        table = self.linked_tables.get(name)
        if table is None:
            raise EngineError(f"no linked table named {name!r}")
        table.attrs = list(value.attrs)
        table.records = [list(row) for row in value.rows]
        for sheet in self.sheets.values():
            for entry in sheet.entries:
                if entry.kind.name == "TOM" and entry.kind.table == name:
                    if len(table.records) > entry.region.row_count - 1:
                        raise EngineError(f"table {name!r} no longer fits its region")
                    sheet.graph.recompute(
                        sheet.resolver(), set(entry.region.cells())
                    )
                    sheet.revision += 1
